#include "pomdp_ope/features.hpp"

#include <algorithm>
#include <cmath>

namespace pomdp_ope {

FbarFeatures one_hot_fbar(const WindowSpaces& spaces) {
  FbarFeatures f;
  std::int64_t f_size = spaces.f.size();
  std::int64_t dim = spaces.fbar_size();
  if (dim > (1 << 26)) throw CapacityError("one-hot Fbar dimension too large");
  f.dim = static_cast<int>(dim);
  f.eval = [f_size, dim](std::int64_t z_idx, std::int64_t f_idx) {
    std::int64_t i = z_idx * f_size + f_idx;
    if (i < 0 || i >= dim) throw ArgumentError("one_hot_fbar: index out of range");
    return SparseVec{static_cast<int>(dim), {{static_cast<int>(i), 1.0}}};
  };
  return f;
}

HistFeatures one_hot_history(const WindowSpaces& spaces) {
  HistFeatures f;
  std::int64_t dim = spaces.h.size();
  if (dim > (1 << 26)) throw CapacityError("one-hot history dimension too large");
  f.dim = static_cast<int>(dim);
  f.eval = [dim](std::int64_t h_idx, int) {
    if (h_idx < 0 || h_idx >= dim) throw ArgumentError("one_hot_history: index out of range");
    return SparseVec{static_cast<int>(dim), {{static_cast<int>(h_idx), 1.0}}};
  };
  return f;
}

HistFeatures current_obs_history(int n_obs) {
  HistFeatures f;
  f.dim = n_obs;
  f.eval = [n_obs](std::int64_t, int o) {
    if (o < 0 || o >= n_obs) throw ArgumentError("current_obs_history: index out of range");
    return SparseVec{n_obs, {{o, 1.0}}};
  };
  return f;
}

Vec one_hot(std::int64_t index, std::int64_t size) {
  if (index < 0 || index >= size) throw ArgumentError("one_hot: index out of range");
  Vec v = Vec::Zero(size);
  v(index) = 1.0;
  return v;
}

Vec quadratic_features(const Vec& x) {
  if (!x.allFinite()) throw ArgumentError("quadratic_features: non-finite input");
  int d = static_cast<int>(x.size());
  Vec out(1 + d * d);
  out(0) = 1.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(1 + i * d + j) = x(i) * x(j);
  return out;
}

Vec quadratic_features(const Vec& x, const Vec& box) {
  if (box.size() != x.size()) throw ArgumentError("quadratic_features: box size mismatch");
  double b2 = box.squaredNorm();
  double scale = 1.0 / std::sqrt(1.0 + b2 * b2);
  return quadratic_features(x) * scale;
}

KernelFn linear_kernel() {
  return {[](const Vec& a, const Vec& b) { return a.dot(b); }};
}

KernelFn gaussian_kernel(double bandwidth) {
  if (!(bandwidth > 0.0)) throw ArgumentError("gaussian_kernel: bandwidth must be > 0");
  double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  return {[inv](const Vec& a, const Vec& b) {
    return std::exp(-(a - b).squaredNorm() * inv);
  }};
}

double median_heuristic_bandwidth(const std::vector<Vec>& points, std::size_t cap) {
  if (points.size() < 2) throw ArgumentError("median heuristic needs >= 2 points");
  std::size_t n = std::min(points.size(), cap);
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dists.push_back((points[i] - points[j]).norm());
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  double med = dists[dists.size() / 2];
  return med > 0.0 ? med : 1.0;
}

Mat gram_matrix(const KernelFn& kernel, const std::vector<Vec>& points) {
  if (points.empty()) throw ArgumentError("gram_matrix: empty point list");
  int n = static_cast<int>(points.size());
  Mat k(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = kernel.eval(points[i], points[j]);
      k(i, j) = v;
      k(j, i) = v;
    }
  return k;
}

Mat cross_gram(const KernelFn& kernel, const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.empty() || b.empty()) throw ArgumentError("cross_gram: empty point list");
  Mat k(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) k(i, j) = kernel.eval(a[i], b[j]);
  return k;
}

namespace {

Vec window_to_reals(const PairWindow& w, int extra) {
  Vec v(2 * w.size() + extra);
  int k = 0;
  for (const auto& [o, a] : w) {
    v(k++) = o;
    v(k++) = a;
  }
  return v;
}

}  // namespace

FbarEmbed one_hot_fbar_embed(const WindowSpaces& spaces) {
  auto z_codec = spaces.z;
  auto f_codec = spaces.f;
  std::int64_t f_size = spaces.f.size();
  std::int64_t dim = spaces.fbar_size();
  return [z_codec, f_codec, f_size, dim](const PairWindow& z, const Future& f) {
    return one_hot(z_codec.encode(z) * f_size + f_codec.encode(f), dim);
  };
}

HistEmbed one_hot_history_embed(const WindowSpaces& spaces) {
  auto h_codec = spaces.h;
  return [h_codec](const PairWindow& h, int) {
    return one_hot(h_codec.encode(h), h_codec.size());
  };
}

FbarEmbed raw_fbar_embed() {
  return [](const PairWindow& z, const Future& f) {
    Vec v(2 * z.size() + f.obs.size() + f.acts.size());
    int k = 0;
    for (const auto& [o, a] : z) {
      v(k++) = o;
      v(k++) = a;
    }
    for (int o : f.obs) v(k++) = o;
    for (int a : f.acts) v(k++) = a;
    return v;
  };
}

HistEmbed raw_history_embed() {
  return [](const PairWindow& h, int) {
    Vec v = window_to_reals(h, 0);
    return v;
  };
}

}  // namespace pomdp_ope
