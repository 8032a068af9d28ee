#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pomdp_ope/common.hpp"
#include "pomdp_ope/windows.hpp"

namespace pomdp_ope {

/// Feature vector in coordinate form; one-hot maps produce a single entry.
struct SparseVec {
  int dim = 0;
  std::vector<std::pair<int, double>> entries;

  Vec dense() const {
    Vec v = Vec::Zero(dim);
    for (const auto& [i, x] : entries) v(i) += x;
    return v;
  }
};

/// phi over Fbar = (z, f), evaluated on flat indices (tabular models).
struct FbarFeatures {
  int dim = 0;
  std::function<SparseVec(std::int64_t z_idx, std::int64_t f_idx)> eval;
};

/// phi over the instrument side. Receives the history window index and
/// the current observation; the standard map uses only h, the MDP
/// reduction uses only o ("H := S" with an identity emission).
struct HistFeatures {
  int dim = 0;
  std::function<SparseVec(std::int64_t h_idx, int o)> eval;
};

FbarFeatures one_hot_fbar(const WindowSpaces& spaces);
HistFeatures one_hot_history(const WindowSpaces& spaces);
HistFeatures current_obs_history(int n_obs);

/// Canonical one-hot vector; documented flat ordering is lexicographic
/// over the window components, observations before actions, oldest
/// first (see PairWindowCodec / FutureCodec).
Vec one_hot(std::int64_t index, std::int64_t size);

/// (1, x ox x flattened); with a bounding box |x_i| <= box_i the result is
/// scaled so that ||phi|| <= 1 on the box.
Vec quadratic_features(const Vec& x);
Vec quadratic_features(const Vec& x, const Vec& box);

struct KernelFn {
  std::function<double(const Vec&, const Vec&)> eval;
};

KernelFn linear_kernel();
KernelFn gaussian_kernel(double bandwidth);
/// Median pairwise distance over (a capped subsample of) the points.
double median_heuristic_bandwidth(const std::vector<Vec>& points, std::size_t cap = 2000);

Mat gram_matrix(const KernelFn& kernel, const std::vector<Vec>& points);
Mat cross_gram(const KernelFn& kernel, const std::vector<Vec>& a, const std::vector<Vec>& b);

/// Point embeddings feeding the kernel estimators.
using FbarEmbed = std::function<Vec(const PairWindow& z, const Future& f)>;
using HistEmbed = std::function<Vec(const PairWindow& h, int o)>;

FbarEmbed one_hot_fbar_embed(const WindowSpaces& spaces);
HistEmbed one_hot_history_embed(const WindowSpaces& spaces);
/// Raw integer components as reals (for smooth kernels on tabular data).
FbarEmbed raw_fbar_embed();
HistEmbed raw_history_embed();

}  // namespace pomdp_ope
