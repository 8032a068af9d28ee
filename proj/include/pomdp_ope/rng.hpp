#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "pomdp_ope/common.hpp"

namespace pomdp_ope {

/// Mixes a base seed with a stream index so that parallel generators
/// never share state (seed-space partitioning).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// Deterministic RNG wrapper. All sampling goes through hand-rolled
/// transforms so sequences do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Index sampled from an unnormalized nonnegative weight row.
  int categorical(const double* w, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += w[i];
    if (!(total > 0.0)) throw NumericError("categorical: weights sum to zero");
    double u = uniform() * total;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    // Guard against roundoff on the last positive entry.
    for (int i = n - 1; i >= 0; --i)
      if (w[i] > 0.0) return i;
    return n - 1;
  }

  int categorical(const Vec& w) { return categorical(w.data(), static_cast<int>(w.size())); }

  /// Row `r` of a matrix whose rows are probability vectors.
  int categorical_row(const Mat& table, int r) {
    Vec row = table.row(r).transpose();
    return categorical(row);
  }

  /// Standard normal via the polar Box-Muller transform.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pomdp_ope
