#pragma once

#include <string>

#include "pomdp_ope/common.hpp"
#include "pomdp_ope/rng.hpp"
#include "pomdp_ope/windows.hpp"

namespace pomdp_ope {

/**
 * M-memory policy pi(a | z, o) where z holds the last M observation-action
 * pairs.
 *
 * Tabular kind: explicit probability table with one row per (z, o),
 * row index z_idx * n_obs + o.
 *
 * Linear-gain kind (LQG): a = gain * [o; z_flat] + noise_std * eps with
 * eps standard normal; noise_std = 0 gives the deterministic linear
 * policy. z_flat stacks the last M pairs as [o_{t-M}; a_{t-M}; ...].
 */
class MemoryPolicy {
 public:
  enum class Kind { Tabular, LinearGain };

  MemoryPolicy() = default;

  static MemoryPolicy tabular(int memory, int n_obs, int n_actions, Mat table);
  static MemoryPolicy uniform(int memory, int n_obs, int n_actions);
  static MemoryPolicy linear_gain(int memory, Mat gain, double noise_std = 0.0);

  Kind kind() const { return kind_; }
  int memory() const { return memory_; }
  int n_obs() const { return n_obs_; }
  int n_actions() const { return n_actions_; }
  const Mat& table() const { return table_; }
  const Mat& gain() const { return gain_; }
  double noise_std() const { return noise_std_; }

  /// pi(a | z, o); tabular only.
  double prob(std::int64_t z_idx, int o, int a) const {
    return table_(static_cast<Eigen::Index>(z_idx) * n_obs_ + o, a);
  }
  int sample(Rng& rng, std::int64_t z_idx, int o) const {
    return rng.categorical_row(table_, static_cast<int>(z_idx) * n_obs_ + o);
  }

  /// Linear-gain action; requires an Rng when noise_std > 0.
  Vec act(const Vec& o, const Vec& z_flat, Rng* rng) const;
  /// Gaussian log-density of an action under the linear-gain policy.
  double log_density(const Vec& action, const Vec& o, const Vec& z_flat) const;

  void validate_for(int n_obs, int n_actions) const;

  std::string to_json_string(int indent = 2) const;
  static MemoryPolicy from_json_string(const std::string& text);

 private:
  Kind kind_ = Kind::Tabular;
  int memory_ = 0;
  int n_obs_ = 0;
  int n_actions_ = 0;
  Mat table_;
  Mat gain_;
  double noise_std_ = 0.0;
};

/// Importance ratio mu(z, o, a) = pi_e / pi_b with 0/0 := 0.
/// Throws OverlapError when pi_e > 0 but pi_b = 0.
double importance_ratio(const MemoryPolicy& policy_e, const MemoryPolicy& policy_b,
                        std::int64_t z_idx, int o, int a);

}  // namespace pomdp_ope
