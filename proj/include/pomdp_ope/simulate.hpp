#pragma once

#include <cstdint>
#include <vector>

#include "pomdp_ope/common.hpp"
#include "pomdp_ope/lqg.hpp"
#include "pomdp_ope/policy.hpp"
#include "pomdp_ope/rng.hpp"
#include "pomdp_ope/tabular_pomdp.hpp"
#include "pomdp_ope/windows.hpp"

namespace pomdp_ope {

struct Trajectory {
  PairWindow z0;  // memory window in force at step 0
  std::vector<int> states;
  std::vector<int> obs;
  std::vector<int> actions;
  std::vector<double> rewards;

  int length() const { return static_cast<int>(states.size()); }
};

struct LqgTrajectory {
  std::vector<Vec> states;
  std::vector<Vec> obs;
  std::vector<Vec> actions;
  std::vector<double> rewards;
};

/**
 * Steps a tabular POMDP under a policy while maintaining a sliding
 * window of the last `window_len` observation-action pairs
 * (window_len >= policy memory M). The window starts zero-padded; the
 * policy sees its last M pairs.
 */
class TabularSimulator {
 public:
  TabularSimulator(const TabularPOMDP& model, const MemoryPolicy& policy,
                   int window_len, std::uint64_t seed);

  struct Step {
    int s, o, a;
    double r;
  };

  Step step();
  void burn(int steps);

  int state() const { return s_; }
  std::int64_t window_index() const { return w_idx_; }
  std::int64_t memory_index() const { return w_codec_.suffix(w_idx_, policy_->memory()); }
  PairWindow window() const { return w_codec_.decode(w_idx_); }
  const PairWindowCodec& window_codec() const { return w_codec_; }

  /// Replaces the current (window, state) pair, e.g. with a draw from a
  /// precomputed stationary distribution.
  void restart(std::int64_t w_idx, int s) {
    w_idx_ = w_idx;
    s_ = s;
  }

  Rng& rng() { return rng_; }

 private:
  const TabularPOMDP* model_;
  const MemoryPolicy* policy_;
  PairWindowCodec w_codec_;
  std::int64_t w_idx_ = 0;
  int s_ = 0;
  Rng rng_;
};

/// Trajectory of `length` steps after `burn_in` warmup steps from
/// initial_state_dist with a zero-padded memory window. Deterministic
/// given the seed.
Trajectory sample_trajectory(const TabularPOMDP& model, const MemoryPolicy& policy,
                             int length, std::uint64_t seed, int burn_in = 0);

/// LQG counterpart; windows of real-valued pairs start at zero.
LqgTrajectory sample_trajectory(const LQGModel& model, const MemoryPolicy& policy,
                                int length, std::uint64_t seed, int burn_in = 0);

}  // namespace pomdp_ope
