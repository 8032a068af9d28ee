#pragma once

#include <cstdint>
#include <vector>

#include "pomdp_ope/lqg.hpp"
#include "pomdp_ope/moments.hpp"
#include "pomdp_ope/policy.hpp"
#include "pomdp_ope/simulate.hpp"
#include "pomdp_ope/windows.hpp"

namespace pomdp_ope {

/// Real-valued transition record: windows flattened to vectors, with
/// the importance ratio already attached (Gaussian density ratio).
struct LqgTuple {
  Vec h;          // history window, [o; a] pairs oldest first
  Vec fbar;       // [z; f]
  Vec fbar_next;  // [z'; f']
  double r = 0.0;
  double mu = 1.0;
};

/// Overlapping tuples sliced from one long behavior trajectory after a
/// fixed 10 * (M_H + M_F) burn-in.
std::vector<LqgTuple> lqg_offline_tuples(const LQGModel& model, const MemoryPolicy& policy_b,
                                         const MemoryPolicy& policy_e, std::int64_t n,
                                         const WindowConfig& config, std::uint64_t seed);

/// Draws of [z0; f0] realizing nu_Fbar under the behavior policy.
std::vector<Vec> lqg_initial_fbars(const LQGModel& model, const MemoryPolicy& policy_b,
                                   std::int64_t n_init, const WindowConfig& config,
                                   std::uint64_t seed);

/// Moment set under quadratic features (1, x ox x) scaled to a common
/// bounding box derived from the data.
MomentSet lqg_quadratic_moments(const std::vector<LqgTuple>& tuples,
                                const std::vector<Vec>& nu_fbars, double gamma);

/// Monte Carlo policy value (the LQG oracle): mean discounted return
/// over `n_rollouts` truncated trajectories under the policy itself.
double lqg_monte_carlo_value(const LQGModel& model, const MemoryPolicy& policy,
                             std::int64_t n_rollouts, int horizon, std::uint64_t seed,
                             double* std_error = nullptr);

}  // namespace pomdp_ope
