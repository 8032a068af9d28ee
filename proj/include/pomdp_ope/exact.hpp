#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pomdp_ope/common.hpp"
#include "pomdp_ope/policy.hpp"
#include "pomdp_ope/tabular_pomdp.hpp"
#include "pomdp_ope/windows.hpp"

namespace pomdp_ope {

/// Bundle of the exact distributions used by diagnostics and the
/// population-mode estimators.
struct OccupancyTables {
  Vec stationary_pb;                    // over (h-window, s) under pi_b
  Vec d_pie;                            // discounted occupancy over (z, s) under pi_e
  std::vector<std::int64_t> support_sbar;  // (z, s) indices with positive behavior mass
};

/**
 * Stationary distribution of the augmented chain over
 * (last `window_len` obs-action pairs, latent state) under `policy`.
 * Damped power iteration until ||pi P - pi||_1 <= residual_tol.
 */
Vec behavior_stationary_distribution(const TabularPOMDP& model, const MemoryPolicy& policy,
                                     int window_len, double residual_tol = 1e-10,
                                     int max_iters = 200000);

/// Marginal over (z, s) of a stationary vector over (w, s), z = last m pairs of w.
Vec zs_marginal(const Vec& stat_ws, const PairWindowCodec& w_codec, int m, int n_states);

/// Marginal over s.
Vec state_marginal(const Vec& stat_ws, int n_states);
/// Marginal over the window component.
Vec window_marginal(const Vec& stat_ws, int n_states);

/// V^{pi}(z, s) for all memory windows z and states s, solved from the
/// Bellman linear system on the augmented space.
Vec exact_value_function(const TabularPOMDP& model, const MemoryPolicy& policy_e);

/// J(pi_e) = E_init[V]; init_zs is a probability vector over (z, s) with
/// z the policy's memory window.
double exact_policy_value(const TabularPOMDP& model, const MemoryPolicy& policy_e,
                          const Vec& init_zs);

/// Finite-horizon value J_T via backward dynamic programming.
double exact_finite_horizon_value(const TabularPOMDP& model, const MemoryPolicy& policy_e,
                                  const Vec& init_zs, int horizon);

/// Discounted occupancy d = (1-gamma) * sum_t gamma^t d_t over (z, s).
Vec discounted_occupancy(const TabularPOMDP& model, const MemoryPolicy& policy_e,
                         const Vec& init_zs);

/// Forward-algorithm probability of an (o, a) sequence under a
/// memory-less policy, starting from init_s (defaults to the model's
/// initial state distribution when empty).
double joint_sequence_probability(const TabularPOMDP& model, const MemoryPolicy& policy_e,
                                  const std::vector<std::pair<int, int>>& sequence,
                                  const Vec& init_s = Vec());

/// Forward-algorithm posterior predictive Pr(O_T | o_0, a_0, ..., a_{T-1}).
Vec forward_predictive_distribution(const TabularPOMDP& model, const MemoryPolicy& policy_e,
                                    const std::vector<std::pair<int, int>>& sequence,
                                    const Vec& init_s = Vec());

/// Pr(f | z, s) for every future window; column index z * n_states + s.
Mat future_probabilities(const TabularPOMDP& model, const MemoryPolicy& policy_b,
                         const WindowSpaces& spaces);

/// Stationary + occupancy bundle; nu defaults to the stationary (z, s)
/// marginal when empty.
OccupancyTables occupancy_tables(const TabularPOMDP& model, const MemoryPolicy& policy_b,
                                 const MemoryPolicy& policy_e, const WindowConfig& config,
                                 const Vec& nu_zs = Vec());

}  // namespace pomdp_ope
