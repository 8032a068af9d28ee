#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pomdp_ope/common.hpp"
#include "pomdp_ope/dataset.hpp"
#include "pomdp_ope/features.hpp"
#include "pomdp_ope/moments.hpp"
#include "pomdp_ope/simulate.hpp"

namespace pomdp_ope {

/// Hyperparameters of the minimax objective: stabilizer lambda on the
/// critic, norm regularizers alpha (critic) and alpha_prime (value).
struct EstimatorConfig {
  double lambda = 0.0;
  double alpha = 0.0;
  double alpha_prime = 0.0;

  void validate() const {
    if (lambda < 0.0 || alpha < 0.0 || alpha_prime < 0.0)
      throw ArgumentError("EstimatorConfig: hyperparameters must be >= 0");
  }
};

struct ValueEstimate {
  double j_hat = 0.0;
  Vec coefficients;       // weight on phi_F (linear) or dual weights (RKHS)
  double residual_norm = 0.0;  // projected squared Bellman residual proxy
  EstimatorConfig config;

  std::string to_json_string(const std::string& estimator, std::int64_t n,
                             double gamma, std::uint64_t seed) const;
};

/**
 * Closed-form linear minimax estimator.
 * lambda = alpha = alpha_prime = 0: w = M2^+ M1.
 * Otherwise w = {M2' (aI + l M3)^-1 M2 + a' I}^-1 M2' (aI + l M3)^-1 M1,
 * with pseudo-inverses on the singular branches.
 */
ValueEstimate minimax_linear(const MomentSet& moments, const EstimatorConfig& cfg);

/// Backward recursion theta_t = E[phi_H phi_F^T]^+ E[mu phi_H (R + gamma
/// theta_{t+1}' phi_F(F'))], value = nu' theta_0.
ValueEstimate finite_horizon_linear(const MomentSet& moments, int horizon);

/**
 * Exact argmin-max over finite coefficient classes. Candidates are
 * coefficient vectors on the features behind `moments` (value tables
 * when the features are one-hot). Objective per (q, xi):
 * xi'(M1 - M2 q) - lambda xi' M3 xi. Ties break to the first index.
 * Optional sup-norm bounds filter the classes.
 */
ValueEstimate minimax_enumerate(const MomentSet& moments, const std::vector<Vec>& q_class,
                                const std::vector<Vec>& xi_class, const EstimatorConfig& cfg,
                                double q_bound = 0.0, double xi_bound = 0.0);

/// Inner maximum of the enumerate objective for a fixed q.
double enumerate_objective(const MomentSet& moments, const Vec& q,
                           const std::vector<Vec>& xi_class, double lambda);

/**
 * Kernelized minimax estimator from the regularized saddle point of the
 * empirical objective (mu-weighted on the shifted term). The value
 * function is represented on the 2n basis points {Fbar_i} U {Fbar'_i};
 * requires alpha > 0 and alpha_prime > 0.
 */
ValueEstimate minimax_rkhs(const OfflineDataset& ds, const MemoryPolicy& policy_e,
                           const MemoryPolicy& policy_b, const FbarEmbed& fbar_embed,
                           const HistEmbed& hist_embed, const KernelFn& kernel_f,
                           const KernelFn& kernel_h, double gamma,
                           const EstimatorConfig& cfg, int n_obs, int n_actions);

struct SisEstimate {
  double j_hat = 0.0;
  double weight_variance = 0.0;  // variance of the cumulative ratio at the cap
  double value_variance = 0.0;   // variance of per-trajectory returns
  std::int64_t n_trajectories = 0;
};

/// Sequential importance sampling baseline, truncated at horizon_cap.
SisEstimate sis_estimate(const std::vector<Trajectory>& trajectories,
                         const MemoryPolicy& policy_e, const MemoryPolicy& policy_b,
                         double gamma, int horizon_cap);

/// Behavior trajectories started exactly from the stationary (z, s) law,
/// for SIS evaluation against stationary-initial-state targets.
std::vector<Trajectory> sample_stationary_trajectories(const TabularPOMDP& model,
                                                       const MemoryPolicy& policy_b,
                                                       std::int64_t n_traj, int length,
                                                       std::uint64_t seed);

}  // namespace pomdp_ope
