#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pomdp_ope/common.hpp"
#include "pomdp_ope/dataset.hpp"
#include "pomdp_ope/estimators.hpp"
#include "pomdp_ope/population.hpp"
#include "pomdp_ope/simulate.hpp"

namespace pomdp_ope {

/**
 * Observable moments for spectral modeling of dynamics (memory-less
 * policies, one-hot features over F and H):
 *   b_mat  = E[phi_F(F) phi_H(H)^T]
 *   d_mats = E[I(O = o_t, A = a_t) mu(O, A) phi_F(F') phi_H(H)^T] per target
 *   c_vec  = E_{nu_F}[phi_F],  h_mean = E[phi_H],
 *   o_h_mat = E[phi_O(O) phi_H(H)^T],  m3_h = E[phi_H phi_H^T].
 * The estimand chains as h_mean' B+ { prod_{t=T-1..0} D_t B+ } C.
 *
 * `scaled` marks the density-free variant where each D_t is divided by
 * the frequency of its (o_t, a_t); only conditional (up-to-scale)
 * queries remain meaningful then.
 */
struct DynamicsMoments {
  Mat b_mat;
  std::vector<Mat> d_mats;
  Vec c_vec;
  Vec h_mean;
  Mat o_h_mat;
  Mat m3_h;
  std::vector<std::pair<int, int>> targets;
  bool scaled = false;

  void check() const;
};

struct SpectralDiag {
  int b_rank = 0;
  double sigma_min = 0.0;
  bool rank_deficient = false;  // rank(B) < min(dim)
};

SpectralDiag spectral_diagnostic(const DynamicsMoments& moments);

/// Exact moments under the stationary behavior process (m = 0 config).
DynamicsMoments dynamics_moments_population(const PopulationTables& tables,
                                            const TabularPOMDP& model,
                                            const std::vector<std::pair<int, int>>& targets);

/// Sample-average moments. Throws SupportError when no tuple matches a
/// target pair. `up_to_scale` divides each D_t by the empirical
/// frequency of its (o_t, a_t).
DynamicsMoments dynamics_moments_empirical(const OfflineDataset& ds,
                                           const MemoryPolicy& policy_e,
                                           const MemoryPolicy& policy_b,
                                           const std::vector<std::pair<int, int>>& targets,
                                           int n_obs, int n_actions,
                                           bool up_to_scale = false);

/// Pr_hat(o_0, a_0, ..., o_{T-1}, a_{T-1}) by the closed-form chain.
double spectral_joint_probability(const DynamicsMoments& moments);

/// Next-observation distribution after the target sequence: clipped at
/// zero and normalized; `unclipped` receives the raw vector when given.
Vec spectral_conditional_distribution(const DynamicsMoments& moments, Vec* unclipped = nullptr);

/// Alg.-2 style backward recursion with per-step regularized linear
/// solves; lambda = alpha = alpha_prime = 0 reproduces the spectral
/// closed form exactly.
double minimax_dynamics(const DynamicsMoments& moments, const EstimatorConfig& cfg);

/// Backward recursion over finite coefficient classes (per-step argmin-max).
double minimax_dynamics_enumerate(const DynamicsMoments& moments,
                                  const std::vector<Vec>& q_class,
                                  const std::vector<Vec>& xi_class, double lambda);

/// Appendix-style HMM reduction: stationary no-action process, F and H
/// a single observation each.
struct HmmMoments {
  Mat cooc;                 // Pr(O_0, O_-1), rows O_0
  std::vector<Mat> triple;  // per o: Pr(O_0 = o, O_1, O_-1), rows O_1
  Vec obs_marginal;         // Pr(O_-1)
};

HmmMoments hmm_moments_population(const TabularPOMDP& model);
HmmMoments hmm_moments_from_trajectory(const Trajectory& traj, int n_obs);

double hmm_spectral(const HmmMoments& moments, const std::vector<int>& obs_sequence);

}  // namespace pomdp_ope
