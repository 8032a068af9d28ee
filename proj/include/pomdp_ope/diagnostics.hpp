#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pomdp_ope/common.hpp"
#include "pomdp_ope/moments.hpp"
#include "pomdp_ope/population.hpp"

namespace pomdp_ope {

/// Exact joint/conditional probability matrices over the proxy spaces,
/// with Sbar restricted to positive behavior mass.
struct ProbabilityMatrices {
  Mat fbar_h;           // Pr(Fbar, H), |Fbar| x |H|
  Mat fbar_given_sbar;  // Pr(Fbar | Sbar_b), |Fbar| x |Sbar_b|
  Mat sbar_h;           // Pr(Sbar_b, H), |Sbar_b| x |H|
  std::vector<std::int64_t> sbar_support;  // flat (z, s) indices backing the columns/rows
};

ProbabilityMatrices probability_matrices(const PopulationTables& tables);
ProbabilityMatrices probability_matrices(const TabularPOMDP& model,
                                         const MemoryPolicy& policy_b,
                                         const WindowConfig& config);

/// Identification and conditioning quantities. Ranks use the tolerance
/// rank_tolerance * sigma_max; sups over the linear one-hot class reduce
/// to generalized Rayleigh quotients (infinity marks an unbounded sup).
struct ConditionReport {
  std::int64_t s_bar_b_size = 0;

  int rank_f_given_s = 0;
  double sigma_min_f_given_s = 0.0;
  int rank_s_h = 0;
  double sigma_min_s_h = 0.0;
  int rank_f_h = 0;
  double sigma_min_f_h = 0.0;

  bool observability_ok = false;   // rank(Pr(Fbar | Sbar_b)) == |Sbar_b|
  bool invertibility_ok = false;   // rank(Pr(Sbar_b, H)) == |Sbar_b|
  bool joint_rank_ok = false;      // rank(Pr(Fbar, H)) == |Sbar_b|
  bool iff_consistent = false;     // (obs && inv) == joint

  double overlap_max = 0.0;  // sup w_pie over the full (z, s) space
  double mu_max = 0.0;
  double iv1 = 0.0;
  double dr = 0.0;
  double kappa = 0.0;
  double relative_condition_number = 0.0;  // dr^2

  double rank_tolerance = 1e-8;

  std::string to_json_string(int indent = 2) const;
};

/// Rank fragment only.
ConditionReport rank_conditions(const ProbabilityMatrices& pm);

/// Full report: ranks plus condition numbers for the one-hot linear
/// class. nu_zs empty means the stationary (z, s) marginal.
ConditionReport diagnose(const TabularPOMDP& model, const MemoryPolicy& policy_b,
                         const MemoryPolicy& policy_e, const WindowConfig& config,
                         const Vec& nu_zs = Vec());

/// Projected squared Bellman residual of a coefficient vector q on the
/// features behind `moments`: (M1 - M2 q)' M3^+ (M1 - M2 q). With
/// one-hot population moments this is the exact E[(T q)^2(H)].
double bellman_residual(const MomentSet& moments, const Vec& q);

/// Value bridge table over Fbar solving E[g(Z, F) | Z, S] = V^{pi_e}(Z, S)
/// on the behavior support. Throws NumericError when no exact solution
/// exists (observability failure).
Vec solve_value_bridge(const PopulationTables& tables, const TabularPOMDP& model,
                       const MemoryPolicy& policy_e, double residual_tol = 1e-8);

}  // namespace pomdp_ope
