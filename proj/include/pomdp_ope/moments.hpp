#pragma once

#include <cstdint>

#include "pomdp_ope/common.hpp"
#include "pomdp_ope/dataset.hpp"
#include "pomdp_ope/features.hpp"
#include "pomdp_ope/population.hpp"

namespace pomdp_ope {

/**
 * Moment matrices driving the closed-form estimators:
 *   m1 = E[mu R phi_H]
 *   m2 = E[phi_H {phi_F(Fbar) - gamma mu phi_F(Fbar')}^T]
 *   m3 = E[phi_H phi_H^T]
 *   nu_mean = E_{nu_Fbar}[phi_F]
 * plus the split pieces hf = E[phi_H phi_F(Fbar)^T] and
 * hf_next_mu = E[mu phi_H phi_F(Fbar')^T] needed by the finite-horizon
 * recursion (m2 = hf - gamma * hf_next_mu).
 */
struct MomentSet {
  enum class Source { Empirical, Population };

  Vec m1;
  Mat m2;
  Mat m3;
  Vec nu_mean;
  Mat hf;
  Mat hf_next_mu;

  Source source = Source::Empirical;
  std::int64_t n = 0;  // sample count when empirical
  double gamma = 0.0;
  bool has_nu = false;

  int d_h() const { return static_cast<int>(m1.size()); }
  int d_f() const { return static_cast<int>(m2.cols()); }

  void check() const;
};

/// Sample-average moments over D_tra; nu_mean from D_ini when present.
MomentSet compute_moments_empirical(const OfflineDataset& ds, const FbarFeatures& fbar,
                                    const HistFeatures& hist, const MemoryPolicy& policy_e,
                                    const MemoryPolicy& policy_b, double gamma,
                                    int n_obs, int n_actions);

/// Exact moments under the stationary behavior process.
MomentSet compute_moments_population(const PopulationTables& tables,
                                     const TabularPOMDP& model, const FbarFeatures& fbar,
                                     const HistFeatures& hist, double gamma);

/// Convenience overload that builds the tables internally.
MomentSet compute_moments_population(const TabularPOMDP& model, const MemoryPolicy& policy_b,
                                     const MemoryPolicy& policy_e, const FbarFeatures& fbar,
                                     const HistFeatures& hist, const WindowConfig& config,
                                     const Vec& nu_zs = Vec());

/// One pre-featurized record; generic accumulation path (used by the
/// LQG pipeline where windows are real-valued).
struct FeaturizedTuple {
  Vec phi_h;
  Vec phi_f;
  Vec phi_f_next;
  double mu = 1.0;
  double r = 0.0;
};

MomentSet accumulate_moments(const std::vector<FeaturizedTuple>& rows,
                             const std::vector<Vec>& nu_phis, double gamma);

}  // namespace pomdp_ope
