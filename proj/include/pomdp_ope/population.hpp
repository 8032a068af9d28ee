#pragma once

#include <cstdint>
#include <vector>

#include "pomdp_ope/common.hpp"
#include "pomdp_ope/policy.hpp"
#include "pomdp_ope/tabular_pomdp.hpp"
#include "pomdp_ope/windows.hpp"

namespace pomdp_ope {

/**
 * Exact distributional tables for a (model, behavior policy, evaluation
 * policy, window config) quadruple, under the stationary behavior
 * process. Everything population-mode (moments, probability matrices,
 * condition numbers, spectral dynamics) is assembled from these.
 *
 * `paths[z * S + s]` enumerates every realization of
 * (O_t, A_t, ..., O_{t+MF}) from (Z_t = z, S_t = s): enough to read off
 * F, F', Z' and the step-t importance ratio.
 */
struct PopulationTables {
  struct PathRecord {
    int o = 0, a = 0;
    double r = 0.0;
    std::int64_t f_idx = 0;
    std::int64_t z_next = 0;
    std::int64_t f_next_idx = 0;
    double prob_b = 0.0;  // behavior probability of the whole path
    double mu = 0.0;      // pi_e / pi_b at step t
  };

  WindowSpaces spaces;
  Vec stationary_hs;  // over (h-window, s)
  Vec pb_h;           // marginal over h
  Vec pb_zs;          // marginal over (z, s)
  Vec nu_zs;          // initial (z, s) distribution backing nu_Fbar
  Mat future_table;   // Pr(f | z, s), |F| x (|Z| * S)
  std::vector<std::vector<PathRecord>> paths;
  double mu_max = 0.0;  // sup of mu over positive-mass (z, o, a)

  std::int64_t path_cells() const {
    std::int64_t total = 0;
    for (const auto& p : paths) total += static_cast<std::int64_t>(p.size());
    return total;
  }
};

/// Exact tables by full enumeration. nu_zs empty selects the stationary
/// (z, s) marginal. Throws OverlapError when pi_e puts mass where pi_b
/// does not, CapacityError when the spaces are too large.
PopulationTables build_population_tables(const TabularPOMDP& model,
                                         const MemoryPolicy& policy_b,
                                         const MemoryPolicy& policy_e,
                                         const WindowConfig& config,
                                         const Vec& nu_zs = Vec());

}  // namespace pomdp_ope
