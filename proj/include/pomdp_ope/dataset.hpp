#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pomdp_ope/common.hpp"
#include "pomdp_ope/policy.hpp"
#include "pomdp_ope/tabular_pomdp.hpp"
#include "pomdp_ope/windows.hpp"

namespace pomdp_ope {

/// One (H, O, A, R, F') record plus the derived windows Z, Z', F.
struct TransitionTuple {
  PairWindow h;       // last M_H pairs before (o, a)
  PairWindow z;       // last M pairs of h
  int o = 0;
  int a = 0;
  double r = 0.0;
  Future f;           // (O_{t:t+MF-1}, A_{t:t+MF-2}); f.obs[0] == o
  PairWindow z_next;  // z with (o, a) appended, oldest pair dropped
  Future f_next;      // shifted by one step

  void check_shape(const WindowConfig& cfg) const;
};

/// Draw from nu_Fbar: memory window and future window at time zero.
struct InitialSample {
  PairWindow z;
  Future f;
};

enum class DatasetMode { IidPerTuple, SlicedTrajectory };

struct Provenance {
  std::uint64_t seed = 0;
  DatasetMode mode = DatasetMode::IidPerTuple;
  std::string nu_realization;  // "behavior-stationary" or "explicit-table"
};

struct OfflineDataset {
  std::vector<TransitionTuple> tuples;
  std::vector<InitialSample> initial_samples;
  WindowConfig config;
  Provenance provenance;

  std::size_t n() const { return tuples.size(); }
  std::size_t n_init() const { return initial_samples.size(); }
};

/**
 * Offline data generator.
 *
 * IidPerTuple draws each tuple's (history window, state) exactly from
 * the stationary distribution of the behavior chain, then rolls the
 * M_F future steps; tuples are exactly i.i.d. SlicedTrajectory takes
 * overlapping windows from one stationary-started trajectory.
 *
 * Initial samples realize nu: (z, s) from the stationary (z, s)
 * marginal (or from `nu_zs` when given), then M_F - 1 behavior steps
 * plus the final observation.
 */
OfflineDataset generate_offline_dataset(const TabularPOMDP& model,
                                        const MemoryPolicy& policy_b, std::int64_t n,
                                        std::int64_t n_init, const WindowConfig& config,
                                        DatasetMode mode, std::uint64_t seed,
                                        const Vec& nu_zs = Vec());

void save_dataset(const OfflineDataset& ds, const std::string& path);
OfflineDataset load_dataset(const std::string& path);

/// mu evaluated on a tuple.
double tuple_importance_ratio(const MemoryPolicy& policy_e, const MemoryPolicy& policy_b,
                              const TransitionTuple& t, const PairWindowCodec& z_codec);

}  // namespace pomdp_ope
