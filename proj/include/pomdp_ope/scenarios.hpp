#pragma once

#include <cstdint>
#include <string>

#include "pomdp_ope/lqg.hpp"
#include "pomdp_ope/policy.hpp"
#include "pomdp_ope/tabular_pomdp.hpp"
#include "pomdp_ope/windows.hpp"

namespace pomdp_ope {

/// Random dense POMDP: rows drawn uniformly from the simplex, rewards
/// uniform on [0, 1].
TabularPOMDP random_pomdp(int n_states, int n_obs, int n_actions, double gamma,
                          std::uint64_t seed);

/// Random M-memory policy; `uniform_mix` blends toward the uniform
/// policy so that every action keeps positive probability.
MemoryPolicy random_policy(int memory, int n_obs, int n_actions, std::uint64_t seed,
                           double uniform_mix = 0.3);

/// Near-deterministic policy (probability `peak` on a seeded preferred
/// action per (z, o) row).
MemoryPolicy peaked_policy(int memory, int n_obs, int n_actions, std::uint64_t seed,
                           double peak = 0.9);

/// Fully observed MDP: emission is the identity (n_obs = n_states).
TabularPOMDP random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed);

/// Action-free hidden Markov model (n_actions = 1).
TabularPOMDP random_hmm(int n_states, int n_obs, double gamma, std::uint64_t seed);

/// A bundled experiment setup: model, policies and window config.
struct Scenario {
  std::string name;
  TabularPOMDP model;
  MemoryPolicy policy_b;
  MemoryPolicy policy_e;
  WindowConfig windows;
};

/// Named scenarios used by the CLI and the acceptance suite:
///   "tabular-small"   3 states / 4 obs / 2 actions, M = 0
///   "tabular-memory"  same dimensions with M = 1
///   "mdp-reduction"   fully observed, M = 0, M_F = 1 (use the
///                     current-observation instrument features)
///   "rank-deficient"  |Fbar| < |Sbar_b| by construction
///   "mismatched"      uniform behavior vs. near-deterministic target
Scenario make_scenario(const std::string& name, std::uint64_t seed);

/// Scalar LQG with stable dynamics plus Gaussian-noise linear policies.
struct LqgScenario {
  LQGModel model;
  MemoryPolicy policy_b;
  MemoryPolicy policy_e;
};
LqgScenario make_lqg_scenario(std::uint64_t seed);

}  // namespace pomdp_ope
