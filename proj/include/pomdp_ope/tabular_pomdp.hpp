#pragma once

#include <string>

#include "pomdp_ope/common.hpp"

namespace pomdp_ope {

/**
 * Finite POMDP: latent states, observations emitted per state, actions,
 * deterministic reward r(s, a), discount gamma in [0, 1).
 *
 * Storage is row-major probability tables:
 *   transition: (S*A) x S, row s*A+a holds T(. | s, a)
 *   emission:    S x O,    row s holds the observation distribution
 *   reward:      S x A
 */
struct TabularPOMDP {
  int n_states = 0;
  int n_obs = 0;
  int n_actions = 0;
  Mat transition;
  Mat emission;
  Mat reward;
  double gamma = 0.0;
  Vec initial_state_dist;

  double trans(int s, int a, int s2) const { return transition(s * n_actions + a, s2); }
  double emit(int s, int o) const { return emission(s, o); }
  double rew(int s, int a) const { return reward(s, a); }

  double reward_min() const { return reward.minCoeff(); }
  double reward_max() const { return reward.maxCoeff(); }

  void validate() const;

  std::string to_json_string(int indent = 2) const;
  static TabularPOMDP from_json_string(const std::string& text);
  static TabularPOMDP load_file(const std::string& path);
  void save_file(const std::string& path) const;
};

}  // namespace pomdp_ope
