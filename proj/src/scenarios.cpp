#include "pomdp_ope/scenarios.hpp"

#include <cmath>

#include "pomdp_ope/rng.hpp"

namespace pomdp_ope {

namespace {

/// Uniform draw from the probability simplex (normalized exponentials).
Vec simplex_row(Rng& rng, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = -std::log(1.0 - rng.uniform());
  return v / v.sum();
}

Mat stochastic_matrix(Rng& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) m.row(r) = simplex_row(rng, cols).transpose();
  return m;
}

}  // namespace

TabularPOMDP random_pomdp(int n_states, int n_obs, int n_actions, double gamma,
                          std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xA11CE));
  TabularPOMDP m;
  m.n_states = n_states;
  m.n_obs = n_obs;
  m.n_actions = n_actions;
  m.gamma = gamma;
  m.transition = stochastic_matrix(rng, n_states * n_actions, n_states);
  m.emission = stochastic_matrix(rng, n_states, n_obs);
  m.reward = Mat(n_states, n_actions);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) m.reward(s, a) = rng.uniform();
  m.initial_state_dist = simplex_row(rng, n_states);
  m.validate();
  return m;
}

MemoryPolicy random_policy(int memory, int n_obs, int n_actions, std::uint64_t seed,
                           double uniform_mix) {
  Rng rng(derive_seed(seed, 0xB0B));
  PairWindowCodec z(n_obs, n_actions, memory);
  Mat table(z.size() * n_obs, n_actions);
  for (int r = 0; r < table.rows(); ++r) {
    Vec row = simplex_row(rng, n_actions);
    table.row(r) = ((1.0 - uniform_mix) * row.array() + uniform_mix / n_actions).transpose();
    table.row(r) /= table.row(r).sum();
  }
  return MemoryPolicy::tabular(memory, n_obs, n_actions, std::move(table));
}

MemoryPolicy peaked_policy(int memory, int n_obs, int n_actions, std::uint64_t seed,
                           double peak) {
  Rng rng(derive_seed(seed, 0xCAFE));
  PairWindowCodec z(n_obs, n_actions, memory);
  double rest = (1.0 - peak) / std::max(1, n_actions - 1);
  Mat table(z.size() * n_obs, n_actions);
  for (int r = 0; r < table.rows(); ++r) {
    int star = static_cast<int>(rng.uniform() * n_actions) % n_actions;
    for (int a = 0; a < n_actions; ++a) table(r, a) = a == star ? peak : rest;
  }
  return MemoryPolicy::tabular(memory, n_obs, n_actions, std::move(table));
}

TabularPOMDP random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed) {
  TabularPOMDP m = random_pomdp(n_states, n_states, n_actions, gamma, seed);
  m.emission = Mat::Identity(n_states, n_states);
  m.validate();
  return m;
}

TabularPOMDP random_hmm(int n_states, int n_obs, double gamma, std::uint64_t seed) {
  return random_pomdp(n_states, n_obs, 1, gamma, seed);
}

Scenario make_scenario(const std::string& name, std::uint64_t seed) {
  Scenario sc;
  sc.name = name;
  if (name == "tabular-small") {
    sc.model = random_pomdp(3, 4, 2, 0.9, seed);
    sc.windows = WindowConfig{0, 1, 1};
    sc.policy_b = random_policy(0, 4, 2, derive_seed(seed, 1));
    sc.policy_e = random_policy(0, 4, 2, derive_seed(seed, 2));
  } else if (name == "tabular-memory") {
    sc.model = random_pomdp(3, 4, 2, 0.9, seed);
    sc.windows = WindowConfig{1, 3, 2};
    sc.policy_b = random_policy(1, 4, 2, derive_seed(seed, 1));
    sc.policy_e = random_policy(1, 4, 2, derive_seed(seed, 2));
  } else if (name == "mdp-reduction") {
    sc.model = random_mdp(3, 2, 0.9, seed);
    sc.windows = WindowConfig{0, 1, 1};
    sc.policy_b = random_policy(0, 3, 2, derive_seed(seed, 1));
    sc.policy_e = random_policy(0, 3, 2, derive_seed(seed, 2));
  } else if (name == "rank-deficient") {
    // |Fbar| = n_obs = 2 < 3 = |Sbar_b|: observability must fail.
    sc.model = random_pomdp(3, 2, 2, 0.9, seed);
    sc.windows = WindowConfig{0, 1, 1};
    sc.policy_b = random_policy(0, 2, 2, derive_seed(seed, 1));
    sc.policy_e = random_policy(0, 2, 2, derive_seed(seed, 2));
  } else if (name == "mismatched") {
    sc.model = random_pomdp(3, 4, 2, 0.9, seed);
    sc.windows = WindowConfig{0, 1, 1};
    sc.policy_b = MemoryPolicy::uniform(0, 4, 2);
    sc.policy_e = peaked_policy(0, 4, 2, derive_seed(seed, 2), 0.9);
  } else {
    throw ArgumentError("unknown scenario: " + name);
  }
  return sc;
}

LqgScenario make_lqg_scenario(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x1997));
  LqgScenario sc;
  LQGModel& m = sc.model;
  m.a_mat = Mat::Constant(1, 1, 0.8);
  m.b_mat = Mat::Constant(1, 1, 0.5);
  m.c_mat = Mat::Constant(1, 1, 1.0);
  m.q_cost = Mat::Constant(1, 1, 1.0);
  m.r_cost = Mat::Constant(1, 1, 0.1);
  m.noise_cov_state = Mat::Constant(1, 1, 0.04);
  m.noise_cov_obs = Mat::Constant(1, 1, 0.01);
  m.gamma = 0.9;
  m.validate();
  double g_b = -0.5 - 0.2 * rng.uniform();
  double g_e = g_b + 0.1;
  sc.policy_b = MemoryPolicy::linear_gain(0, Mat::Constant(1, 1, g_b), 0.3);
  sc.policy_e = MemoryPolicy::linear_gain(0, Mat::Constant(1, 1, g_e), 0.25);
  return sc;
}

}  // namespace pomdp_ope
