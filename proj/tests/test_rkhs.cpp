#include <doctest.h>

#include <cmath>

#include "pomdp_ope/estimators.hpp"
#include "pomdp_ope/exact.hpp"
#include "pomdp_ope/scenarios.hpp"

using namespace pomdp_ope;

namespace {

struct Setup {
  Scenario sc;
  WindowSpaces spaces;

  explicit Setup(const std::string& name, std::uint64_t seed)
      : sc(make_scenario(name, seed)),
        spaces(sc.model.n_states, sc.model.n_obs, sc.model.n_actions, sc.windows) {}
};

ValueEstimate run_rkhs(const Setup& su, const OfflineDataset& ds, const EstimatorConfig& cfg,
                       double gamma) {
  return minimax_rkhs(ds, su.sc.policy_e, su.sc.policy_b, one_hot_fbar_embed(su.spaces),
                      one_hot_history_embed(su.spaces), linear_kernel(), linear_kernel(),
                      gamma, cfg, su.sc.model.n_obs, su.sc.model.n_actions);
}

ValueEstimate run_linear(const Setup& su, const OfflineDataset& ds,
                         const EstimatorConfig& cfg, double gamma) {
  MomentSet m = compute_moments_empirical(ds, one_hot_fbar(su.spaces),
                                          one_hot_history(su.spaces), su.sc.policy_e,
                                          su.sc.policy_b, gamma, su.sc.model.n_obs,
                                          su.sc.model.n_actions);
  return minimax_linear(m, cfg);
}

}  // namespace

TEST_CASE("linear kernel at gamma = 0 matches the closed form on tiny data") {
  Setup su("tabular-small", 91);
  OfflineDataset ds = generate_offline_dataset(su.sc.model, su.sc.policy_b, 5, 5,
                                               su.sc.windows, DatasetMode::IidPerTuple, 2);
  EstimatorConfig cfg{0.7, 0.05, 0.01};
  ValueEstimate kernel = run_rkhs(su, ds, cfg, 0.0);
  ValueEstimate linear = run_linear(su, ds, cfg, 0.0);
  CHECK(std::abs(kernel.j_hat - linear.j_hat) < 1e-8);
}

TEST_CASE("linear kernel matches the closed form with discounting") {
  Setup su("tabular-memory", 92);
  for (int n : {6, 8}) {
    OfflineDataset ds = generate_offline_dataset(su.sc.model, su.sc.policy_b, n, 8,
                                                 su.sc.windows, DatasetMode::IidPerTuple,
                                                 n);
    EstimatorConfig cfg{1.0, 0.1, 0.02};
    ValueEstimate kernel = run_rkhs(su, ds, cfg, su.sc.model.gamma);
    ValueEstimate linear = run_linear(su, ds, cfg, su.sc.model.gamma);
    CHECK(std::abs(kernel.j_hat - linear.j_hat) < 1e-8);
  }
}

TEST_CASE("linear kernel matches the closed form at n = 1000") {
  Setup su("tabular-small", 93);
  OfflineDataset ds = generate_offline_dataset(su.sc.model, su.sc.policy_b, 1000, 500,
                                               su.sc.windows, DatasetMode::IidPerTuple, 4);
  EstimatorConfig cfg{1.0, 0.01, 1e-3};
  ValueEstimate kernel = run_rkhs(su, ds, cfg, su.sc.model.gamma);
  ValueEstimate linear = run_linear(su, ds, cfg, su.sc.model.gamma);
  CHECK(std::abs(kernel.j_hat - linear.j_hat) < 1e-8);
}

TEST_CASE("on-policy rkhs estimate approaches the exact value") {
  Setup su("tabular-small", 94);
  int n = 2000;
  OfflineDataset ds = generate_offline_dataset(su.sc.model, su.sc.policy_b, n, n,
                                               su.sc.windows, DatasetMode::IidPerTuple, 6);
  // evaluation = behavior so mu = 1
  ValueEstimate est = minimax_rkhs(ds, su.sc.policy_b, su.sc.policy_b,
                                   one_hot_fbar_embed(su.spaces),
                                   one_hot_history_embed(su.spaces), linear_kernel(),
                                   linear_kernel(), su.sc.model.gamma,
                                   EstimatorConfig{1.0, 1e-4, 1e-6}, su.sc.model.n_obs,
                                   su.sc.model.n_actions);
  Vec stat = behavior_stationary_distribution(su.sc.model, su.sc.policy_b, su.sc.windows.m_h);
  Vec nu = zs_marginal(stat, su.spaces.h, su.sc.windows.m, su.sc.model.n_states);
  double j = exact_policy_value(su.sc.model, su.sc.policy_b, nu);
  // sampling error at n = 2000 on a bounded-reward chain
  CHECK(std::abs(est.j_hat - j) < 0.4);
}

TEST_CASE("duplicating every data point leaves the estimate unchanged") {
  Setup su("tabular-small", 95);
  OfflineDataset ds = generate_offline_dataset(su.sc.model, su.sc.policy_b, 50, 30,
                                               su.sc.windows, DatasetMode::IidPerTuple, 8);
  EstimatorConfig cfg{0.5, 0.02, 0.01};
  ValueEstimate base = run_rkhs(su, ds, cfg, su.sc.model.gamma);

  OfflineDataset doubled = ds;
  doubled.tuples.insert(doubled.tuples.end(), ds.tuples.begin(), ds.tuples.end());
  ValueEstimate two = run_rkhs(su, doubled, cfg, su.sc.model.gamma);
  CHECK(std::abs(base.j_hat - two.j_hat) < 1e-7);
}

TEST_CASE("gaussian kernel runs and returns something finite") {
  Setup su("tabular-small", 96);
  OfflineDataset ds = generate_offline_dataset(su.sc.model, su.sc.policy_b, 100, 50,
                                               su.sc.windows, DatasetMode::IidPerTuple, 9);
  std::vector<Vec> pts;
  for (const auto& t : ds.tuples) pts.push_back(raw_fbar_embed()(t.z, t.f));
  double bw = median_heuristic_bandwidth(pts);
  ValueEstimate est = minimax_rkhs(ds, su.sc.policy_e, su.sc.policy_b, raw_fbar_embed(),
                                   raw_history_embed(), gaussian_kernel(bw),
                                   gaussian_kernel(bw), su.sc.model.gamma,
                                   EstimatorConfig{1.0, 0.01, 0.01}, su.sc.model.n_obs,
                                   su.sc.model.n_actions);
  CHECK(std::isfinite(est.j_hat));
  CHECK(est.residual_norm >= 0.0);
}

TEST_CASE("rkhs requires positive regularizers") {
  Setup su("tabular-small", 97);
  OfflineDataset ds = generate_offline_dataset(su.sc.model, su.sc.policy_b, 10, 10,
                                               su.sc.windows, DatasetMode::IidPerTuple, 1);
  CHECK_THROWS_AS(run_rkhs(su, ds, EstimatorConfig{1.0, 0.0, 0.01}, 0.9), ArgumentError);
  CHECK_THROWS_AS(run_rkhs(su, ds, EstimatorConfig{1.0, 0.01, 0.0}, 0.9), ArgumentError);
}
