#include <doctest.h>

#include <filesystem>

#include "pomdp_ope/lqg.hpp"
#include "pomdp_ope/policy.hpp"
#include "pomdp_ope/scenarios.hpp"
#include "pomdp_ope/tabular_pomdp.hpp"

using namespace pomdp_ope;

TEST_CASE("random pomdp passes validation and json round trips") {
  TabularPOMDP m = random_pomdp(3, 4, 2, 0.9, 7);
  CHECK_NOTHROW(m.validate());
  TabularPOMDP back = TabularPOMDP::from_json_string(m.to_json_string());
  CHECK(back.n_states == m.n_states);
  CHECK((back.transition - m.transition).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((back.emission - m.emission).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(back.gamma == m.gamma);
}

TEST_CASE("model validation rejects broken tables") {
  TabularPOMDP m = random_pomdp(2, 2, 2, 0.9, 3);
  m.transition(0, 0) += 0.5;
  CHECK_THROWS_AS(m.validate(), ConfigError);

  m = random_pomdp(2, 2, 2, 0.9, 3);
  m.gamma = 1.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);

  m = random_pomdp(2, 2, 2, 0.9, 3);
  m.reward(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("model file io") {
  TabularPOMDP m = random_pomdp(3, 4, 2, 0.95, 11);
  auto path = std::filesystem::temp_directory_path() / "pomdp_ope_model_test.json";
  m.save_file(path.string());
  TabularPOMDP back = TabularPOMDP::load_file(path.string());
  CHECK(back.n_obs == 4);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(TabularPOMDP::from_json_string("{not json"), FormatError);
  CHECK_THROWS_AS(TabularPOMDP::from_json_string("{\"n_states\": 1}"), FormatError);
}

TEST_CASE("policy table validation") {
  Mat table(4, 2);
  table << 0.5, 0.5, 0.2, 0.8, 1.0, 0.0, 0.3, 0.7;
  MemoryPolicy p = MemoryPolicy::tabular(0, 4, 2, table);
  CHECK(p.prob(0, 1, 1) == doctest::Approx(0.8));

  table(0, 0) = 0.6;  // row no longer sums to 1
  CHECK_THROWS_AS(MemoryPolicy::tabular(0, 4, 2, table), ConfigError);

  // wrong row count for the declared memory
  CHECK_THROWS_AS(MemoryPolicy::tabular(1, 4, 2, Mat::Constant(4, 2, 0.5)), ConfigError);
}

TEST_CASE("policy json round trip") {
  MemoryPolicy p = random_policy(1, 3, 2, 5);
  MemoryPolicy back = MemoryPolicy::from_json_string(p.to_json_string());
  CHECK(back.memory() == 1);
  CHECK((back.table() - p.table()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  MemoryPolicy g = MemoryPolicy::linear_gain(0, Mat::Constant(1, 1, -0.4), 0.2);
  MemoryPolicy gb = MemoryPolicy::from_json_string(g.to_json_string());
  CHECK(gb.kind() == MemoryPolicy::Kind::LinearGain);
  CHECK(gb.noise_std() == doctest::Approx(0.2));
}

TEST_CASE("lqg model validation") {
  LqgScenario sc = make_lqg_scenario(1);
  CHECK_NOTHROW(sc.model.validate());

  LQGModel bad = sc.model;
  bad.noise_cov_state = Mat::Constant(1, 1, -0.1);
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = sc.model;
  bad.b_mat = Mat::Zero(2, 1);  // row count mismatch with A
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  LQGModel back = LQGModel::from_json_string(sc.model.to_json_string());
  CHECK(back.state_dim() == 1);
}

TEST_CASE("importance ratio basics") {
  // pi_b uniform over 2 actions, pi_e deterministic on action 0
  MemoryPolicy pb = MemoryPolicy::uniform(0, 2, 2);
  Mat table(2, 2);
  table << 1.0, 0.0, 1.0, 0.0;
  MemoryPolicy pe = MemoryPolicy::tabular(0, 2, 2, table);
  CHECK(importance_ratio(pe, pb, 0, 0, 0) == doctest::Approx(2.0));
  CHECK(importance_ratio(pe, pb, 0, 0, 1) == doctest::Approx(0.0));
  CHECK(importance_ratio(pb, pb, 0, 1, 1) == doctest::Approx(1.0));

  // pi_e > 0 where pi_b = 0 violates overlap
  Mat tb(2, 2);
  tb << 1.0, 0.0, 1.0, 0.0;
  MemoryPolicy pb0 = MemoryPolicy::tabular(0, 2, 2, tb);
  Mat te(2, 2);
  te << 0.5, 0.5, 0.5, 0.5;
  MemoryPolicy pe1 = MemoryPolicy::tabular(0, 2, 2, te);
  CHECK_THROWS_AS(importance_ratio(pe1, pb0, 0, 0, 1), OverlapError);
  // 0/0 := 0
  CHECK(importance_ratio(pb0, pb0, 0, 0, 1) == doctest::Approx(0.0));
}
