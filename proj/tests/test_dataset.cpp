#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pomdp_ope/dataset.hpp"
#include "pomdp_ope/exact.hpp"
#include "pomdp_ope/scenarios.hpp"

using namespace pomdp_ope;

namespace {

bool tuples_equal(const TransitionTuple& a, const TransitionTuple& b) {
  return a.h == b.h && a.z == b.z && a.o == b.o && a.a == b.a && a.r == b.r &&
         a.f == b.f && a.z_next == b.z_next && a.f_next == b.f_next;
}

}  // namespace

TEST_CASE("empty dataset is valid") {
  Scenario sc = make_scenario("tabular-small", 41);
  OfflineDataset ds = generate_offline_dataset(sc.model, sc.policy_b, 0, 0, sc.windows,
                                               DatasetMode::IidPerTuple, 1);
  CHECK(ds.n() == 0);
  CHECK(ds.n_init() == 0);
}

TEST_CASE("tuples satisfy the window shift relations") {
  Scenario sc = make_scenario("tabular-memory", 42);
  for (auto mode : {DatasetMode::IidPerTuple, DatasetMode::SlicedTrajectory}) {
    OfflineDataset ds =
        generate_offline_dataset(sc.model, sc.policy_b, 300, 50, sc.windows, mode, 9);
    REQUIRE(ds.n() == 300);
    for (const auto& t : ds.tuples) {
      // z is the last M pairs of h
      for (int i = 0; i < sc.windows.m; ++i)
        CHECK(t.z[i] == t.h[sc.windows.m_h - sc.windows.m + i]);
      // z' = shift(z, o, a)
      CHECK(t.z_next.back() == std::pair<int, int>{t.o, t.a});
      for (int i = 0; i + 1 < sc.windows.m; ++i) CHECK(t.z_next[i] == t.z[i + 1]);
      // f starts at o; f' is f shifted by one step
      CHECK(t.f.obs[0] == t.o);
      CHECK(t.f.acts[0] == t.a);
      for (int i = 0; i + 1 < sc.windows.m_f; ++i) CHECK(t.f.obs[i + 1] == t.f_next.obs[i]);
      for (int i = 0; i + 2 < sc.windows.m_f; ++i)
        CHECK(t.f.acts[i + 1] == t.f_next.acts[i]);
      // rewards come from the reward table
      CHECK(t.r >= sc.model.reward_min());
      CHECK(t.r <= sc.model.reward_max());
    }
  }
}

TEST_CASE("mdp reduction shape: tuples reduce to (S, A, R, S')") {
  // identity emission, M = 0, M_F = 1: o is the state, f'.obs[0] the next state
  Scenario sc = make_scenario("mdp-reduction", 43);
  OfflineDataset ds = generate_offline_dataset(sc.model, sc.policy_b, 100, 10, sc.windows,
                                               DatasetMode::IidPerTuple, 5);
  for (const auto& t : ds.tuples) {
    CHECK(t.z.empty());
    CHECK(t.f.obs.size() == 1);
    CHECK(t.f.acts.empty());
    CHECK(t.h.size() == 1);
  }
}

TEST_CASE("iid tuples match the stationary law") {
  Scenario sc = make_scenario("tabular-small", 44);
  int n = 100000;
  OfflineDataset ds = generate_offline_dataset(sc.model, sc.policy_b, n, 0, sc.windows,
                                               DatasetMode::IidPerTuple, 31);
  // empirical distribution of the history window against the exact marginal
  Vec stat = behavior_stationary_distribution(sc.model, sc.policy_b, sc.windows.m_h);
  WindowSpaces spaces(sc.model.n_states, sc.model.n_obs, sc.model.n_actions, sc.windows);
  Vec h_marg = window_marginal(stat, sc.model.n_states);
  Vec freq = Vec::Zero(spaces.h.size());
  for (const auto& t : ds.tuples) freq(spaces.h.encode(t.h)) += 1.0;
  freq /= n;
  for (std::int64_t h = 0; h < spaces.h.size(); ++h) {
    double se = std::sqrt(std::max(h_marg(h) * (1 - h_marg(h)), 1e-12) / n);
    CHECK(std::abs(freq(h) - h_marg(h)) < 3 * se + 1e-4);
  }
}

TEST_CASE("mean importance ratio concentrates at one") {
  Scenario sc = make_scenario("tabular-memory", 45);
  int n = 100000;
  OfflineDataset ds = generate_offline_dataset(sc.model, sc.policy_b, n, 0, sc.windows,
                                               DatasetMode::IidPerTuple, 77);
  WindowSpaces spaces(sc.model.n_states, sc.model.n_obs, sc.model.n_actions, sc.windows);
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& t : ds.tuples) {
    double mu = tuple_importance_ratio(sc.policy_e, sc.policy_b, t, spaces.z);
    sum += mu;
    sum_sq += mu * mu;
  }
  double mean = sum / n;
  double se = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) < 5 * se);
}

TEST_CASE("dataset save/load round trip") {
  Scenario sc = make_scenario("tabular-memory", 46);
  OfflineDataset ds = generate_offline_dataset(sc.model, sc.policy_b, 50, 20, sc.windows,
                                               DatasetMode::SlicedTrajectory, 13);
  auto path = std::filesystem::temp_directory_path() / "pomdp_ope_ds_test.jsonl";
  save_dataset(ds, path.string());
  OfflineDataset back = load_dataset(path.string());
  REQUIRE(back.n() == ds.n());
  REQUIRE(back.n_init() == ds.n_init());
  for (std::size_t i = 0; i < ds.n(); ++i) CHECK(tuples_equal(ds.tuples[i], back.tuples[i]));
  for (std::size_t i = 0; i < ds.n_init(); ++i) {
    CHECK(back.initial_samples[i].z == ds.initial_samples[i].z);
    CHECK(back.initial_samples[i].f == ds.initial_samples[i].f);
  }
  CHECK(back.config.m == ds.config.m);
  CHECK(back.provenance.seed == ds.provenance.seed);
  std::filesystem::remove(path);
}

TEST_CASE("header-only file loads as an empty dataset") {
  Scenario sc = make_scenario("tabular-small", 47);
  OfflineDataset ds = generate_offline_dataset(sc.model, sc.policy_b, 0, 0, sc.windows,
                                               DatasetMode::IidPerTuple, 3);
  auto path = std::filesystem::temp_directory_path() / "pomdp_ope_empty_test.jsonl";
  save_dataset(ds, path.string());
  OfflineDataset back = load_dataset(path.string());
  CHECK(back.n() == 0);
  CHECK(back.n_init() == 0);
  std::filesystem::remove(path);
}

TEST_CASE("corrupted line reports its line number") {
  Scenario sc = make_scenario("tabular-small", 48);
  OfflineDataset ds = generate_offline_dataset(sc.model, sc.policy_b, 3, 0, sc.windows,
                                               DatasetMode::IidPerTuple, 3);
  auto path = std::filesystem::temp_directory_path() / "pomdp_ope_corrupt_test.jsonl";
  save_dataset(ds, path.string());
  {
    std::ofstream out(path, std::ios::app);
    out << "{broken json\n";
  }
  try {
    load_dataset(path.string());
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("initial samples follow the declared nu realization") {
  Scenario sc = make_scenario("tabular-small", 49);
  OfflineDataset ds = generate_offline_dataset(sc.model, sc.policy_b, 10, 10, sc.windows,
                                               DatasetMode::IidPerTuple, 3);
  CHECK(ds.provenance.nu_realization == "behavior-stationary");
  for (const auto& s : ds.initial_samples) {
    CHECK(static_cast<int>(s.f.obs.size()) == sc.windows.m_f);
    CHECK(static_cast<int>(s.f.acts.size()) == sc.windows.m_f - 1);
  }

  // explicit table: point mass on (z = 0, s = 0)
  WindowSpaces spaces(sc.model.n_states, sc.model.n_obs, sc.model.n_actions, sc.windows);
  Vec nu = Vec::Zero(spaces.sbar_size());
  nu(0) = 1.0;
  OfflineDataset ds2 = generate_offline_dataset(sc.model, sc.policy_b, 0, 5, sc.windows,
                                                DatasetMode::IidPerTuple, 3, nu);
  CHECK(ds2.provenance.nu_realization == "explicit-table");
}

TEST_CASE("policy memory mismatch is a configuration error") {
  Scenario sc = make_scenario("tabular-small", 50);
  MemoryPolicy pb1 = random_policy(1, sc.model.n_obs, sc.model.n_actions, 1);
  CHECK_THROWS_AS(generate_offline_dataset(sc.model, pb1, 10, 0, sc.windows,
                                           DatasetMode::IidPerTuple, 1),
                  ConfigError);
}
