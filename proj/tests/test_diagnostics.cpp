#include <doctest.h>

#include <cmath>

#include "pomdp_ope/diagnostics.hpp"
#include "pomdp_ope/estimators.hpp"
#include "pomdp_ope/exact.hpp"
#include "pomdp_ope/scenarios.hpp"

using namespace pomdp_ope;

TEST_CASE("probability matrices are consistent joint factorizations") {
  Scenario sc = make_scenario("tabular-memory", 101);
  PopulationTables tables = build_population_tables(sc.model, sc.policy_b, sc.policy_e,
                                                    sc.windows);
  ProbabilityMatrices pm = probability_matrices(tables);

  // entries of Pr(Fbar, H) sum to 1
  CHECK(pm.fbar_h.sum() == doctest::Approx(1.0).epsilon(1e-10));
  // columns of Pr(Fbar | Sbar_b) sum to 1
  for (int c = 0; c < pm.fbar_given_sbar.cols(); ++c)
    CHECK(pm.fbar_given_sbar.col(c).sum() == doctest::Approx(1.0).epsilon(1e-10));
  // factorization through the latent augmented state
  Mat product = pm.fbar_given_sbar * pm.sbar_h;
  CHECK((pm.fbar_h - product).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank conditions on generic and constructed models") {
  SUBCASE("generic model satisfies the iff with all ranks full") {
    Scenario sc = make_scenario("tabular-small", 102);
    ConditionReport rep = diagnose(sc.model, sc.policy_b, sc.policy_e, sc.windows);
    CHECK(rep.s_bar_b_size == 3);
    CHECK(rep.observability_ok);
    CHECK(rep.invertibility_ok);
    CHECK(rep.joint_rank_ok);
    CHECK(rep.iff_consistent);
  }

  SUBCASE("|Fbar| < |Sbar_b| forces an observability failure") {
    Scenario sc = make_scenario("rank-deficient", 103);
    ConditionReport rep = diagnose(sc.model, sc.policy_b, sc.policy_e, sc.windows);
    CHECK(rep.s_bar_b_size == 3);
    CHECK_FALSE(rep.observability_ok);
    CHECK_FALSE(rep.joint_rank_ok);
    CHECK(rep.iff_consistent);
  }

  SUBCASE("identity-emission MDP with m_f = 1 has full ranks") {
    Scenario sc = make_scenario("mdp-reduction", 104);
    ConditionReport rep = diagnose(sc.model, sc.policy_b, sc.policy_e, sc.windows);
    CHECK(rep.rank_f_given_s == rep.s_bar_b_size);
    CHECK(rep.rank_s_h == rep.s_bar_b_size);
    CHECK(rep.rank_f_h == rep.s_bar_b_size);
  }

  SUBCASE("the iff holds across random models") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      Scenario sc = make_scenario(seed % 2 == 0 ? "tabular-small" : "rank-deficient", seed);
      ConditionReport rep = diagnose(sc.model, sc.policy_b, sc.policy_e, sc.windows);
      CHECK(rep.iff_consistent);
    }
  }
}

TEST_CASE("condition numbers") {
  SUBCASE("identical policies give dr = 1") {
    Scenario sc = make_scenario("tabular-small", 105);
    ConditionReport rep = diagnose(sc.model, sc.policy_b, sc.policy_b, sc.windows);
    CHECK(rep.dr == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rep.relative_condition_number == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rep.overlap_max == doctest::Approx(1.0).epsilon(1e-8));
  }

  SUBCASE("fully revealing history gives iv1 = 1") {
    Scenario sc = make_scenario("mdp-reduction", 106);
    // identity emission: the single-pair history (o_{t-1}, a_{t-1})
    // does not reveal s_t, but conditioning S on H still spans; instead
    // check the defining inequality chain holds and iv1 is finite
    ConditionReport rep = diagnose(sc.model, sc.policy_b, sc.policy_e, sc.windows);
    CHECK(std::isfinite(rep.iv1));
    CHECK(rep.iv1 >= 1.0 - 1e-9);
  }

  SUBCASE("kappa <= dr * iv1 on every tested model") {
    for (std::uint64_t seed : {107ULL, 108ULL, 109ULL}) {
      for (auto name : {"tabular-small", "tabular-memory", "mismatched"}) {
        Scenario sc = make_scenario(name, seed);
        ConditionReport rep = diagnose(sc.model, sc.policy_b, sc.policy_e, sc.windows);
        if (std::isinf(rep.dr) || std::isinf(rep.iv1)) continue;
        CHECK(rep.kappa <= rep.dr * rep.iv1 + 1e-8);
      }
    }
  }

  SUBCASE("report serializes to json") {
    Scenario sc = make_scenario("tabular-small", 110);
    ConditionReport rep = diagnose(sc.model, sc.policy_b, sc.policy_e, sc.windows);
    std::string text = rep.to_json_string();
    CHECK(text.find("\"kappa\"") != std::string::npos);
    CHECK(text.find("\"rank_f_h\"") != std::string::npos);
  }
}

TEST_CASE("history information monotonicity: longer histories never hurt kappa") {
  Scenario sc = make_scenario("tabular-small", 111);
  double prev = std::numeric_limits<double>::infinity();
  for (int m_h : {1, 2, 3}) {
    WindowConfig cfg{0, m_h, 1};
    ConditionReport rep = diagnose(sc.model, sc.policy_b, sc.policy_e, cfg);
    CHECK(rep.kappa <= prev + 1e-8);
    prev = rep.kappa;
  }
}

TEST_CASE("diagnostics are invariant to observation relabeling") {
  Scenario sc = make_scenario("tabular-small", 112);
  ConditionReport base = diagnose(sc.model, sc.policy_b, sc.policy_e, sc.windows);

  std::vector<int> perm{1, 3, 0, 2};
  TabularPOMDP pm = sc.model;
  for (int s = 0; s < sc.model.n_states; ++s)
    for (int o = 0; o < sc.model.n_obs; ++o) pm.emission(s, perm[o]) = sc.model.emit(s, o);
  auto permute_policy = [&](const MemoryPolicy& p) {
    Mat table(p.table().rows(), p.table().cols());
    for (int o = 0; o < sc.model.n_obs; ++o) table.row(perm[o]) = p.table().row(o);
    return MemoryPolicy::tabular(0, p.n_obs(), p.n_actions(), table);
  };
  ConditionReport moved = diagnose(pm, permute_policy(sc.policy_b),
                                   permute_policy(sc.policy_e), sc.windows);
  CHECK(moved.rank_f_h == base.rank_f_h);
  CHECK(moved.kappa == doctest::Approx(base.kappa).epsilon(1e-8));
  CHECK(moved.dr == doctest::Approx(base.dr).epsilon(1e-8));
  CHECK(moved.iv1 == doctest::Approx(base.iv1).epsilon(1e-8));
  CHECK(moved.overlap_max == doctest::Approx(base.overlap_max).epsilon(1e-8));
}

TEST_CASE("bellman residual") {
  Scenario sc = make_scenario("tabular-memory", 113);
  PopulationTables tables = build_population_tables(sc.model, sc.policy_b, sc.policy_e,
                                                    sc.windows);
  WindowSpaces spaces = tables.spaces;
  MomentSet m = compute_moments_population(tables, sc.model, one_hot_fbar(spaces),
                                           one_hot_history(spaces), sc.model.gamma);

  SUBCASE("the true value bridge has zero residual") {
    Vec b_v = solve_value_bridge(tables, sc.model, sc.policy_e);
    CHECK(bellman_residual(m, b_v) < 1e-10);
  }

  SUBCASE("zero rewards make q = 0 residual-free") {
    TabularPOMDP zero = sc.model;
    zero.reward.setZero();
    MomentSet mz = compute_moments_population(zero, sc.policy_b, sc.policy_e,
                                              one_hot_fbar(spaces), one_hot_history(spaces),
                                              sc.windows);
    CHECK(bellman_residual(mz, Vec::Zero(spaces.fbar_size())) < 1e-14);
  }

  SUBCASE("residuals are nonnegative") {
    Vec q = Vec::Constant(spaces.fbar_size(), -2.0);
    CHECK(bellman_residual(m, q) >= 0.0);
  }

  SUBCASE("empirical residual of the bridge shrinks with n") {
    Vec b_v = solve_value_bridge(tables, sc.model, sc.policy_e);
    OfflineDataset small = generate_offline_dataset(sc.model, sc.policy_b, 500, 1,
                                                    sc.windows, DatasetMode::IidPerTuple, 5);
    OfflineDataset big = generate_offline_dataset(sc.model, sc.policy_b, 50000, 1,
                                                  sc.windows, DatasetMode::IidPerTuple, 5);
    auto emp = [&](const OfflineDataset& ds) {
      MomentSet me = compute_moments_empirical(ds, one_hot_fbar(spaces),
                                               one_hot_history(spaces), sc.policy_e,
                                               sc.policy_b, sc.model.gamma, sc.model.n_obs,
                                               sc.model.n_actions);
      return bellman_residual(me, b_v);
    };
    CHECK(emp(big) < emp(small));
  }
}

TEST_CASE("value bridge solve fails without observability") {
  Scenario sc = make_scenario("rank-deficient", 114);
  PopulationTables tables = build_population_tables(sc.model, sc.policy_b, sc.policy_e,
                                                    sc.windows);
  CHECK_THROWS_AS(solve_value_bridge(tables, sc.model, sc.policy_e), NumericError);
}
