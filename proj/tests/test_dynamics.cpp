#include <doctest.h>

#include <cmath>

#include "pomdp_ope/dynamics.hpp"
#include "pomdp_ope/linalg.hpp"
#include "pomdp_ope/exact.hpp"
#include "pomdp_ope/scenarios.hpp"

using namespace pomdp_ope;

namespace {

struct Setup {
  Scenario sc;
  PopulationTables tables;
  Vec stat_s;

  explicit Setup(std::uint64_t seed)
      : sc(make_scenario("tabular-small", seed)),
        tables(build_population_tables(sc.model, sc.policy_b, sc.policy_e, sc.windows)),
        stat_s(state_marginal(tables.stationary_hs, sc.model.n_states)) {}
};

std::vector<std::pair<int, int>> all_pairs(int n_obs, int n_actions) {
  std::vector<std::pair<int, int>> out;
  for (int o = 0; o < n_obs; ++o)
    for (int a = 0; a < n_actions; ++a) out.emplace_back(o, a);
  return out;
}

}  // namespace

TEST_CASE("single latent state factorizes the spectral estimate") {
  TabularPOMDP m = random_pomdp(1, 3, 2, 0.9, 121);
  MemoryPolicy pb = random_policy(0, 3, 2, 122);
  MemoryPolicy pe = random_policy(0, 3, 2, 123);
  WindowConfig cfg{0, 1, 1};
  PopulationTables tables = build_population_tables(m, pb, pe, cfg);
  std::vector<std::pair<int, int>> seq{{0, 1}, {2, 0}};
  DynamicsMoments dm = dynamics_moments_population(tables, m, seq);
  double est = spectral_joint_probability(dm);
  double expect = 1.0;
  for (auto [o, a] : seq) expect *= m.emit(0, o) * pe.prob(0, o, a);
  CHECK(est == doctest::Approx(expect).epsilon(1e-10));

  // next-observation distribution equals the emission row
  Vec cond = spectral_conditional_distribution(dm);
  for (int o = 0; o < 3; ++o) CHECK(cond(o) == doctest::Approx(m.emit(0, o)).epsilon(1e-8));
}

TEST_CASE("population spectral joint probabilities match the forward oracle") {
  Setup su(124);
  for (auto [o0, a0] : all_pairs(4, 2)) {
    for (auto [o1, a1] : all_pairs(4, 2)) {
      std::vector<std::pair<int, int>> seq{{o0, a0}, {o1, a1}};
      DynamicsMoments dm = dynamics_moments_population(su.tables, su.sc.model, seq);
      double est = spectral_joint_probability(dm);
      double oracle = joint_sequence_probability(su.sc.model, su.sc.policy_e, seq, su.stat_s);
      CHECK(std::abs(est - oracle) < 1e-8);
    }
  }
}

TEST_CASE("population spectral estimates normalize over length-2 sequences") {
  Setup su(125);
  double total = 0.0;
  for (auto [o0, a0] : all_pairs(4, 2))
    for (auto [o1, a1] : all_pairs(4, 2)) {
      std::vector<std::pair<int, int>> seq{{o0, a0}, {o1, a1}};
      total += spectral_joint_probability(
          dynamics_moments_population(su.tables, su.sc.model, seq));
    }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("conditional distribution matches the forward predictive") {
  Setup su(126);
  std::vector<std::pair<int, int>> seq{{1, 0}, {3, 1}, {0, 0}};
  DynamicsMoments dm = dynamics_moments_population(su.tables, su.sc.model, seq);
  Vec est = spectral_conditional_distribution(dm);
  Vec oracle = forward_predictive_distribution(su.sc.model, su.sc.policy_e, seq, su.stat_s);
  CHECK(est.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est.minCoeff() >= 0.0);
  for (int o = 0; o < 4; ++o) CHECK(std::abs(est(o) - oracle(o)) < 1e-8);
}

TEST_CASE("prefix extension never increases identified joint probabilities") {
  Setup su(127);
  std::vector<std::pair<int, int>> prefix{{0, 0}};
  double p1 = spectral_joint_probability(
      dynamics_moments_population(su.tables, su.sc.model, prefix));
  prefix.push_back({1, 1});
  double p2 = spectral_joint_probability(
      dynamics_moments_population(su.tables, su.sc.model, prefix));
  CHECK(p2 <= p1 + 1e-8);
}

TEST_CASE("minimax recursion equals the spectral closed form") {
  Setup su(128);
  std::vector<std::pair<int, int>> seq{{2, 1}, {0, 0}, {3, 1}};
  DynamicsMoments dm = dynamics_moments_population(su.tables, su.sc.model, seq);
  double spectral = spectral_joint_probability(dm);
  double minimax = minimax_dynamics(dm, EstimatorConfig{});
  CHECK(std::abs(spectral - minimax) < 1e-10);
  double oracle = joint_sequence_probability(su.sc.model, su.sc.policy_e, seq, su.stat_s);
  CHECK(std::abs(minimax - oracle) < 1e-8);
}

TEST_CASE("empty target sequence returns one") {
  Setup su(129);
  DynamicsMoments dm = dynamics_moments_population(su.tables, su.sc.model, {});
  CHECK(spectral_joint_probability(dm) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(minimax_dynamics(dm, EstimatorConfig{}) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("enumerated per-step recursion matches when the truth is offered") {
  Setup su(130);
  std::vector<std::pair<int, int>> seq{{1, 1}};
  DynamicsMoments dm = dynamics_moments_population(su.tables, su.sc.model, seq);
  double spectral = spectral_joint_probability(dm);

  // closed-form per-step solutions as candidates plus distractors
  Mat b_pinv_t = pinv(dm.b_mat).transpose();
  Vec theta_T = b_pinv_t * dm.h_mean;
  Vec theta_0 = b_pinv_t * (dm.d_mats[0].transpose() * theta_T);
  std::vector<Vec> q_class{theta_T, theta_0, Vec::Zero(dm.b_mat.rows())};
  // symmetric critic class
  std::vector<Vec> xi_class;
  for (int i = 0; i < dm.b_mat.cols(); ++i) {
    xi_class.push_back(one_hot(i, dm.b_mat.cols()));
    xi_class.push_back(-one_hot(i, dm.b_mat.cols()));
  }
  double est = minimax_dynamics_enumerate(dm, q_class, xi_class, 0.0);
  CHECK(std::abs(est - spectral) < 1e-9);
}

TEST_CASE("empirical dynamics moments converge to population") {
  Setup su(131);
  std::vector<std::pair<int, int>> seq{{1, 0}};
  DynamicsMoments pop = dynamics_moments_population(su.tables, su.sc.model, seq);
  int n = 100000;
  OfflineDataset ds = generate_offline_dataset(su.sc.model, su.sc.policy_b, n, n,
                                               su.sc.windows, DatasetMode::IidPerTuple, 33);
  DynamicsMoments emp = dynamics_moments_empirical(ds, su.sc.policy_e, su.sc.policy_b, seq,
                                                   su.sc.model.n_obs, su.sc.model.n_actions);
  double bound = 5.0 * 4.0 / std::sqrt(static_cast<double>(n));
  CHECK((emp.b_mat - pop.b_mat).cwiseAbs().maxCoeff() < bound);
  CHECK((emp.d_mats[0] - pop.d_mats[0]).cwiseAbs().maxCoeff() < bound);
  CHECK((emp.c_vec - pop.c_vec).cwiseAbs().maxCoeff() < bound);
  CHECK((emp.h_mean - pop.h_mean).cwiseAbs().maxCoeff() < bound);
}

TEST_CASE("atomic evaluation against a uniform behavior policy") {
  // pi_b uniform, pi_e(a) = I(a = a_t): D_t must equal the mu-free
  // conditional Pr(O = o_t, F', H | A = a_t) computed directly.
  TabularPOMDP m = random_pomdp(3, 3, 2, 0.9, 132);
  MemoryPolicy pb = MemoryPolicy::uniform(0, 3, 2);
  int target_o = 1, target_a = 0;
  Mat te = Mat::Zero(3, 2);
  te.col(target_a).setOnes();
  MemoryPolicy pe = MemoryPolicy::tabular(0, 3, 2, te);
  WindowConfig cfg{0, 1, 1};
  PopulationTables tables = build_population_tables(m, pb, pe, cfg);
  DynamicsMoments dm = dynamics_moments_population(tables, m, {{target_o, target_a}});

  // direct conditional computation
  WindowSpaces spaces(m.n_states, m.n_obs, m.n_actions, cfg);
  Mat direct = Mat::Zero(spaces.f.size(), spaces.h.size());
  int ns = m.n_states;
  for (std::int64_t h = 0; h < spaces.h.size(); ++h)
    for (int s = 0; s < ns; ++s) {
      double p_hs = tables.stationary_hs(h * ns + s);
      if (p_hs <= 0.0) continue;
      double w = p_hs * m.emit(s, target_o);  // x Pr(A = a_t | o) / Pr(A = a_t)
      for (int s2 = 0; s2 < ns; ++s2) {
        double wt = w * m.trans(s, target_a, s2);
        for (int o2 = 0; o2 < m.n_obs; ++o2)
          direct(o2, h) += wt * m.emit(s2, o2);
      }
    }
  // mu(o, a_t) = 1 / pi_b = 2, and I(A = a_t) * pi_b cancels it: the
  // population D_t equals Pr(O = o_t, F', H | A = a_t) exactly.
  CHECK((dm.d_mats[0] - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partition of unity over targets") {
  Setup su(133);
  auto targets = all_pairs(4, 2);
  DynamicsMoments dm = dynamics_moments_population(su.tables, su.sc.model, targets);
  Mat total = Mat::Zero(dm.b_mat.rows(), dm.b_mat.cols());
  for (const auto& d : dm.d_mats) total += d;
  // sum over (o, a) of E[I(o,a) mu phi_F(F') phi_H'] = E[mu phi_F(F') phi_H']
  // whose entries sum to E[mu] = 1
  CHECK(total.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("missing support raises a support error") {
  Setup su(134);
  // 3 tuples cover at most 3 of the 8 (o, a) pairs; target one that is absent
  OfflineDataset ds = generate_offline_dataset(su.sc.model, su.sc.policy_b, 3, 5,
                                               su.sc.windows, DatasetMode::IidPerTuple, 3);
  std::pair<int, int> absent{-1, -1};
  for (int o = 0; o < 4 && absent.first < 0; ++o)
    for (int a = 0; a < 2 && absent.first < 0; ++a) {
      bool seen = false;
      for (const auto& t : ds.tuples) seen = seen || (t.o == o && t.a == a);
      if (!seen) absent = {o, a};
    }
  REQUIRE(absent.first >= 0);
  CHECK_THROWS_AS(dynamics_moments_empirical(ds, su.sc.policy_e, su.sc.policy_b, {absent},
                                             su.sc.model.n_obs, su.sc.model.n_actions),
                  SupportError);
}

TEST_CASE("hmm reduction") {
  TabularPOMDP hmm = random_hmm(2, 3, 0.9, 135);
  MemoryPolicy trivial = MemoryPolicy::uniform(0, 3, 1);
  Vec stat_s = state_marginal(behavior_stationary_distribution(hmm, trivial, 0), 2);

  SUBCASE("iid observations factor into marginals") {
    TabularPOMDP iid = random_hmm(1, 3, 0.9, 136);
    HmmMoments m = hmm_moments_population(iid);
    std::vector<int> seq{0, 2, 1};
    double est = hmm_spectral(m, seq);
    double expect = 1.0;
    for (int o : seq) expect *= iid.emit(0, o);
    CHECK(est == doctest::Approx(expect).epsilon(1e-10));
  }

  SUBCASE("2-state hmm matches the forward algorithm") {
    HmmMoments m = hmm_moments_population(hmm);
    for (int o0 = 0; o0 < 3; ++o0)
      for (int o1 = 0; o1 < 3; ++o1) {
        double est = hmm_spectral(m, {o0, o1});
        double oracle = joint_sequence_probability(hmm, trivial, {{o0, 0}, {o1, 0}}, stat_s);
        CHECK(std::abs(est - oracle) < 1e-8);
      }
  }

  SUBCASE("the general operation with |A| = 1 reduces to the hmm formula") {
    WindowConfig cfg{0, 1, 1};
    PopulationTables tables = build_population_tables(hmm, trivial, trivial, cfg);
    HmmMoments m = hmm_moments_population(hmm);
    std::vector<int> seq{2, 0, 1};
    std::vector<std::pair<int, int>> seq_a;
    for (int o : seq) seq_a.emplace_back(o, 0);
    DynamicsMoments dm = dynamics_moments_population(tables, hmm, seq_a);
    CHECK(std::abs(spectral_joint_probability(dm) - hmm_spectral(m, seq)) < 1e-10);
  }

  SUBCASE("empirical hmm moments estimate the same quantity") {
    Trajectory traj = sample_trajectory(hmm, trivial, 200000, 7, 200);
    HmmMoments emp = hmm_moments_from_trajectory(traj, 3);
    HmmMoments pop = hmm_moments_population(hmm);
    CHECK((emp.cooc - pop.cooc).cwiseAbs().maxCoeff() < 0.01);
    double est = hmm_spectral(emp, {0, 1});
    double oracle = hmm_spectral(pop, {0, 1});
    CHECK(std::abs(est - oracle) < 0.02);
  }
}

TEST_CASE("up-to-scale moments still produce the right conditionals") {
  Setup su(137);
  std::vector<std::pair<int, int>> seq{{1, 0}, {2, 1}};
  int n = 50000;
  OfflineDataset ds = generate_offline_dataset(su.sc.model, su.sc.policy_b, n, n,
                                               su.sc.windows, DatasetMode::IidPerTuple, 55);
  DynamicsMoments scaled = dynamics_moments_empirical(ds, su.sc.policy_e, su.sc.policy_b,
                                                      seq, su.sc.model.n_obs,
                                                      su.sc.model.n_actions, true);
  CHECK(scaled.scaled);
  CHECK_THROWS_AS(spectral_joint_probability(scaled), ArgumentError);
  Vec cond = spectral_conditional_distribution(scaled);
  Vec oracle = forward_predictive_distribution(su.sc.model, su.sc.policy_e, seq, su.stat_s);
  for (int o = 0; o < 4; ++o) CHECK(std::abs(cond(o) - oracle(o)) < 0.05);
}

TEST_CASE("rank deficiency is flagged but estimation proceeds") {
  Scenario sc = make_scenario("rank-deficient", 138);
  PopulationTables tables = build_population_tables(sc.model, sc.policy_b, sc.policy_e,
                                                    sc.windows);
  DynamicsMoments dm = dynamics_moments_population(tables, sc.model, {{0, 0}});
  SpectralDiag diag = spectral_diagnostic(dm);
  CHECK(diag.b_rank <= 2);
  double est = spectral_joint_probability(dm);  // still returns a number
  CHECK(std::isfinite(est));
}
