#include "pomdp_ope/diagnostics.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "pomdp_ope/exact.hpp"
#include "pomdp_ope/linalg.hpp"

namespace pomdp_ope {

namespace {

constexpr double kSupportTol = 1e-12;
const double kInf = std::numeric_limits<double>::infinity();

std::vector<std::int64_t> positive_support(const Vec& p) {
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < p.size(); ++i)
    if (p(i) > kSupportTol) out.push_back(i);
  return out;
}

}  // namespace

ProbabilityMatrices probability_matrices(const PopulationTables& tables) {
  const WindowSpaces& spaces = tables.spaces;
  int ns = spaces.n_states;
  ProbabilityMatrices pm;
  pm.sbar_support = positive_support(tables.pb_zs);
  std::int64_t k = static_cast<std::int64_t>(pm.sbar_support.size());

  // column position of each supported (z, s)
  std::vector<std::int64_t> col_of(tables.pb_zs.size(), -1);
  for (std::int64_t i = 0; i < k; ++i) col_of[pm.sbar_support[i]] = i;

  pm.fbar_given_sbar = Mat::Zero(spaces.fbar_size(), k);
  for (std::int64_t i = 0; i < k; ++i) {
    std::int64_t zs = pm.sbar_support[i];
    std::int64_t z = zs / ns;
    for (std::int64_t fi = 0; fi < spaces.f.size(); ++fi)
      pm.fbar_given_sbar(spaces.fbar_index(z, fi), i) = tables.future_table(fi, zs);
  }

  pm.sbar_h = Mat::Zero(k, spaces.h.size());
  for (std::int64_t h = 0; h < spaces.h.size(); ++h) {
    std::int64_t z = spaces.z_of_h(h);
    for (int s = 0; s < ns; ++s) {
      std::int64_t col = col_of[z * ns + s];
      if (col >= 0) pm.sbar_h(col, h) = tables.stationary_hs(h * ns + s);
    }
  }

  // Conditional independence F | (Z, S) of H makes the joint factor
  // through Sbar_b.
  pm.fbar_h = pm.fbar_given_sbar * pm.sbar_h;
  return pm;
}

ProbabilityMatrices probability_matrices(const TabularPOMDP& model,
                                         const MemoryPolicy& policy_b,
                                         const WindowConfig& config) {
  // The evaluation policy plays no role in these matrices.
  PopulationTables tables = build_population_tables(model, policy_b, policy_b, config);
  return probability_matrices(tables);
}

ConditionReport rank_conditions(const ProbabilityMatrices& pm) {
  ConditionReport rep;
  rep.rank_tolerance = kRankRtol;
  rep.s_bar_b_size = static_cast<std::int64_t>(pm.sbar_support.size());

  auto fgs = svd_rank(pm.fbar_given_sbar);
  rep.rank_f_given_s = fgs.rank;
  rep.sigma_min_f_given_s = fgs.sigma_min;
  auto sh = svd_rank(pm.sbar_h);
  rep.rank_s_h = sh.rank;
  rep.sigma_min_s_h = sh.sigma_min;
  auto fh = svd_rank(pm.fbar_h);
  rep.rank_f_h = fh.rank;
  rep.sigma_min_f_h = fh.sigma_min;

  rep.observability_ok = rep.rank_f_given_s == rep.s_bar_b_size;
  rep.invertibility_ok = rep.rank_s_h == rep.s_bar_b_size;
  rep.joint_rank_ok = rep.rank_f_h == rep.s_bar_b_size;
  rep.iff_consistent = (rep.observability_ok && rep.invertibility_ok) == rep.joint_rank_ok;
  return rep;
}

ConditionReport diagnose(const TabularPOMDP& model, const MemoryPolicy& policy_b,
                         const MemoryPolicy& policy_e, const WindowConfig& config,
                         const Vec& nu_zs) {
  PopulationTables tables = build_population_tables(model, policy_b, policy_e, config, nu_zs);
  ProbabilityMatrices pm = probability_matrices(tables);
  ConditionReport rep = rank_conditions(pm);
  rep.mu_max = tables.mu_max;

  const WindowSpaces& spaces = tables.spaces;
  int ns = spaces.n_states;
  std::int64_t k = rep.s_bar_b_size;

  Vec d_pie = discounted_occupancy(model, policy_e, tables.nu_zs);

  // Mass that d_pie places outside the behavior support makes the plain
  // density-ratio overlap infinite.
  double off_support = 0.0;
  {
    std::vector<bool> on(tables.pb_zs.size(), false);
    for (std::int64_t i : pm.sbar_support) on[i] = true;
    for (std::int64_t i = 0; i < d_pie.size(); ++i)
      if (!on[i]) off_support += d_pie(i);
  }
  rep.overlap_max = 0.0;
  for (std::int64_t i = 0; i < k; ++i) {
    std::int64_t zs = pm.sbar_support[i];
    rep.overlap_max = std::max(rep.overlap_max, d_pie(zs) / tables.pb_zs(zs));
  }
  if (off_support > kSupportTol) rep.overlap_max = kInf;

  // Covariances of the one-hot phi_Sbar class on the support coordinates.
  Mat sigma_b = Mat::Zero(k, k);
  Mat sigma_e = Mat::Zero(k, k);
  for (std::int64_t i = 0; i < k; ++i) {
    sigma_b(i, i) = tables.pb_zs(pm.sbar_support[i]);
    sigma_e(i, i) = d_pie(pm.sbar_support[i]);
  }
  Mat sigma_h = Mat::Zero(k, k);
  {
    std::vector<std::int64_t> col_of(tables.pb_zs.size(), -1);
    for (std::int64_t i = 0; i < k; ++i) col_of[pm.sbar_support[i]] = i;
    for (std::int64_t h = 0; h < spaces.h.size(); ++h) {
      double ph = tables.pb_h(h);
      if (ph <= kSupportTol) continue;
      Vec c = Vec::Zero(k);
      std::int64_t z = spaces.z_of_h(h);
      for (int s = 0; s < ns; ++s) {
        std::int64_t col = col_of[z * ns + s];
        if (col >= 0) c(col) = tables.stationary_hs(h * ns + s) / ph;
      }
      sigma_h += ph * c * c.transpose();
    }
  }

  double iv1_sq = rayleigh_sup(sigma_b, sigma_h);
  double dr_sq = rayleigh_sup(sigma_e, sigma_b);
  double kappa_sq = rayleigh_sup(sigma_e, sigma_h);
  rep.iv1 = std::sqrt(iv1_sq);
  rep.dr = std::sqrt(dr_sq);
  rep.kappa = std::sqrt(kappa_sq);
  rep.relative_condition_number = dr_sq;
  return rep;
}

std::string ConditionReport::to_json_string(int indent) const {
  auto finite_or_str = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  nlohmann::json j;
  j["s_bar_b_size"] = s_bar_b_size;
  j["rank_f_given_s"] = rank_f_given_s;
  j["sigma_min_f_given_s"] = sigma_min_f_given_s;
  j["rank_s_h"] = rank_s_h;
  j["sigma_min_s_h"] = sigma_min_s_h;
  j["rank_f_h"] = rank_f_h;
  j["sigma_min_f_h"] = sigma_min_f_h;
  j["observability_ok"] = observability_ok;
  j["invertibility_ok"] = invertibility_ok;
  j["joint_rank_ok"] = joint_rank_ok;
  j["iff_consistent"] = iff_consistent;
  j["overlap_max"] = finite_or_str(overlap_max);
  j["mu_max"] = finite_or_str(mu_max);
  j["iv1"] = finite_or_str(iv1);
  j["dr"] = finite_or_str(dr);
  j["kappa"] = finite_or_str(kappa);
  j["relative_condition_number"] = finite_or_str(relative_condition_number);
  j["rank_tolerance"] = rank_tolerance;
  return j.dump(indent);
}

double bellman_residual(const MomentSet& moments, const Vec& q) {
  if (q.size() != moments.d_f())
    throw ArgumentError("bellman_residual: coefficient size mismatch");
  Vec e = moments.m1 - moments.m2 * q;
  double r = e.dot(pinv(moments.m3) * e);
  return r < 0.0 ? 0.0 : r;
}

Vec solve_value_bridge(const PopulationTables& tables, const TabularPOMDP& model,
                       const MemoryPolicy& policy_e, double residual_tol) {
  Vec v_full = exact_value_function(model, policy_e);
  std::vector<std::int64_t> support = positive_support(tables.pb_zs);
  Vec v(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) v(i) = v_full(support[i]);

  ProbabilityMatrices pm = probability_matrices(tables);
  Mat a = pm.fbar_given_sbar.transpose();  // |Sbar_b| x |Fbar|
  Vec g = pinv(a) * v;
  double residual = (a * g - v).norm() / (v.norm() + 1.0);
  if (residual > residual_tol)
    throw NumericError("no exact future-dependent value function: residual " +
                       std::to_string(residual));
  return g;
}

}  // namespace pomdp_ope
