#include "pomdp_ope/estimators.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "pomdp_ope/exact.hpp"
#include "pomdp_ope/linalg.hpp"

namespace pomdp_ope {

namespace {

/// (M1 - M2 w)' M3^+ (M1 - M2 w): squared Bellman residual projected on
/// the instrument features.
double projected_residual(const MomentSet& m, const Vec& w) {
  Vec e = m.m1 - m.m2 * w;
  return e.dot(pinv(m.m3) * e);
}

void require_nu(const MomentSet& m) {
  if (!m.has_nu)
    throw ArgumentError("moments carry no initial-distribution mean (empty D_ini)");
}

}  // namespace

std::string ValueEstimate::to_json_string(const std::string& estimator, std::int64_t n,
                                          double gamma, std::uint64_t seed) const {
  nlohmann::json j;
  j["estimator"] = estimator;
  j["j_hat"] = j_hat;
  j["n"] = n;
  j["config"] = {{"lambda", config.lambda},
                 {"alpha", config.alpha},
                 {"alpha_prime", config.alpha_prime},
                 {"gamma", gamma}};
  j["residual_norm"] = residual_norm;
  j["seed"] = seed;
  return j.dump();
}

ValueEstimate minimax_linear(const MomentSet& moments, const EstimatorConfig& cfg) {
  cfg.validate();
  moments.check();
  require_nu(moments);

  Vec w;
  if (cfg.lambda == 0.0 && cfg.alpha == 0.0 && cfg.alpha_prime == 0.0) {
    w = pinv(moments.m2) * moments.m1;
  } else {
    int dh = moments.d_h();
    Mat inner = cfg.alpha * Mat::Identity(dh, dh) + cfg.lambda * moments.m3;
    // alpha = 0 with singular lambda*M3 takes the pseudo-inverse branch.
    Mat inner_inv = pinv(inner);
    Mat a = moments.m2.transpose() * inner_inv * moments.m2;
    a.diagonal().array() += cfg.alpha_prime;
    Vec b = moments.m2.transpose() * inner_inv * moments.m1;
    if (cfg.alpha_prime > 0.0) {
      w = a.ldlt().solve(b);
      if (!w.allFinite() || (a * w - b).norm() > 1e-8 * (b.norm() + 1.0)) w = pinv(a) * b;
    } else {
      w = pinv(a) * b;
    }
  }

  ValueEstimate est;
  est.config = cfg;
  est.coefficients = w;
  est.j_hat = moments.nu_mean.dot(w);
  est.residual_norm = projected_residual(moments, w);
  if (!std::isfinite(est.j_hat) || !w.allFinite()) {
    auto sv = svd_rank(moments.m2);
    throw NumericError("minimax_linear produced a non-finite estimate (sigma_max " +
                       std::to_string(sv.sigma_max) + ", sigma_min " +
                       std::to_string(sv.sigma_min) + ")");
  }
  return est;
}

ValueEstimate finite_horizon_linear(const MomentSet& moments, int horizon) {
  if (horizon < 1) throw ArgumentError("finite_horizon_linear: T must be >= 1");
  moments.check();
  require_nu(moments);

  Mat hf_pinv = pinv(moments.hf);
  Vec theta = Vec::Zero(moments.d_f());  // theta_T = 0
  Vec theta_next = theta;
  for (int t = horizon - 1; t >= 0; --t) {
    theta_next = theta;
    theta = hf_pinv * (moments.m1 + moments.gamma * (moments.hf_next_mu * theta_next));
  }

  ValueEstimate est;
  est.config = EstimatorConfig{};
  est.coefficients = theta;
  est.j_hat = moments.nu_mean.dot(theta);
  Vec y = moments.m1 + moments.gamma * (moments.hf_next_mu * theta_next);
  Vec e = y - moments.hf * theta;
  est.residual_norm = e.dot(pinv(moments.m3) * e);
  if (!std::isfinite(est.j_hat))
    throw NumericError("finite_horizon_linear produced a non-finite estimate");
  return est;
}

double enumerate_objective(const MomentSet& moments, const Vec& q,
                           const std::vector<Vec>& xi_class, double lambda) {
  if (xi_class.empty()) throw ArgumentError("minimax_enumerate: empty critic class");
  Vec e = moments.m1 - moments.m2 * q;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& xi : xi_class) {
    double v = xi.dot(e) - lambda * xi.dot(moments.m3 * xi);
    best = std::max(best, v);
  }
  return best;
}

ValueEstimate minimax_enumerate(const MomentSet& moments, const std::vector<Vec>& q_class,
                                const std::vector<Vec>& xi_class, const EstimatorConfig& cfg,
                                double q_bound, double xi_bound) {
  cfg.validate();
  moments.check();
  require_nu(moments);
  if (q_class.empty() || xi_class.empty())
    throw ArgumentError("minimax_enumerate: empty hypothesis class");

  std::vector<const Vec*> qs, xis;
  for (const auto& q : q_class)
    if (q_bound <= 0.0 || q.lpNorm<Eigen::Infinity>() <= q_bound) qs.push_back(&q);
  for (const auto& xi : xi_class)
    if (xi_bound <= 0.0 || xi.lpNorm<Eigen::Infinity>() <= xi_bound) xis.push_back(&xi);
  if (qs.empty() || xis.empty())
    throw ArgumentError("minimax_enumerate: norm bounds removed every candidate");
  if (static_cast<std::int64_t>(qs.size()) * static_cast<std::int64_t>(xis.size()) >
      100'000'000)
    throw CapacityError("minimax_enumerate: candidate product too large");

  const Vec* best_q = nullptr;
  double best_val = std::numeric_limits<double>::infinity();
  for (const Vec* q : qs) {
    Vec e = moments.m1 - moments.m2 * (*q);
    double inner = -std::numeric_limits<double>::infinity();
    for (const Vec* xi : xis) {
      double v = xi->dot(e) - cfg.lambda * xi->dot(moments.m3 * (*xi));
      inner = std::max(inner, v);
    }
    if (inner < best_val) {  // strict: ties keep the first candidate
      best_val = inner;
      best_q = q;
    }
  }

  ValueEstimate est;
  est.config = cfg;
  est.coefficients = *best_q;
  est.j_hat = moments.nu_mean.dot(*best_q);
  est.residual_norm = projected_residual(moments, *best_q);
  return est;
}

ValueEstimate minimax_rkhs(const OfflineDataset& ds, const MemoryPolicy& policy_e,
                           const MemoryPolicy& policy_b, const FbarEmbed& fbar_embed,
                           const HistEmbed& hist_embed, const KernelFn& kernel_f,
                           const KernelFn& kernel_h, double gamma,
                           const EstimatorConfig& cfg, int n_obs, int n_actions) {
  cfg.validate();
  if (cfg.alpha <= 0.0 || cfg.alpha_prime <= 0.0)
    throw ArgumentError("minimax_rkhs requires alpha > 0 and alpha_prime > 0");
  if (ds.tuples.empty()) throw ArgumentError("minimax_rkhs: empty D_tra");
  if (ds.initial_samples.empty()) throw ArgumentError("minimax_rkhs: empty D_ini");
  const int n = static_cast<int>(ds.tuples.size());
  WindowSpaces spaces(1, n_obs, n_actions, ds.config);

  std::vector<Vec> h_pts(n);
  std::vector<Vec> basis(2 * n);  // Fbar_i then Fbar'_i
  Vec mu(n), ybar(n);
  for (int i = 0; i < n; ++i) {
    const auto& t = ds.tuples[i];
    h_pts[i] = hist_embed(t.h, t.o);
    basis[i] = fbar_embed(t.z, t.f);
    basis[n + i] = fbar_embed(t.z_next, t.f_next);
    mu(i) = tuple_importance_ratio(policy_e, policy_b, t, spaces.z);
    ybar(i) = mu(i) * t.r;
  }

  Mat k_h = gram_matrix(kernel_h, h_pts);
  Mat k_q = gram_matrix(kernel_f, basis);
  Mat k_tilde = k_q.topRows(n) - gamma * (mu.asDiagonal() * k_q.bottomRows(n));

  // Inner critic maximum gives the weighting W = (1/n^2) K_H ((l/n) K_H + a I)^-1.
  Mat g = (cfg.lambda / n) * k_h + cfg.alpha * Mat::Identity(n, n);
  Mat w_mat = k_h * g.ldlt().solve(Mat::Identity(n, n)) / (static_cast<double>(n) * n);
  w_mat = 0.5 * (w_mat + w_mat.transpose());

  Mat a = k_tilde.transpose() * w_mat * k_tilde + cfg.alpha_prime * k_q;
  Vec b = k_tilde.transpose() * w_mat * ybar;
  Vec beta = a.ldlt().solve(b);
  if (!beta.allFinite() || (a * beta - b).norm() > 1e-8 * (b.norm() + 1.0))
    beta = pinv(a) * b;

  // J = mean over D_ini of sum_j beta_j k(x, basis_j).
  double j_hat = 0.0;
  for (const auto& s : ds.initial_samples) {
    Vec x = fbar_embed(s.z, s.f);
    double v = 0.0;
    for (int jcol = 0; jcol < 2 * n; ++jcol) v += beta(jcol) * kernel_f.eval(x, basis[jcol]);
    j_hat += v;
  }
  j_hat /= static_cast<double>(ds.initial_samples.size());

  ValueEstimate est;
  est.config = cfg;
  est.coefficients = beta;
  est.j_hat = j_hat;
  Vec e = ybar - k_tilde * beta;
  est.residual_norm = e.dot(w_mat * e);
  if (!std::isfinite(j_hat)) throw NumericError("minimax_rkhs produced a non-finite estimate");
  return est;
}

SisEstimate sis_estimate(const std::vector<Trajectory>& trajectories,
                         const MemoryPolicy& policy_e, const MemoryPolicy& policy_b,
                         double gamma, int horizon_cap) {
  if (trajectories.empty()) throw ArgumentError("sis_estimate: no trajectories");
  if (horizon_cap < 1) throw ArgumentError("sis_estimate: horizon_cap must be >= 1");
  PairWindowCodec z_codec(policy_b.n_obs(), policy_b.n_actions(), policy_b.memory());

  std::vector<double> returns, weights;
  returns.reserve(trajectories.size());
  weights.reserve(trajectories.size());
  for (const auto& traj : trajectories) {
    std::int64_t z = z_codec.encode(traj.z0);
    double cum_w = 1.0;
    double ret = 0.0;
    double disc = 1.0;
    int steps = std::min<int>(horizon_cap, traj.length());
    for (int t = 0; t < steps; ++t) {
      cum_w *= importance_ratio(policy_e, policy_b, z, traj.obs[t], traj.actions[t]);
      ret += disc * cum_w * traj.rewards[t];
      disc *= gamma;
      z = z_codec.shift(z, traj.obs[t], traj.actions[t]);
      if (cum_w == 0.0) break;  // all later terms vanish
    }
    returns.push_back(ret);
    weights.push_back(cum_w);
  }

  auto variance = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return xs.size() > 1 ? var / static_cast<double>(xs.size() - 1) : 0.0;
  };

  SisEstimate out;
  out.n_trajectories = static_cast<std::int64_t>(trajectories.size());
  double sum = 0.0;
  for (double r : returns) sum += r;
  out.j_hat = sum / static_cast<double>(returns.size());
  out.weight_variance = variance(weights);
  out.value_variance = variance(returns);
  return out;
}

std::vector<Trajectory> sample_stationary_trajectories(const TabularPOMDP& model,
                                                       const MemoryPolicy& policy_b,
                                                       std::int64_t n_traj, int length,
                                                       std::uint64_t seed) {
  Vec stat = behavior_stationary_distribution(model, policy_b, policy_b.memory());
  std::vector<double> cdf(stat.size());
  double acc = 0.0;
  for (int i = 0; i < stat.size(); ++i) {
    acc += std::max(stat(i), 0.0);
    cdf[i] = acc;
  }
  for (auto& c : cdf) c /= acc;
  cdf.back() = 1.0;

  int ns = model.n_states;
  std::vector<Trajectory> out;
  out.reserve(n_traj);
  for (std::int64_t i = 0; i < n_traj; ++i) {
    TabularSimulator sim(model, policy_b, policy_b.memory(), derive_seed(seed, i));
    double u = sim.rng().uniform();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::int64_t ws = static_cast<std::int64_t>(it - cdf.begin());
    sim.restart(ws / ns, static_cast<int>(ws % ns));
    Trajectory traj;
    traj.z0 = sim.window();
    for (int t = 0; t < length; ++t) {
      auto st = sim.step();
      traj.states.push_back(st.s);
      traj.obs.push_back(st.o);
      traj.actions.push_back(st.a);
      traj.rewards.push_back(st.r);
    }
    out.push_back(std::move(traj));
  }
  return out;
}

}  // namespace pomdp_ope
