#include "pomdp_ope/lqg_pipeline.hpp"

#include <cmath>

#include "pomdp_ope/features.hpp"
#include "pomdp_ope/rng.hpp"

namespace pomdp_ope {

namespace {

Vec flatten_window(const LqgTrajectory& traj, int from, int count) {
  if (count == 0) return Vec(0);
  int dy = static_cast<int>(traj.obs[0].size());
  int da = static_cast<int>(traj.actions[0].size());
  Vec out((dy + da) * count);
  for (int k = 0; k < count; ++k) {
    out.segment(k * (dy + da), dy) = traj.obs[from + k];
    out.segment(k * (dy + da) + dy, da) = traj.actions[from + k];
  }
  return out;
}

/// f window: obs t..t+mf-1 and actions t..t+mf-2, chronological.
Vec flatten_future(const LqgTrajectory& traj, int t, int m_f) {
  int dy = static_cast<int>(traj.obs[0].size());
  int da = static_cast<int>(traj.actions[0].size());
  Vec out(m_f * dy + (m_f - 1) * da);
  int k = 0;
  for (int i = 0; i < m_f; ++i) {
    out.segment(k, dy) = traj.obs[t + i];
    k += dy;
    if (i + 1 < m_f) {
      out.segment(k, da) = traj.actions[t + i];
      k += da;
    }
  }
  return out;
}

Vec concat(const Vec& a, const Vec& b) {
  Vec out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

std::vector<LqgTuple> lqg_offline_tuples(const LQGModel& model, const MemoryPolicy& policy_b,
                                         const MemoryPolicy& policy_e, std::int64_t n,
                                         const WindowConfig& config, std::uint64_t seed) {
  config.validate();
  if (policy_b.noise_std() <= 0.0)
    throw ConfigError("LQG offline data needs a stochastic behavior policy");
  int burn = 10 * (config.m_h + config.m_f);
  int length = static_cast<int>(n) + config.m_h + config.m_f + 1;
  LqgTrajectory traj = sample_trajectory(model, policy_b, length, seed, burn);

  std::vector<LqgTuple> out;
  out.reserve(n);
  for (std::int64_t i = 0; i < n; ++i) {
    int t = config.m_h + static_cast<int>(i);
    LqgTuple rec;
    rec.h = flatten_window(traj, t - config.m_h, config.m_h);
    Vec z = flatten_window(traj, t - config.m, config.m);
    Vec z_next = flatten_window(traj, t - config.m + 1, config.m);
    rec.fbar = concat(z, flatten_future(traj, t, config.m_f));
    rec.fbar_next = concat(z_next, flatten_future(traj, t + 1, config.m_f));
    rec.r = traj.rewards[t];
    double log_e = policy_e.log_density(traj.actions[t], traj.obs[t], z);
    double log_b = policy_b.log_density(traj.actions[t], traj.obs[t], z);
    rec.mu = std::exp(log_e - log_b);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<Vec> lqg_initial_fbars(const LQGModel& model, const MemoryPolicy& policy_b,
                                   std::int64_t n_init, const WindowConfig& config,
                                   std::uint64_t seed) {
  int burn = 10 * (config.m_h + config.m_f);
  std::vector<Vec> out;
  out.reserve(n_init);
  for (std::int64_t i = 0; i < n_init; ++i) {
    LqgTrajectory traj = sample_trajectory(model, policy_b, config.m + config.m_f,
                                           derive_seed(seed, i), burn);
    Vec z = flatten_window(traj, 0, config.m);
    out.push_back(concat(z, flatten_future(traj, config.m, config.m_f)));
  }
  return out;
}

MomentSet lqg_quadratic_moments(const std::vector<LqgTuple>& tuples,
                                const std::vector<Vec>& nu_fbars, double gamma) {
  if (tuples.empty()) throw ArgumentError("lqg_quadratic_moments: no tuples");
  // Shared bounding box per coordinate family, from the data itself.
  Vec box_f = tuples[0].fbar.cwiseAbs();
  Vec box_h = tuples[0].h.cwiseAbs();
  for (const auto& t : tuples) {
    box_f = box_f.cwiseMax(t.fbar.cwiseAbs()).cwiseMax(t.fbar_next.cwiseAbs());
    box_h = box_h.cwiseMax(t.h.cwiseAbs());
  }
  for (const auto& p : nu_fbars) box_f = box_f.cwiseMax(p.cwiseAbs());

  std::vector<FeaturizedTuple> rows;
  rows.reserve(tuples.size());
  for (const auto& t : tuples) {
    FeaturizedTuple row;
    row.phi_h = quadratic_features(t.h, box_h);
    row.phi_f = quadratic_features(t.fbar, box_f);
    row.phi_f_next = quadratic_features(t.fbar_next, box_f);
    row.mu = t.mu;
    row.r = t.r;
    rows.push_back(std::move(row));
  }
  std::vector<Vec> nu_phis;
  nu_phis.reserve(nu_fbars.size());
  for (const auto& p : nu_fbars) nu_phis.push_back(quadratic_features(p, box_f));
  return accumulate_moments(rows, nu_phis, gamma);
}

double lqg_monte_carlo_value(const LQGModel& model, const MemoryPolicy& policy,
                             std::int64_t n_rollouts, int horizon, std::uint64_t seed,
                             double* std_error) {
  if (n_rollouts < 1 || horizon < 1)
    throw ArgumentError("lqg_monte_carlo_value: need rollouts and horizon >= 1");
  int burn = 10 * (policy.memory() + 1);
  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t i = 0; i < n_rollouts; ++i) {
    LqgTrajectory traj = sample_trajectory(model, policy, horizon, derive_seed(seed, i), burn);
    double g = 0.0, disc = 1.0;
    for (int t = 0; t < horizon; ++t) {
      g += disc * traj.rewards[t];
      disc *= model.gamma;
    }
    sum += g;
    sum_sq += g * g;
  }
  double mean = sum / static_cast<double>(n_rollouts);
  if (std_error != nullptr) {
    double var = (sum_sq - sum * sum / n_rollouts) / std::max<double>(1, n_rollouts - 1);
    *std_error = std::sqrt(var / static_cast<double>(n_rollouts));
  }
  return mean;
}

}  // namespace pomdp_ope
