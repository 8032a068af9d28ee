#include "pomdp_ope/dynamics.hpp"

#include <cmath>

#include "pomdp_ope/exact.hpp"
#include "pomdp_ope/linalg.hpp"

namespace pomdp_ope {

namespace {

void require_memoryless(int m, const char* what) {
  if (m != 0) throw ArgumentError(std::string(what) + " requires memory-less policies (M = 0)");
}

}  // namespace

void DynamicsMoments::check() const {
  Eigen::Index d_f = b_mat.rows(), d_h = b_mat.cols();
  if (h_mean.size() != d_h || c_vec.size() != d_f)
    throw ArgumentError("DynamicsMoments: vector dimensions do not chain with B");
  for (const auto& d : d_mats)
    if (d.rows() != d_f || d.cols() != d_h)
      throw ArgumentError("DynamicsMoments: D_t shape mismatch");
  if (o_h_mat.size() != 0 && o_h_mat.cols() != d_h)
    throw ArgumentError("DynamicsMoments: O-H matrix shape mismatch");
}

SpectralDiag spectral_diagnostic(const DynamicsMoments& moments) {
  auto sv = svd_rank(moments.b_mat);
  SpectralDiag d;
  d.b_rank = sv.rank;
  d.sigma_min = sv.sigma_min;
  d.rank_deficient = sv.rank < std::min(moments.b_mat.rows(), moments.b_mat.cols());
  return d;
}

DynamicsMoments dynamics_moments_population(const PopulationTables& tables,
                                            const TabularPOMDP& model,
                                            const std::vector<std::pair<int, int>>& targets) {
  require_memoryless(tables.spaces.config.m, "dynamics_moments_population");
  const WindowSpaces& spaces = tables.spaces;
  int ns = model.n_states;
  std::int64_t d_f = spaces.f.size();
  std::int64_t d_h = spaces.h.size();

  DynamicsMoments m;
  m.targets = targets;
  m.b_mat = Mat::Zero(d_f, d_h);
  m.c_vec = Vec::Zero(d_f);
  m.h_mean = tables.pb_h;
  m.o_h_mat = Mat::Zero(model.n_obs, d_h);
  m.m3_h = Mat::Zero(d_h, d_h);
  m.d_mats.assign(targets.size(), Mat::Zero(d_f, d_h));

  for (std::int64_t h = 0; h < d_h; ++h) {
    m.m3_h(h, h) = tables.pb_h(h);
    for (int s = 0; s < ns; ++s) {
      double p_hs = tables.stationary_hs(h * ns + s);
      if (p_hs <= 0.0) continue;
      for (std::int64_t fi = 0; fi < d_f; ++fi)
        m.b_mat(fi, h) += p_hs * tables.future_table(fi, s);
      for (int o = 0; o < model.n_obs; ++o) m.o_h_mat(o, h) += p_hs * model.emit(s, o);
      for (const auto& rec : tables.paths[s]) {
        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
          if (rec.o == targets[ti].first && rec.a == targets[ti].second)
            m.d_mats[ti](rec.f_next_idx, h) += p_hs * rec.prob_b * rec.mu;
        }
      }
    }
  }
  for (int s = 0; s < ns; ++s) {
    double p = tables.nu_zs(s);
    if (p <= 0.0) continue;
    for (std::int64_t fi = 0; fi < d_f; ++fi) m.c_vec(fi) += p * tables.future_table(fi, s);
  }
  m.check();
  return m;
}

DynamicsMoments dynamics_moments_empirical(const OfflineDataset& ds,
                                           const MemoryPolicy& policy_e,
                                           const MemoryPolicy& policy_b,
                                           const std::vector<std::pair<int, int>>& targets,
                                           int n_obs, int n_actions, bool up_to_scale) {
  require_memoryless(ds.config.m, "dynamics_moments_empirical");
  require_memoryless(policy_e.memory(), "dynamics_moments_empirical");
  if (ds.tuples.empty()) throw ArgumentError("dynamics moments: empty D_tra");
  WindowSpaces spaces(1, n_obs, n_actions, ds.config);
  std::int64_t d_f = spaces.f.size();
  std::int64_t d_h = spaces.h.size();

  DynamicsMoments m;
  m.targets = targets;
  m.scaled = up_to_scale;
  m.b_mat = Mat::Zero(d_f, d_h);
  m.c_vec = Vec::Zero(d_f);
  m.h_mean = Vec::Zero(d_h);
  m.o_h_mat = Mat::Zero(n_obs, d_h);
  m.m3_h = Mat::Zero(d_h, d_h);
  m.d_mats.assign(targets.size(), Mat::Zero(d_f, d_h));
  std::vector<std::int64_t> hits(targets.size(), 0);

  double w = 1.0 / static_cast<double>(ds.tuples.size());
  for (const auto& t : ds.tuples) {
    std::int64_t h_idx = spaces.h.encode(t.h);
    std::int64_t f_idx = spaces.f.encode(t.f);
    std::int64_t fn_idx = spaces.f.encode(t.f_next);
    double mu = tuple_importance_ratio(policy_e, policy_b, t, spaces.z);
    m.b_mat(f_idx, h_idx) += w;
    m.h_mean(h_idx) += w;
    m.o_h_mat(t.o, h_idx) += w;
    m.m3_h(h_idx, h_idx) += w;
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      if (t.o == targets[ti].first && t.a == targets[ti].second) {
        m.d_mats[ti](fn_idx, h_idx) += w * mu;
        ++hits[ti];
      }
    }
  }
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    if (hits[ti] == 0)
      throw SupportError("no data matching target (o=" + std::to_string(targets[ti].first) +
                         ", a=" + std::to_string(targets[ti].second) + ")");
    if (up_to_scale)
      m.d_mats[ti] /= static_cast<double>(hits[ti]) * w;  // empirical Pr(o_t, a_t)
  }

  if (!ds.initial_samples.empty()) {
    double wi = 1.0 / static_cast<double>(ds.initial_samples.size());
    for (const auto& s : ds.initial_samples) m.c_vec(spaces.f.encode(s.f)) += wi;
  }
  m.check();
  return m;
}

namespace {

/// theta_0 from the backward chain theta_t' = theta_{t+1}' D_t B+,
/// starting at theta_T' = h_mean' B+.
Vec spectral_theta0(const DynamicsMoments& m) {
  Mat b_pinv = pinv(m.b_mat);  // d_h x d_f
  Vec theta = b_pinv.transpose() * m.h_mean;
  for (auto it = m.d_mats.rbegin(); it != m.d_mats.rend(); ++it)
    theta = b_pinv.transpose() * (it->transpose() * theta);
  return theta;
}

}  // namespace

double spectral_joint_probability(const DynamicsMoments& moments) {
  moments.check();
  if (moments.scaled)
    throw ArgumentError("joint probability is not identified from up-to-scale moments");
  double value = spectral_theta0(moments).dot(moments.c_vec);
  if (!std::isfinite(value)) throw NumericError("spectral estimate is not finite");
  return value;
}

Vec spectral_conditional_distribution(const DynamicsMoments& moments, Vec* unclipped) {
  moments.check();
  if (moments.o_h_mat.size() == 0)
    throw ArgumentError("conditional distribution requires the O-H moment");
  Mat b_pinv = pinv(moments.b_mat);
  // The product is ordered t = T-1 .. 0 acting on C, so the rightmost
  // factor D_0 B+ applies first.
  Vec chain = moments.c_vec;
  for (const auto& d : moments.d_mats) chain = d * (b_pinv * chain);
  Vec raw = moments.o_h_mat * (b_pinv * chain);
  if (unclipped != nullptr) *unclipped = raw;
  Vec clipped = raw.cwiseMax(0.0);
  double total = clipped.sum();
  if (total <= 0.0)
    throw DegenerateEstimateError("conditional estimate vanished before normalization");
  return clipped / total;
}

double minimax_dynamics(const DynamicsMoments& moments, const EstimatorConfig& cfg) {
  cfg.validate();
  moments.check();
  if (moments.scaled)
    throw ArgumentError("minimax_dynamics needs unscaled moments");

  // Per-step solve of E[(q(F) - target)(phi_H)] = 0 in the regularized
  // weighted least-squares sense; A = B' plays the role of M2.
  Mat a = moments.b_mat.transpose();  // d_h x d_f
  Eigen::Index d_h = a.rows();
  auto solve_step = [&](const Vec& y) {
    if (cfg.lambda == 0.0 && cfg.alpha == 0.0 && cfg.alpha_prime == 0.0)
      return Vec(pinv(a) * y);
    Mat inner = cfg.alpha * Mat::Identity(d_h, d_h) + cfg.lambda * moments.m3_h;
    Mat inner_inv = pinv(inner);
    Mat lhs = a.transpose() * inner_inv * a;
    lhs.diagonal().array() += cfg.alpha_prime;
    Vec rhs = a.transpose() * inner_inv * y;
    return Vec(pinv(lhs) * rhs);
  };

  Vec theta = solve_step(moments.h_mean);  // b_hat^{[T]} fitted to constant 1
  for (auto it = moments.d_mats.rbegin(); it != moments.d_mats.rend(); ++it)
    theta = solve_step(it->transpose() * theta);
  double value = theta.dot(moments.c_vec);
  if (!std::isfinite(value)) throw NumericError("minimax_dynamics estimate is not finite");
  return value;
}

double minimax_dynamics_enumerate(const DynamicsMoments& moments,
                                  const std::vector<Vec>& q_class,
                                  const std::vector<Vec>& xi_class, double lambda) {
  moments.check();
  if (q_class.empty() || xi_class.empty())
    throw ArgumentError("minimax_dynamics_enumerate: empty hypothesis class");

  auto pick = [&](const Vec& y) -> const Vec& {
    const Vec* best = nullptr;
    double best_val = std::numeric_limits<double>::infinity();
    for (const auto& q : q_class) {
      Vec e = y - moments.b_mat.transpose() * q;
      double inner = -std::numeric_limits<double>::infinity();
      for (const auto& xi : xi_class)
        inner = std::max(inner, xi.dot(e) - lambda * xi.dot(moments.m3_h * xi));
      if (inner < best_val) {
        best_val = inner;
        best = &q;
      }
    }
    return *best;
  };

  Vec theta = pick(moments.h_mean);
  for (auto it = moments.d_mats.rbegin(); it != moments.d_mats.rend(); ++it)
    theta = pick(it->transpose() * theta);
  return theta.dot(moments.c_vec);
}

HmmMoments hmm_moments_population(const TabularPOMDP& model) {
  model.validate();
  if (model.n_actions != 1)
    throw ArgumentError("hmm_moments_population expects a no-action model (|A| = 1)");
  int ns = model.n_states, no = model.n_obs;
  // Stationary latent distribution of the action-free chain.
  MemoryPolicy trivial = MemoryPolicy::uniform(0, no, 1);
  Vec pstat = behavior_stationary_distribution(model, trivial, 0);

  HmmMoments m;
  m.obs_marginal = Vec::Zero(no);
  m.cooc = Mat::Zero(no, no);
  m.triple.assign(no, Mat::Zero(no, no));
  for (int s0 = 0; s0 < ns; ++s0) {
    double p0 = pstat(s0);
    if (p0 <= 0.0) continue;
    for (int om = 0; om < no; ++om) m.obs_marginal(om) += p0 * model.emit(s0, om);
    for (int s1 = 0; s1 < ns; ++s1) {
      double p01 = p0 * model.trans(s0, 0, s1);
      if (p01 <= 0.0) continue;
      for (int om = 0; om < no; ++om) {
        double pm = p01 * model.emit(s0, om);
        for (int o0 = 0; o0 < no; ++o0) {
          double pmo = pm * model.emit(s1, o0);
          if (pmo <= 0.0) continue;
          m.cooc(o0, om) += pmo;
          for (int s2 = 0; s2 < ns; ++s2) {
            double p012 = pmo * model.trans(s1, 0, s2);
            if (p012 <= 0.0) continue;
            for (int o1 = 0; o1 < no; ++o1)
              m.triple[o0](o1, om) += p012 * model.emit(s2, o1);
          }
        }
      }
    }
  }
  return m;
}

HmmMoments hmm_moments_from_trajectory(const Trajectory& traj, int n_obs) {
  if (traj.length() < 3)
    throw ArgumentError("hmm moments need a trajectory of length >= 3");
  HmmMoments m;
  m.obs_marginal = Vec::Zero(n_obs);
  m.cooc = Mat::Zero(n_obs, n_obs);
  m.triple.assign(n_obs, Mat::Zero(n_obs, n_obs));
  std::int64_t n = traj.length() - 2;
  double w = 1.0 / static_cast<double>(n);
  for (std::int64_t t = 0; t < n; ++t) {
    int om = traj.obs[t], o0 = traj.obs[t + 1], o1 = traj.obs[t + 2];
    m.obs_marginal(om) += w;
    m.cooc(o0, om) += w;
    m.triple[o0](o1, om) += w;
  }
  return m;
}

double hmm_spectral(const HmmMoments& moments, const std::vector<int>& obs_sequence) {
  Mat cooc_pinv = pinv(moments.cooc);
  Vec theta = cooc_pinv.transpose() * moments.obs_marginal;
  for (auto it = obs_sequence.rbegin(); it != obs_sequence.rend(); ++it) {
    if (*it < 0 || *it >= static_cast<int>(moments.triple.size()))
      throw ArgumentError("hmm_spectral: observation out of range");
    theta = cooc_pinv.transpose() * (moments.triple[*it].transpose() * theta);
  }
  return theta.dot(moments.obs_marginal);
}

}  // namespace pomdp_ope
