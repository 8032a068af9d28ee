#include "pomdp_ope/exact.hpp"

#include <cmath>

#include "pomdp_ope/linalg.hpp"

namespace pomdp_ope {

namespace {

constexpr double kSupportTol = 1e-12;

void check_distribution(const Vec& d, std::int64_t expected, const char* what) {
  if (d.size() != expected)
    throw ArgumentError(std::string(what) + ": distribution has size " +
                        std::to_string(d.size()) + ", expected " +
                        std::to_string(expected));
  if (d.minCoeff() < -1e-12 || std::abs(d.sum() - 1.0) > 1e-10)
    throw ArgumentError(std::string(what) + ": not a probability vector");
}

/// Applies one step of the augmented (window, state) chain: out = in * P.
void apply_chain(const TabularPOMDP& model, const MemoryPolicy& policy,
                 const PairWindowCodec& w_codec, const Vec& in, Vec& out) {
  int ns = model.n_states, no = model.n_obs, na = model.n_actions;
  int m = policy.memory();
  out.setZero();
  for (std::int64_t w = 0; w < w_codec.size(); ++w) {
    std::int64_t z = w_codec.suffix(w, m);
    for (int s = 0; s < ns; ++s) {
      double mass = in(w * ns + s);
      if (mass <= 0.0) continue;
      for (int o = 0; o < no; ++o) {
        double pe = model.emit(s, o);
        if (pe <= 0.0) continue;
        for (int a = 0; a < na; ++a) {
          double pa = policy.prob(z, o, a);
          if (pa <= 0.0) continue;
          std::int64_t w2 = w_codec.shift(w, o, a);
          double base = mass * pe * pa;
          for (int s2 = 0; s2 < ns; ++s2) {
            double pt = model.trans(s, a, s2);
            if (pt > 0.0) out(w2 * ns + s2) += base * pt;
          }
        }
      }
    }
  }
}

/// Dense transition matrix of the (z, s) chain under a policy, with
/// P(i, j) = Pr(next = j | current = i).
Mat zs_chain_matrix(const TabularPOMDP& model, const MemoryPolicy& policy,
                    const PairWindowCodec& z_codec) {
  int ns = model.n_states, no = model.n_obs, na = model.n_actions;
  std::int64_t n = z_codec.size() * ns;
  if (n > 100000) throw CapacityError("(z, s) space too large for a dense solve: " +
                                      std::to_string(n));
  Mat p = Mat::Zero(n, n);
  for (std::int64_t z = 0; z < z_codec.size(); ++z) {
    for (int s = 0; s < ns; ++s) {
      std::int64_t row = z * ns + s;
      for (int o = 0; o < no; ++o) {
        double pe = model.emit(s, o);
        if (pe <= 0.0) continue;
        for (int a = 0; a < na; ++a) {
          double pa = policy.prob(z, o, a);
          if (pa <= 0.0) continue;
          std::int64_t z2 = z_codec.shift(z, o, a);
          for (int s2 = 0; s2 < ns; ++s2)
            p(row, z2 * ns + s2) += pe * pa * model.trans(s, a, s2);
        }
      }
    }
  }
  return p;
}

/// Expected one-step reward under the policy on the (z, s) space.
Vec zs_reward(const TabularPOMDP& model, const MemoryPolicy& policy,
              const PairWindowCodec& z_codec) {
  int ns = model.n_states, no = model.n_obs, na = model.n_actions;
  Vec r = Vec::Zero(z_codec.size() * ns);
  for (std::int64_t z = 0; z < z_codec.size(); ++z)
    for (int s = 0; s < ns; ++s) {
      double v = 0.0;
      for (int o = 0; o < no; ++o)
        for (int a = 0; a < na; ++a)
          v += model.emit(s, o) * policy.prob(z, o, a) * model.rew(s, a);
      r(z * ns + s) = v;
    }
  return r;
}

Vec resolve_init_s(const TabularPOMDP& model, const Vec& init_s) {
  if (init_s.size() == 0) return model.initial_state_dist;
  check_distribution(init_s, model.n_states, "init_s");
  return init_s;
}

}  // namespace

Vec behavior_stationary_distribution(const TabularPOMDP& model, const MemoryPolicy& policy,
                                     int window_len, double residual_tol, int max_iters) {
  model.validate();
  policy.validate_for(model.n_obs, model.n_actions);
  if (window_len < policy.memory())
    throw ConfigError("stationary window must cover the policy memory");
  PairWindowCodec w_codec(model.n_obs, model.n_actions, window_len);
  std::int64_t n = w_codec.size() * model.n_states;
  if (n > kEnumerationCapacity)
    throw CapacityError("stationary chain needs " + std::to_string(n) + " cells");

  Vec pi = Vec::Constant(n, 1.0 / static_cast<double>(n));
  Vec next(n);
  double residual = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    apply_chain(model, policy, w_codec, pi, next);
    residual = (next - pi).lpNorm<1>();
    if (residual <= residual_tol) return next / next.sum();
    // Lazy step keeps periodic chains convergent.
    pi = 0.5 * (pi + next);
    pi /= pi.sum();
  }
  throw NumericError("stationary distribution did not converge; residual " +
                     std::to_string(residual));
}

Vec zs_marginal(const Vec& stat_ws, const PairWindowCodec& w_codec, int m, int n_states) {
  // (OA)^m, recovered as suffix(max index) + 1.
  std::int64_t z_size = w_codec.suffix(w_codec.size() - 1, m) + 1;
  Vec out = Vec::Zero(z_size * n_states);
  for (std::int64_t w = 0; w < w_codec.size(); ++w) {
    std::int64_t z = w_codec.suffix(w, m);
    for (int s = 0; s < n_states; ++s) out(z * n_states + s) += stat_ws(w * n_states + s);
  }
  return out;
}

Vec state_marginal(const Vec& stat_ws, int n_states) {
  Vec out = Vec::Zero(n_states);
  std::int64_t rows = stat_ws.size() / n_states;
  for (std::int64_t w = 0; w < rows; ++w)
    for (int s = 0; s < n_states; ++s) out(s) += stat_ws(w * n_states + s);
  return out;
}

Vec window_marginal(const Vec& stat_ws, int n_states) {
  std::int64_t rows = stat_ws.size() / n_states;
  Vec out = Vec::Zero(rows);
  for (std::int64_t w = 0; w < rows; ++w)
    for (int s = 0; s < n_states; ++s) out(w) += stat_ws(w * n_states + s);
  return out;
}

Vec exact_value_function(const TabularPOMDP& model, const MemoryPolicy& policy_e) {
  model.validate();
  policy_e.validate_for(model.n_obs, model.n_actions);
  PairWindowCodec z_codec(model.n_obs, model.n_actions, policy_e.memory());
  Mat p = zs_chain_matrix(model, policy_e, z_codec);
  Vec r = zs_reward(model, policy_e, z_codec);
  Mat a = Mat::Identity(p.rows(), p.cols()) - model.gamma * p;
  return solve_checked(a, r);
}

double exact_policy_value(const TabularPOMDP& model, const MemoryPolicy& policy_e,
                          const Vec& init_zs) {
  Vec v = exact_value_function(model, policy_e);
  check_distribution(init_zs, v.size(), "init_zs");
  return init_zs.dot(v);
}

double exact_finite_horizon_value(const TabularPOMDP& model, const MemoryPolicy& policy_e,
                                  const Vec& init_zs, int horizon) {
  if (horizon < 1) throw ArgumentError("exact_finite_horizon_value: T must be >= 1");
  model.validate();
  policy_e.validate_for(model.n_obs, model.n_actions);
  PairWindowCodec z_codec(model.n_obs, model.n_actions, policy_e.memory());
  Mat p = zs_chain_matrix(model, policy_e, z_codec);
  Vec r = zs_reward(model, policy_e, z_codec);
  check_distribution(init_zs, r.size(), "init_zs");
  Vec v = Vec::Zero(r.size());
  for (int t = horizon - 1; t >= 0; --t) v = r + model.gamma * (p * v);
  return init_zs.dot(v);
}

Vec discounted_occupancy(const TabularPOMDP& model, const MemoryPolicy& policy_e,
                         const Vec& init_zs) {
  model.validate();
  policy_e.validate_for(model.n_obs, model.n_actions);
  PairWindowCodec z_codec(model.n_obs, model.n_actions, policy_e.memory());
  Mat p = zs_chain_matrix(model, policy_e, z_codec);
  check_distribution(init_zs, p.rows(), "init_zs");
  Mat a = Mat::Identity(p.rows(), p.cols()) - model.gamma * p.transpose();
  Vec d = solve_checked(a, Vec((1.0 - model.gamma) * init_zs));
  // Roundoff can leave tiny negatives.
  for (int i = 0; i < d.size(); ++i)
    if (d(i) < 0.0 && d(i) > -1e-12) d(i) = 0.0;
  return d;
}

double joint_sequence_probability(const TabularPOMDP& model, const MemoryPolicy& policy_e,
                                  const std::vector<std::pair<int, int>>& sequence,
                                  const Vec& init_s) {
  model.validate();
  if (policy_e.memory() != 0)
    throw ArgumentError("joint_sequence_probability requires a memory-less policy");
  policy_e.validate_for(model.n_obs, model.n_actions);
  Vec alpha = resolve_init_s(model, init_s);
  for (const auto& [o, a] : sequence) {
    if (o < 0 || o >= model.n_obs || a < 0 || a >= model.n_actions)
      throw ArgumentError("sequence symbol out of range");
    Vec next = Vec::Zero(model.n_states);
    for (int s = 0; s < model.n_states; ++s) {
      double w = alpha(s) * model.emit(s, o) * policy_e.prob(0, o, a);
      if (w <= 0.0) continue;
      for (int s2 = 0; s2 < model.n_states; ++s2) next(s2) += w * model.trans(s, a, s2);
    }
    alpha = next;
  }
  return alpha.sum();
}

Vec forward_predictive_distribution(const TabularPOMDP& model, const MemoryPolicy& policy_e,
                                    const std::vector<std::pair<int, int>>& sequence,
                                    const Vec& init_s) {
  model.validate();
  if (policy_e.memory() != 0)
    throw ArgumentError("forward_predictive_distribution requires a memory-less policy");
  Vec alpha = resolve_init_s(model, init_s);
  for (const auto& [o, a] : sequence) {
    Vec next = Vec::Zero(model.n_states);
    for (int s = 0; s < model.n_states; ++s) {
      double w = alpha(s) * model.emit(s, o) * policy_e.prob(0, o, a);
      if (w <= 0.0) continue;
      for (int s2 = 0; s2 < model.n_states; ++s2) next(s2) += w * model.trans(s, a, s2);
    }
    alpha = next;
  }
  double total = alpha.sum();
  if (total <= 0.0)
    throw DegenerateEstimateError("prefix has zero probability under the policy");
  Vec out = Vec::Zero(model.n_obs);
  for (int s = 0; s < model.n_states; ++s)
    for (int o = 0; o < model.n_obs; ++o) out(o) += alpha(s) * model.emit(s, o);
  return out / total;
}

Mat future_probabilities(const TabularPOMDP& model, const MemoryPolicy& policy_b,
                         const WindowSpaces& spaces) {
  if (policy_b.memory() != spaces.config.m)
    throw ConfigError("policy memory does not match window config");
  int ns = model.n_states;
  const auto& fc = spaces.f;
  const auto& zc = spaces.z;
  std::int64_t cols = zc.size() * ns;
  if (fc.size() > kEnumerationCapacity / std::max<std::int64_t>(cols, 1))
    throw CapacityError("future probability table needs " +
                        std::to_string(fc.size() * cols) + " cells");
  Mat table = Mat::Zero(fc.size(), cols);

  // Depth-first over future realizations; fills one (z, s) column per call.
  struct Walker {
    const TabularPOMDP& model;
    const MemoryPolicy& policy;
    const WindowSpaces& spaces;
    Mat& table;
    std::int64_t col;
    Future f;

    void walk(std::int64_t z, int s, int depth, double prob, std::int64_t f_digits) {
      int no = model.n_obs, na = model.n_actions, ns = model.n_states;
      int m_f = spaces.config.m_f;
      for (int o = 0; o < no; ++o) {
        double po = prob * model.emit(s, o);
        if (po <= 0.0) continue;
        std::int64_t digits_o = f_digits * no + o;
        if (depth == m_f - 1) {
          table(digits_o, col) += po;
          continue;
        }
        for (int a = 0; a < na; ++a) {
          double pa = po * policy.prob(z, o, a);
          if (pa <= 0.0) continue;
          std::int64_t digits_oa = digits_o * na + a;
          std::int64_t z2 = spaces.z.shift(z, o, a);
          for (int s2 = 0; s2 < ns; ++s2) {
            double pt = pa * model.trans(s, a, s2);
            if (pt > 0.0) walk(z2, s2, depth + 1, pt, digits_oa);
          }
        }
      }
    }
  };

  for (std::int64_t z = 0; z < zc.size(); ++z)
    for (int s = 0; s < ns; ++s) {
      Walker w{model, policy_b, spaces, table, z * ns + s, Future{}};
      w.walk(z, s, 0, 1.0, 0);
    }
  return table;
}

OccupancyTables occupancy_tables(const TabularPOMDP& model, const MemoryPolicy& policy_b,
                                 const MemoryPolicy& policy_e, const WindowConfig& config,
                                 const Vec& nu_zs) {
  config.validate();
  if (policy_b.memory() != config.m || policy_e.memory() != config.m)
    throw ConfigError("policy memory does not match window config");
  OccupancyTables out;
  out.stationary_pb = behavior_stationary_distribution(model, policy_b, config.m_h);
  PairWindowCodec h_codec(model.n_obs, model.n_actions, config.m_h);
  Vec nu = nu_zs;
  if (nu.size() == 0) nu = zs_marginal(out.stationary_pb, h_codec, config.m, model.n_states);
  out.d_pie = discounted_occupancy(model, policy_e, nu);
  Vec pb_zs = zs_marginal(out.stationary_pb, h_codec, config.m, model.n_states);
  for (std::int64_t i = 0; i < pb_zs.size(); ++i)
    if (pb_zs(i) > kSupportTol) out.support_sbar.push_back(i);
  return out;
}

}  // namespace pomdp_ope
