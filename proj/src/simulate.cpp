#include "pomdp_ope/simulate.hpp"

#include <Eigen/Cholesky>

namespace pomdp_ope {

TabularSimulator::TabularSimulator(const TabularPOMDP& model, const MemoryPolicy& policy,
                                   int window_len, std::uint64_t seed)
    : model_(&model), policy_(&policy), rng_(seed) {
  policy.validate_for(model.n_obs, model.n_actions);
  if (window_len < policy.memory())
    throw ConfigError("simulator window shorter than policy memory");
  w_codec_ = PairWindowCodec(model.n_obs, model.n_actions, window_len);
  w_idx_ = 0;  // zero-padded window
  Vec init = model.initial_state_dist;
  s_ = rng_.categorical(init);
}

TabularSimulator::Step TabularSimulator::step() {
  int o = rng_.categorical_row(model_->emission, s_);
  std::int64_t z_idx = memory_index();
  int a = policy_->sample(rng_, z_idx, o);
  double r = model_->rew(s_, a);
  int s_next = rng_.categorical_row(model_->transition, s_ * model_->n_actions + a);
  Step out{s_, o, a, r};
  w_idx_ = w_codec_.shift(w_idx_, o, a);
  s_ = s_next;
  return out;
}

void TabularSimulator::burn(int steps) {
  for (int i = 0; i < steps; ++i) step();
}

Trajectory sample_trajectory(const TabularPOMDP& model, const MemoryPolicy& policy,
                             int length, std::uint64_t seed, int burn_in) {
  if (length < 1) throw ArgumentError("sample_trajectory: length must be >= 1");
  model.validate();
  // Window covers at least the policy memory; burn-in populates it.
  TabularSimulator sim(model, policy, policy.memory(), seed);
  sim.burn(burn_in);
  Trajectory out;
  out.z0 = sim.window();
  out.states.reserve(length);
  out.obs.reserve(length);
  out.actions.reserve(length);
  out.rewards.reserve(length);
  for (int t = 0; t < length; ++t) {
    auto st = sim.step();
    out.states.push_back(st.s);
    out.obs.push_back(st.o);
    out.actions.push_back(st.a);
    out.rewards.push_back(st.r);
  }
  return out;
}

namespace {

Mat cholesky_factor(const Mat& cov) {
  Eigen::LLT<Mat> llt(cov + 1e-14 * Mat::Identity(cov.rows(), cov.cols()));
  if (llt.info() != Eigen::Success)
    throw NumericError("covariance Cholesky factorization failed");
  return llt.matrixL();
}

}  // namespace

LqgTrajectory sample_trajectory(const LQGModel& model, const MemoryPolicy& policy,
                                int length, std::uint64_t seed, int burn_in) {
  if (length < 1) throw ArgumentError("sample_trajectory: length must be >= 1");
  if (policy.kind() != MemoryPolicy::Kind::LinearGain)
    throw ConfigError("LQG simulation requires a linear-gain policy");
  model.validate();
  int ds = model.state_dim(), dy = model.obs_dim(), da = model.action_dim();
  Mat ls = cholesky_factor(model.noise_cov_state);
  Mat lo = cholesky_factor(model.noise_cov_obs);
  Rng rng(seed);
  auto noise = [&](const Mat& l, int d) {
    Vec e(d);
    for (int i = 0; i < d; ++i) e(i) = rng.gaussian();
    return Vec(l * e);
  };

  int m = policy.memory();
  Vec z_flat = Vec::Zero(m * (dy + da));
  auto push_pair = [&](const Vec& o, const Vec& a) {
    if (m == 0) return;
    int pair = dy + da;
    // shift left by one pair, append (o, a)
    if (m > 1)
      z_flat.head((m - 1) * pair) = z_flat.tail((m - 1) * pair).eval();
    z_flat.segment((m - 1) * pair, dy) = o;
    z_flat.segment((m - 1) * pair + dy, da) = a;
  };

  Vec s = noise(ls, ds);
  LqgTrajectory out;
  for (int t = 0; t < burn_in + length; ++t) {
    Vec o = model.c_mat * s + noise(lo, dy);
    Vec a = policy.act(o, z_flat, &rng);
    double r = -(s.dot(model.q_cost * s)) - a.dot(model.r_cost * a);
    Vec s_next = model.a_mat * s + model.b_mat * a + noise(ls, ds);
    if (t >= burn_in) {
      out.states.push_back(s);
      out.obs.push_back(o);
      out.actions.push_back(a);
      out.rewards.push_back(r);
    }
    push_pair(o, a);
    s = s_next;
  }
  return out;
}

}  // namespace pomdp_ope
