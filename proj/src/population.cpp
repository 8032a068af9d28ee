#include "pomdp_ope/population.hpp"

#include "pomdp_ope/exact.hpp"

namespace pomdp_ope {

namespace {

/// Depth-first enumeration of (o_t, a_t, ..., o_{t+MF}) with behavior
/// probabilities. Emits one PathRecord per realization.
struct PathWalker {
  const TabularPOMDP& model;
  const MemoryPolicy& policy_b;
  const WindowSpaces& spaces;
  std::vector<PopulationTables::PathRecord>& out;

  int m_f;
  // scratch for the record being built
  PopulationTables::PathRecord rec;

  void start(std::int64_t z, int s) {
    int no = model.n_obs, na = model.n_actions;
    for (int o = 0; o < no; ++o) {
      double po = model.emit(s, o);
      if (po <= 0.0) continue;
      for (int a = 0; a < na; ++a) {
        double pb = policy_b.prob(z, o, a);
        if (pb <= 0.0) continue;  // mu with pi_e > 0 checked by the caller
        rec.o = o;
        rec.a = a;
        rec.r = model.rew(s, a);
        rec.z_next = spaces.z.shift(z, o, a);
        // f digits begin with o (chronological order); a joins only for MF >= 2.
        std::int64_t fd = o;
        if (m_f >= 2) fd = fd * na + a;
        descend(rec.z_next, s, a, 1, po * pb, fd, 0);
      }
    }
  }

  // depth k in [1, MF]: sample s_k, o_k (and a_k when k <= MF - 1).
  void descend(std::int64_t z, int s_prev, int a_prev, int k, double prob,
               std::int64_t fd, std::int64_t fnd) {
    int ns = model.n_states, no = model.n_obs, na = model.n_actions;
    for (int s = 0; s < ns; ++s) {
      double pt = model.trans(s_prev, a_prev, s);
      if (pt <= 0.0) continue;
      for (int o = 0; o < no; ++o) {
        double po = model.emit(s, o);
        if (po <= 0.0) continue;
        double p2 = prob * pt * po;
        // o_k enters f for k <= MF-1 and f' always.
        std::int64_t fd2 = k <= m_f - 1 ? fd * no + o : fd;
        std::int64_t fnd2 = fnd * no + o;
        if (k == m_f) {
          rec.f_idx = fd2;
          rec.f_next_idx = fnd2;
          rec.prob_b = p2;
          out.push_back(rec);
          continue;
        }
        for (int a = 0; a < na; ++a) {
          double pa = policy_b.prob(z, o, a);
          if (pa <= 0.0) continue;
          // a_k enters f for k <= MF-2 and f' for k <= MF-1.
          std::int64_t fd3 = k <= m_f - 2 ? fd2 * na + a : fd2;
          std::int64_t fnd3 = k <= m_f - 1 ? fnd2 * na + a : fnd2;
          descend(spaces.z.shift(z, o, a), s, a, k + 1, p2 * pa, fd3, fnd3);
        }
      }
    }
  }
};

}  // namespace

PopulationTables build_population_tables(const TabularPOMDP& model,
                                         const MemoryPolicy& policy_b,
                                         const MemoryPolicy& policy_e,
                                         const WindowConfig& config,
                                         const Vec& nu_zs) {
  model.validate();
  config.validate();
  policy_b.validate_for(model.n_obs, model.n_actions);
  policy_e.validate_for(model.n_obs, model.n_actions);
  if (policy_b.memory() != config.m || policy_e.memory() != config.m)
    throw ConfigError("policy memory does not match window config");

  PopulationTables t;
  t.spaces = WindowSpaces(model.n_states, model.n_obs, model.n_actions, config);
  t.stationary_hs = behavior_stationary_distribution(model, policy_b, config.m_h);
  t.pb_h = window_marginal(t.stationary_hs, model.n_states);
  t.pb_zs = zs_marginal(t.stationary_hs, t.spaces.h, config.m, model.n_states);
  t.nu_zs = nu_zs.size() == 0 ? t.pb_zs : nu_zs;
  if (t.nu_zs.size() != t.spaces.sbar_size())
    throw ArgumentError("nu_zs has wrong size for the (z, s) space");
  t.future_table = future_probabilities(model, policy_b, t.spaces);

  // Overlap and mu_max over the positive-mass (z, s, o, a) cells.
  int ns = model.n_states;
  for (std::int64_t z = 0; z < t.spaces.z.size(); ++z) {
    for (int s = 0; s < ns; ++s) {
      if (t.pb_zs(z * ns + s) <= 0.0) continue;
      for (int o = 0; o < model.n_obs; ++o) {
        if (model.emit(s, o) <= 0.0) continue;
        for (int a = 0; a < model.n_actions; ++a) {
          double pe = policy_e.prob(z, o, a);
          double pb = policy_b.prob(z, o, a);
          if (pb <= 0.0 && pe > 0.0)
            throw OverlapError("population tables: pi_e > 0 where pi_b = 0");
          if (pb > 0.0) t.mu_max = std::max(t.mu_max, pe / pb);
        }
      }
    }
  }

  std::int64_t n_zs = t.spaces.sbar_size();
  t.paths.resize(n_zs);
  double budget_guess = static_cast<double>(n_zs) * model.n_obs * model.n_actions;
  for (int k = 1; k < config.m_f; ++k)
    budget_guess *= static_cast<double>(ns) * model.n_obs * model.n_actions;
  budget_guess *= static_cast<double>(ns) * model.n_obs;
  if (budget_guess > static_cast<double>(kEnumerationCapacity))
    throw CapacityError("population path enumeration needs about " +
                        std::to_string(budget_guess) + " records");

  for (std::int64_t z = 0; z < t.spaces.z.size(); ++z) {
    for (int s = 0; s < ns; ++s) {
      PathWalker w{model, policy_b, t.spaces, t.paths[z * ns + s], config.m_f, {}};
      w.start(z, s);
      // Attach the step-t importance ratios.
      for (auto& rec : t.paths[z * ns + s])
        rec.mu = policy_e.prob(z, rec.o, rec.a) / policy_b.prob(z, rec.o, rec.a);
    }
  }
  return t;
}

}  // namespace pomdp_ope
