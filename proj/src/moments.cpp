#include "pomdp_ope/moments.hpp"

namespace pomdp_ope {

namespace {

void add_outer(Mat& acc, const SparseVec& u, const SparseVec& v, double w) {
  for (const auto& [i, x] : u.entries)
    for (const auto& [j, y] : v.entries) acc(i, j) += w * x * y;
}

void add_scaled(Vec& acc, const SparseVec& u, double w) {
  for (const auto& [i, x] : u.entries) acc(i) += w * x;
}

}  // namespace

void MomentSet::check() const {
  if (m2.rows() != m1.size() || m3.rows() != m1.size() || m3.cols() != m1.size())
    throw ArgumentError("MomentSet: inconsistent dimensions");
  if (nu_mean.size() != m2.cols()) throw ArgumentError("MomentSet: nu_mean size mismatch");
  double asym = (m3 - m3.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, m3.cwiseAbs().maxCoeff()))
    throw NumericError("MomentSet: m3 not symmetric");
}

MomentSet compute_moments_empirical(const OfflineDataset& ds, const FbarFeatures& fbar,
                                    const HistFeatures& hist, const MemoryPolicy& policy_e,
                                    const MemoryPolicy& policy_b, double gamma,
                                    int n_obs, int n_actions) {
  if (ds.tuples.empty()) throw ArgumentError("compute_moments_empirical: empty D_tra");
  WindowSpaces spaces(1, n_obs, n_actions, ds.config);

  MomentSet m;
  m.source = MomentSet::Source::Empirical;
  m.gamma = gamma;
  m.n = static_cast<std::int64_t>(ds.tuples.size());
  m.m1 = Vec::Zero(hist.dim);
  m.m3 = Mat::Zero(hist.dim, hist.dim);
  m.hf = Mat::Zero(hist.dim, fbar.dim);
  m.hf_next_mu = Mat::Zero(hist.dim, fbar.dim);
  m.nu_mean = Vec::Zero(fbar.dim);

  double w = 1.0 / static_cast<double>(ds.tuples.size());
  for (const auto& t : ds.tuples) {
    std::int64_t h_idx = spaces.h.encode(t.h);
    std::int64_t z_idx = spaces.z.encode(t.z);
    std::int64_t zn_idx = spaces.z.encode(t.z_next);
    std::int64_t f_idx = spaces.f.encode(t.f);
    std::int64_t fn_idx = spaces.f.encode(t.f_next);
    double mu = importance_ratio(policy_e, policy_b, z_idx, t.o, t.a);

    SparseVec ph = hist.eval(h_idx, t.o);
    SparseVec pf = fbar.eval(z_idx, f_idx);
    SparseVec pfn = fbar.eval(zn_idx, fn_idx);

    add_scaled(m.m1, ph, w * mu * t.r);
    add_outer(m.m3, ph, ph, w);
    add_outer(m.hf, ph, pf, w);
    add_outer(m.hf_next_mu, ph, pfn, w * mu);
  }
  m.m2 = m.hf - gamma * m.hf_next_mu;

  if (!ds.initial_samples.empty()) {
    double wi = 1.0 / static_cast<double>(ds.initial_samples.size());
    for (const auto& s : ds.initial_samples) {
      SparseVec pf = fbar.eval(spaces.z.encode(s.z), spaces.f.encode(s.f));
      add_scaled(m.nu_mean, pf, wi);
    }
    m.has_nu = true;
  }
  m.check();
  return m;
}

MomentSet compute_moments_population(const PopulationTables& tables,
                                     const TabularPOMDP& model, const FbarFeatures& fbar,
                                     const HistFeatures& hist, double gamma) {
  const WindowSpaces& spaces = tables.spaces;
  int ns = model.n_states;

  MomentSet m;
  m.source = MomentSet::Source::Population;
  m.gamma = gamma;
  m.m1 = Vec::Zero(hist.dim);
  m.m3 = Mat::Zero(hist.dim, hist.dim);
  m.hf = Mat::Zero(hist.dim, fbar.dim);
  m.hf_next_mu = Mat::Zero(hist.dim, fbar.dim);
  m.nu_mean = Vec::Zero(fbar.dim);
  m.has_nu = true;

  // Feature caches: phi_H per (h, o), phi_F per flat fbar index.
  std::int64_t n_h = spaces.h.size();
  int no = model.n_obs;
  std::vector<SparseVec> h_cache(static_cast<std::size_t>(n_h) * no);
  for (std::int64_t h = 0; h < n_h; ++h)
    for (int o = 0; o < no; ++o) h_cache[h * no + o] = hist.eval(h, o);
  std::vector<SparseVec> f_cache(static_cast<std::size_t>(spaces.fbar_size()));
  for (std::int64_t z = 0; z < spaces.z.size(); ++z)
    for (std::int64_t fi = 0; fi < spaces.f.size(); ++fi)
      f_cache[spaces.fbar_index(z, fi)] = fbar.eval(z, fi);

  for (std::int64_t h = 0; h < n_h; ++h) {
    std::int64_t z = spaces.z_of_h(h);
    for (int s = 0; s < ns; ++s) {
      double p_hs = tables.stationary_hs(h * ns + s);
      if (p_hs <= 0.0) continue;
      // m3 accumulates over (h, s, o) only.
      for (int o = 0; o < no; ++o) {
        double pe = model.emit(s, o);
        if (pe <= 0.0) continue;
        const SparseVec& ph = h_cache[h * no + o];
        add_outer(m.m3, ph, ph, p_hs * pe);
      }
      for (const auto& rec : tables.paths[z * ns + s]) {
        double p = p_hs * rec.prob_b;
        const SparseVec& ph = h_cache[h * no + rec.o];
        const SparseVec& pf = f_cache[spaces.fbar_index(z, rec.f_idx)];
        const SparseVec& pfn = f_cache[spaces.fbar_index(rec.z_next, rec.f_next_idx)];
        add_scaled(m.m1, ph, p * rec.mu * rec.r);
        add_outer(m.hf, ph, pf, p);
        add_outer(m.hf_next_mu, ph, pfn, p * rec.mu);
      }
    }
  }
  m.m2 = m.hf - gamma * m.hf_next_mu;

  // nu_mean = sum_{z,s} nu(z,s) sum_f Pr(f | z, s) phi(z, f)
  for (std::int64_t z = 0; z < spaces.z.size(); ++z)
    for (int s = 0; s < ns; ++s) {
      double p = tables.nu_zs(z * ns + s);
      if (p <= 0.0) continue;
      for (std::int64_t fi = 0; fi < spaces.f.size(); ++fi) {
        double pf = tables.future_table(fi, z * ns + s);
        if (pf > 0.0) add_scaled(m.nu_mean, f_cache[spaces.fbar_index(z, fi)], p * pf);
      }
    }
  m.check();
  return m;
}

MomentSet compute_moments_population(const TabularPOMDP& model, const MemoryPolicy& policy_b,
                                     const MemoryPolicy& policy_e, const FbarFeatures& fbar,
                                     const HistFeatures& hist, const WindowConfig& config,
                                     const Vec& nu_zs) {
  PopulationTables tables = build_population_tables(model, policy_b, policy_e, config, nu_zs);
  return compute_moments_population(tables, model, fbar, hist, model.gamma);
}

MomentSet accumulate_moments(const std::vector<FeaturizedTuple>& rows,
                             const std::vector<Vec>& nu_phis, double gamma) {
  if (rows.empty()) throw ArgumentError("accumulate_moments: no rows");
  int dh = static_cast<int>(rows[0].phi_h.size());
  int df = static_cast<int>(rows[0].phi_f.size());

  MomentSet m;
  m.source = MomentSet::Source::Empirical;
  m.gamma = gamma;
  m.n = static_cast<std::int64_t>(rows.size());
  m.m1 = Vec::Zero(dh);
  m.m3 = Mat::Zero(dh, dh);
  m.hf = Mat::Zero(dh, df);
  m.hf_next_mu = Mat::Zero(dh, df);
  m.nu_mean = Vec::Zero(df);

  double w = 1.0 / static_cast<double>(rows.size());
  for (const auto& row : rows) {
    m.m1 += w * row.mu * row.r * row.phi_h;
    m.m3 += w * row.phi_h * row.phi_h.transpose();
    m.hf += w * row.phi_h * row.phi_f.transpose();
    m.hf_next_mu += (w * row.mu) * row.phi_h * row.phi_f_next.transpose();
  }
  m.m2 = m.hf - gamma * m.hf_next_mu;
  if (!nu_phis.empty()) {
    for (const auto& p : nu_phis) m.nu_mean += p;
    m.nu_mean /= static_cast<double>(nu_phis.size());
    m.has_nu = true;
  }
  m.check();
  return m;
}

}  // namespace pomdp_ope
