#include "pomdp_ope/dataset.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "pomdp_ope/exact.hpp"
#include "pomdp_ope/rng.hpp"
#include "pomdp_ope/simulate.hpp"

namespace pomdp_ope {

namespace {

PairWindow suffix_pairs(const PairWindow& w, int m) {
  return PairWindow(w.end() - m, w.end());
}

PairWindow shifted(const PairWindow& z, int o, int a) {
  PairWindow out = z;
  if (out.empty()) return out;
  out.erase(out.begin());
  out.emplace_back(o, a);
  return out;
}

/// Builds the full tuple from the stored fields (h, o, a, r, f_next).
TransitionTuple derive_tuple(PairWindow h, int o, int a, double r, Future f_next,
                             const WindowConfig& cfg) {
  TransitionTuple t;
  t.h = std::move(h);
  t.o = o;
  t.a = a;
  t.r = r;
  t.f_next = std::move(f_next);
  t.z = suffix_pairs(t.h, cfg.m);
  t.z_next = shifted(t.z, o, a);
  t.f.obs.assign(1, o);
  t.f.obs.insert(t.f.obs.end(), t.f_next.obs.begin(), t.f_next.obs.end() - 1);
  t.f.acts.clear();
  if (cfg.m_f >= 2) {
    t.f.acts.push_back(a);
    t.f.acts.insert(t.f.acts.end(), t.f_next.acts.begin(), t.f_next.acts.end() - 1);
  }
  t.check_shape(cfg);
  return t;
}

/// Cumulative distribution for O(log n) sampling of (window, state) pairs.
struct CdfSampler {
  std::vector<double> cdf;

  explicit CdfSampler(const Vec& p) {
    cdf.resize(p.size());
    double acc = 0.0;
    for (int i = 0; i < p.size(); ++i) {
      acc += std::max(p(i), 0.0);
      cdf[i] = acc;
    }
    if (acc <= 0.0) throw NumericError("CdfSampler: zero total mass");
    for (auto& c : cdf) c /= acc;
    cdf.back() = 1.0;
  }

  std::int64_t draw(Rng& rng) const {
    double u = rng.uniform();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<std::int64_t>(it - cdf.begin());
  }
};

nlohmann::json pairs_json(const PairWindow& w) {
  auto out = nlohmann::json::array();
  for (const auto& [o, a] : w) out.push_back({o, a});
  return out;
}

PairWindow pairs_from_json(const nlohmann::json& j) {
  PairWindow w;
  for (const auto& e : j) w.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return w;
}

nlohmann::json future_json(const Future& f) {
  return {{"obs", f.obs}, {"acts", f.acts}};
}

Future future_from_json(const nlohmann::json& j) {
  Future f;
  f.obs = j.at("obs").get<std::vector<int>>();
  f.acts = j.at("acts").get<std::vector<int>>();
  return f;
}

}  // namespace

void TransitionTuple::check_shape(const WindowConfig& cfg) const {
  bool ok = static_cast<int>(h.size()) == cfg.m_h &&
            static_cast<int>(z.size()) == cfg.m &&
            static_cast<int>(z_next.size()) == cfg.m &&
            static_cast<int>(f.obs.size()) == cfg.m_f &&
            static_cast<int>(f.acts.size()) == cfg.m_f - 1 &&
            static_cast<int>(f_next.obs.size()) == cfg.m_f &&
            static_cast<int>(f_next.acts.size()) == cfg.m_f - 1;
  if (!ok) throw ArgumentError("TransitionTuple: window shapes inconsistent with config");
  if (f.obs[0] != o) throw ArgumentError("TransitionTuple: f must start at o");
  for (int i = 0; i < cfg.m; ++i)
    if (z[i] != h[cfg.m_h - cfg.m + i])
      throw ArgumentError("TransitionTuple: z is not the suffix of h");
}

OfflineDataset generate_offline_dataset(const TabularPOMDP& model,
                                        const MemoryPolicy& policy_b, std::int64_t n,
                                        std::int64_t n_init, const WindowConfig& config,
                                        DatasetMode mode, std::uint64_t seed,
                                        const Vec& nu_zs) {
  model.validate();
  config.validate();
  policy_b.validate_for(model.n_obs, model.n_actions);
  if (policy_b.memory() != config.m)
    throw ConfigError("behavior policy memory does not match window config");
  if (n < 0 || n_init < 0) throw ArgumentError("dataset sizes must be >= 0");
  WindowSpaces spaces(model.n_states, model.n_obs, model.n_actions, config);

  OfflineDataset ds;
  ds.config = config;
  ds.provenance.seed = seed;
  ds.provenance.mode = mode;
  ds.provenance.nu_realization = nu_zs.size() == 0 ? "behavior-stationary" : "explicit-table";

  Vec stat_ws = behavior_stationary_distribution(model, policy_b, config.m_h);
  CdfSampler ws_sampler(stat_ws);
  Vec nu = nu_zs;
  if (nu.size() == 0) nu = zs_marginal(stat_ws, spaces.h, config.m, model.n_states);
  if (nu.size() != spaces.sbar_size())
    throw ArgumentError("nu_zs has wrong size for the (z, s) space");
  CdfSampler nu_sampler(nu);

  int ns = model.n_states;
  auto sample_obs = [&](Rng& rng, int s) { return rng.categorical_row(model.emission, s); };
  auto sample_next = [&](Rng& rng, int s, int a) {
    return rng.categorical_row(model.transition, s * model.n_actions + a);
  };

  if (mode == DatasetMode::IidPerTuple) {
    ds.tuples.reserve(n);
    for (std::int64_t i = 0; i < n; ++i) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      std::int64_t ws = ws_sampler.draw(rng);
      std::int64_t w_idx = ws / ns;
      int s0 = static_cast<int>(ws % ns);
      PairWindow h = spaces.h.decode(w_idx);
      std::int64_t z_idx = spaces.z_of_h(w_idx);
      std::vector<int> obs, acts;
      int s = s0;
      for (int k = 0; k < config.m_f; ++k) {
        int o = sample_obs(rng, s);
        int a = policy_b.sample(rng, z_idx, o);
        obs.push_back(o);
        acts.push_back(a);
        z_idx = spaces.z.shift(z_idx, o, a);
        s = sample_next(rng, s, a);
      }
      obs.push_back(sample_obs(rng, s));
      Future f_next;
      f_next.obs.assign(obs.begin() + 1, obs.end());
      f_next.acts.assign(acts.begin() + 1, acts.end());
      double r = model.rew(s0, acts[0]);
      ds.tuples.push_back(derive_tuple(std::move(h), obs[0], acts[0], r,
                                       std::move(f_next), config));
    }
  } else {
    // One stationary-started trajectory, overlapping windows.
    TabularSimulator sim(model, policy_b, config.m_h, derive_seed(seed, 0));
    std::int64_t ws = ws_sampler.draw(sim.rng());
    sim.restart(ws / ns, static_cast<int>(ws % ns));
    std::int64_t steps = n + config.m_f;
    std::vector<std::int64_t> w_hist;
    std::vector<int> obs, acts;
    std::vector<double> rewards;
    w_hist.reserve(steps);
    for (std::int64_t t = 0; t < steps; ++t) {
      w_hist.push_back(sim.window_index());
      auto st = sim.step();
      obs.push_back(st.o);
      acts.push_back(st.a);
      rewards.push_back(st.r);
    }
    ds.tuples.reserve(n);
    for (std::int64_t t = 0; t < n; ++t) {
      Future f_next;
      f_next.obs.assign(obs.begin() + t + 1, obs.begin() + t + 1 + config.m_f);
      f_next.acts.assign(acts.begin() + t + 1, acts.begin() + t + config.m_f);
      ds.tuples.push_back(derive_tuple(spaces.h.decode(w_hist[t]), obs[t], acts[t],
                                       rewards[t], std::move(f_next), config));
    }
  }

  ds.initial_samples.reserve(n_init);
  for (std::int64_t i = 0; i < n_init; ++i) {
    Rng rng(derive_seed(seed ^ 0x5151515151515151ULL, static_cast<std::uint64_t>(i)));
    std::int64_t zs = nu_sampler.draw(rng);
    std::int64_t z_idx = zs / ns;
    int s = static_cast<int>(zs % ns);
    InitialSample rec;
    rec.z = spaces.z.decode(z_idx);
    std::int64_t z_cur = z_idx;
    for (int k = 0; k < config.m_f; ++k) {
      int o = sample_obs(rng, s);
      rec.f.obs.push_back(o);
      if (k + 1 == config.m_f) break;
      int a = policy_b.sample(rng, z_cur, o);
      rec.f.acts.push_back(a);
      z_cur = spaces.z.shift(z_cur, o, a);
      s = sample_next(rng, s, a);
    }
    ds.initial_samples.push_back(std::move(rec));
  }
  return ds;
}

void save_dataset(const OfflineDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write dataset file: " + path);
  nlohmann::json header;
  header["type"] = "pomdp-ope-dataset";
  header["spec_version"] = 1;
  header["config"] = {{"m", ds.config.m}, {"m_h", ds.config.m_h}, {"m_f", ds.config.m_f}};
  header["provenance"] = {
      {"seed", ds.provenance.seed},
      {"mode", ds.provenance.mode == DatasetMode::IidPerTuple ? "iid-per-tuple"
                                                              : "sliced-trajectory"},
      {"nu", ds.provenance.nu_realization}};
  header["n"] = ds.tuples.size();
  header["n_init"] = ds.initial_samples.size();
  out << header.dump() << "\n";
  for (const auto& t : ds.tuples) {
    nlohmann::json j;
    j["kind"] = "tuple";
    j["h"] = pairs_json(t.h);
    j["o"] = t.o;
    j["a"] = t.a;
    j["r"] = t.r;
    j["f_next"] = future_json(t.f_next);
    out << j.dump() << "\n";
  }
  for (const auto& s : ds.initial_samples) {
    nlohmann::json j;
    j["kind"] = "init";
    j["z"] = pairs_json(s.z);
    j["f"] = future_json(s.f);
    out << j.dump() << "\n";
  }
}

OfflineDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset file is empty: " + path);

  OfflineDataset ds;
  std::size_t expect_n = 0, expect_init = 0;
  try {
    auto header = nlohmann::json::parse(line);
    if (header.value("type", "") != "pomdp-ope-dataset")
      throw FormatError("not a dataset file: " + path);
    ds.config.m = header.at("config").at("m").get<int>();
    ds.config.m_h = header.at("config").at("m_h").get<int>();
    ds.config.m_f = header.at("config").at("m_f").get<int>();
    ds.config.validate();
    ds.provenance.seed = header.at("provenance").at("seed").get<std::uint64_t>();
    ds.provenance.mode = header.at("provenance").at("mode").get<std::string>() ==
                                 "iid-per-tuple"
                             ? DatasetMode::IidPerTuple
                             : DatasetMode::SlicedTrajectory;
    ds.provenance.nu_realization = header.at("provenance").at("nu").get<std::string>();
    expect_n = header.at("n").get<std::size_t>();
    expect_init = header.at("n_init").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset header error: ") + e.what());
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::string kind = j.at("kind").get<std::string>();
      if (kind == "tuple") {
        ds.tuples.push_back(derive_tuple(pairs_from_json(j.at("h")), j.at("o").get<int>(),
                                         j.at("a").get<int>(), j.at("r").get<double>(),
                                         future_from_json(j.at("f_next")), ds.config));
      } else if (kind == "init") {
        InitialSample s;
        s.z = pairs_from_json(j.at("z"));
        s.f = future_from_json(j.at("f"));
        if (static_cast<int>(s.z.size()) != ds.config.m ||
            static_cast<int>(s.f.obs.size()) != ds.config.m_f ||
            static_cast<int>(s.f.acts.size()) != ds.config.m_f - 1)
          throw FormatError("initial sample shape mismatch");
        ds.initial_samples.push_back(std::move(s));
      } else {
        throw FormatError("unknown record kind: " + kind);
      }
    } catch (const std::exception& e) {
      throw FormatError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (ds.tuples.size() != expect_n || ds.initial_samples.size() != expect_init)
    throw FormatError("dataset record counts do not match header (line count " +
                      std::to_string(line_no) + ")");
  return ds;
}

double tuple_importance_ratio(const MemoryPolicy& policy_e, const MemoryPolicy& policy_b,
                              const TransitionTuple& t, const PairWindowCodec& z_codec) {
  return importance_ratio(policy_e, policy_b, z_codec.encode(t.z), t.o, t.a);
}

}  // namespace pomdp_ope
