#include "pomdp_ope/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pomdp_ope/exact.hpp"

namespace pomdp_ope {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct ResolvedSetup {
  TabularPOMDP model;
  MemoryPolicy policy_b;
  MemoryPolicy policy_e;
  WindowConfig windows;
};

ResolvedSetup resolve(const ExperimentConfig& cfg) {
  ResolvedSetup rs;
  if (!cfg.scenario.empty()) {
    Scenario sc = make_scenario(cfg.scenario, cfg.scenario_seed);
    rs.model = sc.model;
    rs.policy_b = sc.policy_b;
    rs.policy_e = sc.policy_e;
    rs.windows = sc.windows;
    return rs;
  }
  if (!cfg.model || !cfg.policy_b || !cfg.policy_e)
    throw ConfigError("experiment config needs a scenario or explicit model + policies");
  rs.model = *cfg.model;
  rs.policy_b = *cfg.policy_b;
  rs.policy_e = *cfg.policy_e;
  rs.windows = cfg.windows;
  return rs;
}

HistFeatures pick_hist_features(const std::string& features, const TabularPOMDP& model,
                                const WindowSpaces& spaces) {
  if (features == "current-obs") return current_obs_history(model.n_obs);
  if (features == "one-hot") return one_hot_history(spaces);
  throw ConfigError("unknown feature choice: " + features);
}

ResultRow run_cell(const ResolvedSetup& rs, const EstimatorSpec& spec,
                   const OfflineDataset& ds, std::int64_t n, std::uint64_t seed,
                   double j_true_inf, const TabularPOMDP& model) {
  ResultRow row;
  row.estimator = spec.name;
  row.n = n;
  row.seed = seed;
  auto start = std::chrono::steady_clock::now();
  try {
    WindowSpaces spaces(model.n_states, model.n_obs, model.n_actions, rs.windows);
    if (spec.name == "minimax_linear" || spec.name == "finite_horizon") {
      FbarFeatures fbar = one_hot_fbar(spaces);
      HistFeatures hist = pick_hist_features(spec.features, model, spaces);
      MomentSet m = compute_moments_empirical(ds, fbar, hist, rs.policy_e, rs.policy_b,
                                              model.gamma, model.n_obs, model.n_actions);
      if (spec.name == "minimax_linear") {
        row.j_hat = minimax_linear(m, spec.cfg).j_hat;
        row.j_true = j_true_inf;
      } else {
        row.j_hat = finite_horizon_linear(m, spec.horizon).j_hat;
        Vec stat = behavior_stationary_distribution(model, rs.policy_b, rs.windows.m_h);
        Vec nu = zs_marginal(stat, spaces.h, rs.windows.m, model.n_states);
        row.j_true = exact_finite_horizon_value(model, rs.policy_e, nu, spec.horizon);
      }
    } else if (spec.name == "minimax_rkhs") {
      if (n > 2000) throw CapacityError("minimax_rkhs limited to n <= 2000 in sweeps");
      row.j_hat = minimax_rkhs(ds, rs.policy_e, rs.policy_b, one_hot_fbar_embed(spaces),
                               one_hot_history_embed(spaces), linear_kernel(),
                               linear_kernel(), model.gamma, spec.cfg, model.n_obs,
                               model.n_actions)
                      .j_hat;
      row.j_true = j_true_inf;
    } else if (spec.name == "sis") {
      auto trajs = sample_stationary_trajectories(model, rs.policy_b, n, spec.horizon_cap,
                                                  derive_seed(seed, 0xF00D));
      row.j_hat = sis_estimate(trajs, rs.policy_e, rs.policy_b, model.gamma,
                               spec.horizon_cap)
                      .j_hat;
      row.j_true = j_true_inf;
    } else {
      throw ConfigError("unknown estimator: " + spec.name);
    }
    row.abs_error = std::abs(row.j_hat - row.j_true);
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
  auto end = std::chrono::steady_clock::now();
  row.runtime_ms = std::chrono::duration<double, std::milli>(end - start).count();
  return row;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (estimators.empty()) throw ConfigError("config needs at least one estimator");
  if (n_grid.empty()) throw ConfigError("config needs a non-empty n grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw ConfigError("n grid must be strictly increasing");
  if (seeds.empty()) throw ConfigError("config needs at least one seed");
  windows.validate();
  for (const auto& e : estimators) e.cfg.validate();
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config JSON parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.spec_version = j.value("spec_version", 1);
    if (cfg.spec_version != 1)
      throw ConfigError("unsupported spec_version " + std::to_string(cfg.spec_version));
    cfg.scenario = j.value("scenario", std::string());
    cfg.scenario_seed = j.value("scenario_seed", 1ULL);
    if (j.contains("model")) {
      cfg.model = TabularPOMDP::from_json_string(j.at("model").dump());
    } else if (j.contains("model_path")) {
      std::string path = j.at("model_path").get<std::string>();
      if (!std::filesystem::exists(path))
        throw ConfigError("model_path does not exist: " + path);
      cfg.model = TabularPOMDP::load_file(path);
    }
    if (j.contains("behavior_policy"))
      cfg.policy_b = MemoryPolicy::from_json_string(j.at("behavior_policy").dump());
    if (j.contains("evaluation_policy"))
      cfg.policy_e = MemoryPolicy::from_json_string(j.at("evaluation_policy").dump());
    if (j.contains("windows")) {
      cfg.windows.m = j.at("windows").value("m", 0);
      cfg.windows.m_h = j.at("windows").value("m_h", 1);
      cfg.windows.m_f = j.at("windows").value("m_f", 1);
    }
    for (const auto& e : j.value("estimators", nlohmann::json::array())) {
      EstimatorSpec spec;
      spec.name = e.at("name").get<std::string>();
      spec.cfg.lambda = e.value("lambda", 0.0);
      spec.cfg.alpha = e.value("alpha", 0.0);
      spec.cfg.alpha_prime = e.value("alpha_prime", 0.0);
      spec.horizon = e.value("horizon", 5);
      spec.horizon_cap = e.value("horizon_cap", 100);
      spec.features = e.value("features", std::string("one-hot"));
      cfg.estimators.push_back(std::move(spec));
    }
    cfg.n_grid = j.value("n_grid", std::vector<std::int64_t>{});
    cfg.n_init = j.value("n_init", 1000LL);
    cfg.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    std::string mode = j.value("mode", std::string("iid-per-tuple"));
    if (mode == "iid-per-tuple")
      cfg.mode = DatasetMode::IidPerTuple;
    else if (mode == "sliced-trajectory")
      cfg.mode = DatasetMode::SlicedTrajectory;
    else
      throw ConfigError("unknown dataset mode: " + mode);
    cfg.output_dir = j.value("output_dir", std::string("out"));
    cfg.jobs = j.value("jobs", 1);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config JSON structure error: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SlopeFit fit_error_slope(const std::vector<ResultRow>& rows, const std::string& estimator) {
  std::map<std::int64_t, std::pair<double, int>> by_n;  // n -> (sum log10 err, count)
  for (const auto& r : rows) {
    if (r.estimator != estimator || r.failed) continue;
    double err = std::max(r.abs_error, 1e-300);
    auto& slot = by_n[r.n];
    slot.first += std::log10(err);
    slot.second += 1;
  }
  SlopeFit fit;
  fit.estimator = estimator;
  if (by_n.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (const auto& [n, slot] : by_n) {
    double x = std::log10(static_cast<double>(n));
    double y = slot.first / slot.second;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++k;
  }
  double denom = k * sxx - sx * sx;
  if (denom <= 0) return fit;
  fit.slope = (k * sxy - sx * sy) / denom;
  fit.valid = true;
  return fit;
}

RunOutputs run_experiment(const ExperimentConfig& config) {
  config.validate();
  ResolvedSetup rs = resolve(config);
  rs.model.validate();

  RunOutputs out;
  out.report = diagnose(rs.model, rs.policy_b, rs.policy_e, rs.windows);
  std::string diag_hash = fnv1a_hex(out.report.to_json_string(0));

  WindowSpaces spaces(rs.model.n_states, rs.model.n_obs, rs.model.n_actions, rs.windows);
  Vec stat = behavior_stationary_distribution(rs.model, rs.policy_b, rs.windows.m_h);
  Vec nu = zs_marginal(stat, spaces.h, rs.windows.m, rs.model.n_states);
  out.j_true = exact_policy_value(rs.model, rs.policy_e, nu);

  struct Cell {
    std::int64_t n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::int64_t n : config.n_grid)
    for (std::uint64_t s : config.seeds) cells.push_back({n, s});

  std::vector<std::vector<ResultRow>> per_cell(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) break;
      const Cell& c = cells[i];
      OfflineDataset ds;
      bool ds_ok = true;
      std::string ds_err;
      try {
        ds = generate_offline_dataset(rs.model, rs.policy_b, c.n, config.n_init,
                                      rs.windows, config.mode, c.seed);
      } catch (const std::exception& e) {
        ds_ok = false;
        ds_err = e.what();
      }
      for (const auto& spec : config.estimators) {
        if (!ds_ok) {
          ResultRow row;
          row.estimator = spec.name;
          row.n = c.n;
          row.seed = c.seed;
          row.failed = true;
          row.error = "dataset generation failed: " + ds_err;
          row.diag_hash = diag_hash;
          per_cell[i].push_back(std::move(row));
          continue;
        }
        ResultRow row = run_cell(rs, spec, ds, c.n, c.seed, out.j_true, rs.model);
        row.diag_hash = diag_hash;
        per_cell[i].push_back(std::move(row));
      }
    }
  };

  int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& rows : per_cell)
    for (auto& r : rows) out.rows.push_back(std::move(r));

  for (const auto& spec : config.estimators) {
    SlopeFit fit = fit_error_slope(out.rows, spec.name);
    out.slopes.push_back(fit);
  }
  return out;
}

void run_to_files(const ExperimentConfig& config) {
  RunOutputs out = run_experiment(config);
  std::filesystem::create_directories(config.output_dir);
  auto path = [&](const char* name) {
    return (std::filesystem::path(config.output_dir) / name).string();
  };

  // Stable row order regardless of thread scheduling.
  std::vector<const ResultRow*> ordered;
  for (const auto& r : out.rows) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](const ResultRow* a, const ResultRow* b) {
    if (a->estimator != b->estimator) return a->estimator < b->estimator;
    if (a->n != b->n) return a->n < b->n;
    return a->seed < b->seed;
  });

  {
    std::ofstream csv(path("results.csv"));
    csv << "estimator,n,seed,j_hat,j_true,abs_error,failed,diag_hash\n";
    for (const ResultRow* r : ordered) {
      csv << r->estimator << ',' << r->n << ',' << r->seed << ',' << fmt_double(r->j_hat)
          << ',' << fmt_double(r->j_true) << ',' << fmt_double(r->abs_error) << ','
          << (r->failed ? 1 : 0) << ',' << r->diag_hash << "\n";
    }
  }
  {
    std::ofstream jsonl(path("results.jsonl"));
    for (const ResultRow* r : ordered) {
      nlohmann::json j;
      j["estimator"] = r->estimator;
      j["n"] = r->n;
      j["seed"] = r->seed;
      j["j_hat"] = r->j_hat;
      j["j_true"] = r->j_true;
      j["abs_error"] = r->abs_error;
      j["runtime_ms"] = r->runtime_ms;
      j["failed"] = r->failed;
      if (r->failed) j["error"] = r->error;
      j["diag_hash"] = r->diag_hash;
      jsonl << j.dump() << "\n";
    }
  }
  {
    std::ofstream rep(path("report.md"));
    rep << "# Experiment report\n\n";
    rep << "results.csv columns: estimator, n, seed, j_hat, j_true, abs_error, failed, "
           "diag_hash. Wall-clock runtimes are reported only in results.jsonl so that "
           "reruns of the same config produce byte-identical CSV output.\n\n";
    rep << "Exact policy value J(pi_e) = " << fmt_double(out.j_true) << "\n\n";
    rep << "## Error-vs-n slope (log10-log10 fit)\n\n";
    rep << "| estimator | slope |\n|---|---|\n";
    for (const auto& s : out.slopes)
      rep << "| " << s.estimator << " | " << (s.valid ? fmt_double(s.slope) : "n/a")
          << " |\n";
    rep << "\n## Diagnostics\n\n```json\n" << out.report.to_json_string() << "\n```\n";
  }
}

}  // namespace pomdp_ope
