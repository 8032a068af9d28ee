// Command-line front end: simulate | estimate | diagnose | dynamics | sweep | run.
// All randomness flows from explicit seeds; outputs are reproducible.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pomdp_ope/diagnostics.hpp"
#include "pomdp_ope/dynamics.hpp"
#include "pomdp_ope/estimators.hpp"
#include "pomdp_ope/exact.hpp"
#include "pomdp_ope/experiment.hpp"
#include "pomdp_ope/scenarios.hpp"

namespace {

using namespace pomdp_ope;

int jobs_from_env(int cli_jobs) {
  if (cli_jobs > 0) return cli_jobs;
  if (const char* env = std::getenv("POMDP_OPE_JOBS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

struct SetupArgs {
  std::string scenario = "tabular-small";
  std::uint64_t scenario_seed = 1;
  std::string model_path;
  std::string policy_b_path;
  std::string policy_e_path;
  int m = -1, m_h = -1, m_f = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--scenario", scenario, "bundled scenario name");
    cmd->add_option("--scenario-seed", scenario_seed, "seed for the bundled scenario");
    cmd->add_option("--model", model_path, "tabular model JSON file");
    cmd->add_option("--behavior-policy", policy_b_path, "behavior policy JSON file");
    cmd->add_option("--evaluation-policy", policy_e_path, "evaluation policy JSON file");
    cmd->add_option("--m", m, "policy memory M");
    cmd->add_option("--m-h", m_h, "history window length M_H");
    cmd->add_option("--m-f", m_f, "future window length M_F");
  }

  Scenario resolve() const {
    Scenario sc;
    if (model_path.empty()) {
      sc = make_scenario(scenario, scenario_seed);
    } else {
      sc.name = "file:" + model_path;
      sc.model = TabularPOMDP::load_file(model_path);
      if (policy_b_path.empty() || policy_e_path.empty())
        throw ConfigError("--model requires --behavior-policy and --evaluation-policy");
      std::ifstream pb(policy_b_path), pe(policy_e_path);
      std::stringstream sb, se;
      sb << pb.rdbuf();
      se << pe.rdbuf();
      sc.policy_b = MemoryPolicy::from_json_string(sb.str());
      sc.policy_e = MemoryPolicy::from_json_string(se.str());
      sc.windows = WindowConfig{sc.policy_b.memory(), sc.policy_b.memory() + 1, 1};
    }
    if (m >= 0) sc.windows.m = m;
    if (m_h >= 0) sc.windows.m_h = m_h;
    if (m_f >= 0) sc.windows.m_f = m_f;
    return sc;
  }
};

int cmd_simulate(const SetupArgs& setup, std::int64_t n, std::int64_t n_init,
                 const std::string& mode, std::uint64_t seed, const std::string& out) {
  Scenario sc = setup.resolve();
  DatasetMode m = mode == "sliced-trajectory" ? DatasetMode::SlicedTrajectory
                                              : DatasetMode::IidPerTuple;
  OfflineDataset ds =
      generate_offline_dataset(sc.model, sc.policy_b, n, n_init, sc.windows, m, seed);
  save_dataset(ds, out);
  std::cout << "wrote " << ds.n() << " tuples and " << ds.n_init()
            << " initial samples to " << out << "\n";
  return 0;
}

int cmd_estimate(const SetupArgs& setup, const std::string& data_path,
                 const std::string& estimator, double lambda, double alpha,
                 double alpha_prime, int horizon, bool population, std::uint64_t seed) {
  Scenario sc = setup.resolve();
  EstimatorConfig cfg{lambda, alpha, alpha_prime};
  WindowSpaces spaces(sc.model.n_states, sc.model.n_obs, sc.model.n_actions, sc.windows);
  FbarFeatures fbar = one_hot_fbar(spaces);
  HistFeatures hist = one_hot_history(spaces);

  MomentSet moments;
  std::int64_t n = 0;
  if (population) {
    moments = compute_moments_population(sc.model, sc.policy_b, sc.policy_e, fbar, hist,
                                         sc.windows);
  } else {
    if (data_path.empty()) throw ConfigError("estimate needs --data or --population");
    OfflineDataset ds = load_dataset(data_path);
    moments = compute_moments_empirical(ds, fbar, hist, sc.policy_e, sc.policy_b,
                                        sc.model.gamma, sc.model.n_obs, sc.model.n_actions);
    n = static_cast<std::int64_t>(ds.n());
  }

  ValueEstimate est;
  if (estimator == "minimax_linear")
    est = minimax_linear(moments, cfg);
  else if (estimator == "finite_horizon")
    est = finite_horizon_linear(moments, horizon);
  else
    throw ConfigError("estimate supports minimax_linear and finite_horizon here; use "
                      "`run` for the other estimators");
  std::cout << est.to_json_string(estimator, n, sc.model.gamma, seed) << "\n";

  Vec stat = behavior_stationary_distribution(sc.model, sc.policy_b, sc.windows.m_h);
  Vec nu = zs_marginal(stat, spaces.h, sc.windows.m, sc.model.n_states);
  double j_true = estimator == "finite_horizon"
                      ? exact_finite_horizon_value(sc.model, sc.policy_e, nu, horizon)
                      : exact_policy_value(sc.model, sc.policy_e, nu);
  std::cerr << "exact value " << j_true << ", abs error " << std::abs(est.j_hat - j_true)
            << "\n";
  return 0;
}

int cmd_diagnose(const SetupArgs& setup, const std::string& out) {
  Scenario sc = setup.resolve();
  ConditionReport rep = diagnose(sc.model, sc.policy_b, sc.policy_e, sc.windows);
  std::string text = rep.to_json_string();
  if (!out.empty()) {
    std::ofstream f(out);
    f << text << "\n";
  }
  std::cout << text << "\n";
  if (!rep.observability_ok)
    std::cerr << "warning: observability rank condition fails (rank "
              << rep.rank_f_given_s << " < " << rep.s_bar_b_size << ")\n";
  if (!rep.invertibility_ok)
    std::cerr << "warning: invertibility rank condition fails (rank " << rep.rank_s_h
              << " < " << rep.s_bar_b_size << ")\n";
  return 0;
}

int cmd_dynamics(const SetupArgs& setup, const std::string& sequence_json,
                 const std::string& data_path, std::uint64_t seed) {
  Scenario sc = setup.resolve();
  if (sc.windows.m != 0)
    throw ConfigError("dynamics requires memory-less policies (M = 0)");
  std::vector<std::pair<int, int>> seq;
  for (const auto& e : nlohmann::json::parse(sequence_json))
    seq.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());

  DynamicsMoments moments;
  if (data_path.empty()) {
    PopulationTables tables =
        build_population_tables(sc.model, sc.policy_b, sc.policy_e, sc.windows);
    moments = dynamics_moments_population(tables, sc.model, seq);
  } else {
    OfflineDataset ds = load_dataset(data_path);
    moments = dynamics_moments_empirical(ds, sc.policy_e, sc.policy_b, seq,
                                         sc.model.n_obs, sc.model.n_actions);
  }

  nlohmann::json out;
  out["sequence"] = nlohmann::json::parse(sequence_json);
  out["joint_probability"] = spectral_joint_probability(moments);
  Vec unclipped;
  try {
    Vec cond = spectral_conditional_distribution(moments, &unclipped);
    out["conditional_next_obs"] = std::vector<double>(cond.data(), cond.data() + cond.size());
    out["conditional_unclipped"] =
        std::vector<double>(unclipped.data(), unclipped.data() + unclipped.size());
  } catch (const DegenerateEstimateError& e) {
    out["conditional_error"] = e.what();
  }
  SpectralDiag diag = spectral_diagnostic(moments);
  out["b_rank"] = diag.b_rank;
  out["rank_deficient"] = diag.rank_deficient;
  (void)seed;
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-policy evaluation for POMDPs with future-dependent value functions"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate an offline dataset");
  SetupArgs sim_setup;
  sim_setup.attach(sim);
  std::int64_t sim_n = 1000, sim_n_init = 1000;
  std::string sim_mode = "iid-per-tuple", sim_out = "dataset.jsonl";
  std::uint64_t sim_seed = 1;
  sim->add_option("--n", sim_n, "number of transition tuples");
  sim->add_option("--n-init", sim_n_init, "number of initial samples");
  sim->add_option("--mode", sim_mode, "iid-per-tuple | sliced-trajectory");
  sim->add_option("--seed", sim_seed, "generation seed");
  sim->add_option("--out", sim_out, "output JSONL path");

  // estimate
  auto* est = app.add_subcommand("estimate", "run a single estimator on a dataset");
  SetupArgs est_setup;
  est_setup.attach(est);
  std::string est_data, est_name = "minimax_linear";
  double est_lambda = 1.0, est_alpha = 0.0, est_alpha_prime = 0.0;
  int est_horizon = 5;
  bool est_population = false;
  std::uint64_t est_seed = 1;
  est->add_option("--data", est_data, "dataset JSONL path");
  est->add_option("--estimator", est_name, "minimax_linear | finite_horizon");
  est->add_option("--lambda", est_lambda, "stabilizer");
  est->add_option("--alpha", est_alpha, "critic norm regularizer");
  est->add_option("--alpha-prime", est_alpha_prime, "value norm regularizer");
  est->add_option("--horizon", est_horizon, "finite horizon T");
  est->add_flag("--population", est_population, "use exact population moments");
  est->add_option("--seed", est_seed, "seed recorded in the output");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "rank conditions and condition numbers");
  SetupArgs diag_setup;
  diag_setup.attach(diag);
  std::string diag_out;
  diag->add_option("--out", diag_out, "write the JSON report here");

  // dynamics
  auto* dyn = app.add_subcommand("dynamics", "spectral modeling of dynamics");
  SetupArgs dyn_setup;
  dyn_setup.attach(dyn);
  std::string dyn_seq = "[[0,0]]", dyn_data;
  std::uint64_t dyn_seed = 1;
  dyn->add_option("--sequence", dyn_seq, "JSON array of [o, a] pairs");
  dyn->add_option("--data", dyn_data, "dataset JSONL (empty = population mode)");
  dyn->add_option("--seed", dyn_seed, "seed recorded in the output");

  // run / sweep
  auto* run = app.add_subcommand("run", "run a config-driven experiment");
  std::string run_config, run_out;
  std::uint64_t run_seed_override = 0;
  bool run_has_seed_override = false;
  int run_jobs = 0;
  run->add_option("--config", run_config, "experiment config JSON")->required();
  run->add_option("--out", run_out, "output directory override");
  run->add_option("--seed-override", run_seed_override, "replace the config seed list")
      ->each([&](const std::string&) { run_has_seed_override = true; });
  run->add_option("--jobs", run_jobs, "parallel cells (env POMDP_OPE_JOBS as fallback)");

  auto* sweep = app.add_subcommand("sweep", "n-grid x seed-grid sweep on a scenario");
  SetupArgs sweep_setup;
  sweep_setup.attach(sweep);
  std::vector<std::int64_t> sweep_ns{1000, 10000};
  std::vector<std::uint64_t> sweep_seeds{1, 2, 3};
  std::string sweep_out = "out";
  double sweep_lambda = 1.0;
  int sweep_jobs = 0;
  sweep->add_option("--n-grid", sweep_ns, "dataset sizes");
  sweep->add_option("--seeds", sweep_seeds, "seed list");
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--lambda", sweep_lambda, "stabilizer for minimax_linear");
  sweep->add_option("--jobs", sweep_jobs, "parallel cells");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(sim_setup, sim_n, sim_n_init, sim_mode, sim_seed, sim_out);
    if (est->parsed())
      return cmd_estimate(est_setup, est_data, est_name, est_lambda, est_alpha,
                          est_alpha_prime, est_horizon, est_population, est_seed);
    if (diag->parsed()) return cmd_diagnose(diag_setup, diag_out);
    if (dyn->parsed()) return cmd_dynamics(dyn_setup, dyn_seq, dyn_data, dyn_seed);
    if (run->parsed()) {
      ExperimentConfig cfg = ExperimentConfig::load_file(run_config);
      if (!run_out.empty()) cfg.output_dir = run_out;
      if (run_has_seed_override) cfg.seeds = {run_seed_override};
      cfg.jobs = jobs_from_env(run_jobs > 0 ? run_jobs : cfg.jobs);
      run_to_files(cfg);
      std::cout << "results written to " << cfg.output_dir << "\n";
      return 0;
    }
    if (sweep->parsed()) {
      Scenario sc = sweep_setup.resolve();
      ExperimentConfig cfg;
      cfg.scenario = sweep_setup.model_path.empty() ? sweep_setup.scenario : "";
      cfg.scenario_seed = sweep_setup.scenario_seed;
      if (!sweep_setup.model_path.empty()) {
        cfg.model = sc.model;
        cfg.policy_b = sc.policy_b;
        cfg.policy_e = sc.policy_e;
      }
      cfg.windows = sc.windows;
      EstimatorSpec spec;
      spec.name = "minimax_linear";
      spec.cfg.lambda = sweep_lambda;
      cfg.estimators.push_back(spec);
      cfg.n_grid = sweep_ns;
      cfg.seeds = sweep_seeds;
      cfg.output_dir = sweep_out;
      cfg.jobs = jobs_from_env(sweep_jobs);
      run_to_files(cfg);
      std::cout << "results written to " << sweep_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
