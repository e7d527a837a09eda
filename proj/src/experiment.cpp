#include "prefgame/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "prefgame/checks.hpp"
#include "prefgame/generators.hpp"
#include "prefgame/solvers.hpp"

namespace prefgame::cli {

namespace fs = std::filesystem;
using nlohmann::json;

LogLevel log_level() {
  const char* env = std::getenv("PREFGAME_LOG");
  if (env == nullptr) return LogLevel::kInfo;
  const std::string v(env);
  if (v == "error") return LogLevel::kError;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void log_error(const std::string& message) {
  std::cerr << "[prefgame] error: " << message << "\n";
}

void log_info(const std::string& message) {
  if (log_level() >= LogLevel::kInfo)
    std::cerr << "[prefgame] " << message << "\n";
}

void log_debug(const std::string& message) {
  if (log_level() >= LogLevel::kDebug)
    std::cerr << "[prefgame] debug: " << message << "\n";
}

namespace {

json flat_to_json(const FlatConfig& flat) {
  json out = json::object();
  for (const auto& [key, value] : flat.values) out[key] = value;
  return out;
}

json policy_to_json(const Policy& pi) {
  json arr = json::array();
  for (int y = 0; y < pi.size(); ++y) arr.push_back(pi[y]);
  return arr;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

void write_json_file(const std::string& path, const json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

json summary_json(const ExperimentConfig& config,
                  const dynamics::Trajectory& trajectory, double wall_seconds) {
  json summary;
  summary["artifact_version"] = kArtifactVersion;
  summary["algorithm"] = config.algo.name;
  summary["final_policy"] = policy_to_json(trajectory.final_policy);
  summary["final_residual"] = trajectory.final_residual;
  summary["converged"] = trajectory.converged;
  summary["diverged"] = trajectory.diverged;
  summary["steps_run"] = trajectory.steps_run;
  summary["fixed_point"] = {
      {"policy", policy_to_json(trajectory.fixed_point.policy)},
      {"residual", trajectory.fixed_point.residual},
      {"iterations", trajectory.fixed_point.iterations},
      {"converged", trajectory.fixed_point.converged},
  };
  summary["wall_time_seconds"] = wall_seconds;
  summary["config"] = flat_to_json(to_flat(config));
  return summary;
}

}  // namespace

void write_trajectory_csv(const std::string& path,
                          const dynamics::Trajectory& trajectory, int n) {
  std::string out = "step";
  for (int y = 0; y < n; ++y) out += ",pi_" + std::to_string(y);
  out += ",population_loss,nash_residual,kl_to_ref,grad_norm\n";
  for (const auto& rec : trajectory.records) {
    out += std::to_string(rec.step);
    for (int y = 0; y < n; ++y) out += "," + format_double(rec.policy[y]);
    out += "," + format_double(rec.population_loss);
    out += "," + format_double(rec.nash_residual);
    out += "," + format_double(rec.kl_to_ref);
    out += "," + format_double(rec.grad_norm);
    out += "\n";
  }
  write_text_file(path, out);
}

RunArtifacts run_experiment(const ExperimentConfig& config) {
  const dynamics::DynamicsConfig dyn = build_dynamics_config(config);
  const auto start = std::chrono::steady_clock::now();
  RunArtifacts artifacts;
  artifacts.trajectory = dynamics::run_dynamics(dyn);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(config.output.dir);
  if (config.output.csv) {
    const std::string path = (fs::path(config.output.dir) / "trajectory.csv").string();
    write_trajectory_csv(path, artifacts.trajectory, dyn.spec.size());
    artifacts.files.push_back(path);
  }
  if (config.output.json) {
    const std::string path = (fs::path(config.output.dir) / "summary.json").string();
    write_json_file(path, summary_json(config, artifacts.trajectory, wall));
    artifacts.files.push_back(path);
  }
  return artifacts;
}

namespace {

ExperimentConfig apply_overrides(ExperimentConfig config,
                                 const std::string& out_override,
                                 const std::string& seed_override,
                                 const std::string& tol_override) {
  if (!out_override.empty()) config.output.dir = out_override;
  if (!seed_override.empty()) {
    try {
      config.run.seed = std::stoull(seed_override);
    } catch (const std::exception&) {
      throw ConfigError("run.seed", "bad --seed value '" + seed_override + "'");
    }
  }
  if (!tol_override.empty()) {
    try {
      config.run.tolerance = std::stod(tol_override);
    } catch (const std::exception&) {
      throw ConfigError("run.tolerance",
                        "bad --tolerance value '" + tol_override + "'");
    }
    if (!(config.run.tolerance > 0.0))
      throw ConfigError("run.tolerance", "must be > 0");
  }
  return config;
}

}  // namespace

int cmd_run(const std::string& config_path, const std::string& out_override,
            const std::string& seed_override, const std::string& tol_override) {
  ExperimentConfig config;
  RunArtifacts artifacts;
  try {
    config = apply_overrides(parse_experiment_file(config_path), out_override,
                             seed_override, tol_override);
    artifacts = run_experiment(config);
  } catch (const ConfigError& e) {
    log_error(e.what());
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    // invalid experiment descriptions surface here (for example a reference
    // policy without full support driving logit-space dynamics)
    log_error(e.what());
    return kExitConfigError;
  }
  for (const std::string& f : artifacts.files) log_info("wrote " + f);
  if (artifacts.trajectory.diverged) {
    log_error("dynamics diverged after " +
              std::to_string(artifacts.trajectory.steps_run) + " steps");
    return kExitDivergence;
  }
  log_info("final residual " + format_double(artifacts.trajectory.final_residual) +
           (artifacts.trajectory.converged ? " (converged)" : " (not converged)"));
  return kExitOk;
}

int cmd_solve(const std::string& config_path, const std::string& out_override,
              const std::string& tol_override) {
  ExperimentConfig config;
  GameSpec spec;
  double tol = 1e-12;
  try {
    config = apply_overrides(parse_experiment_file(config_path), out_override,
                             "", tol_override);
    spec = build_game(config.game);
    if (!tol_override.empty()) tol = config.run.tolerance;
  } catch (const ConfigError& e) {
    log_error(e.what());
    return kExitConfigError;
  }
  const auto nash = solvers::solve_regularised_nash(spec, tol);
  json out;
  out["artifact_version"] = kArtifactVersion;
  out["tau"] = spec.tau;
  out["nash"] = {
      {"policy", policy_to_json(nash.policy)},
      {"residual", nash.residual},
      {"iterations", nash.iterations},
      {"converged", nash.converged},
      {"exploitability", solvers::exploitability(spec, nash.policy)},
  };
  if (config.algo.beta) {
    const double beta = *config.algo.beta;
    const auto md = solvers::solve_ipo_md_fixed_point(spec, beta, tol);
    json md_json = {
        {"beta", beta},
        {"policy", policy_to_json(md.policy)},
        {"residual", md.residual},
        {"iterations", md.iterations},
        {"converged", md.converged},
    };
    if (beta < 1.0)
      md_json["modified_tau_defect"] =
          solvers::verify_modified_tau(spec, beta, md.policy);
    out["ipo_md_fixed_point"] = md_json;
  }

  fs::create_directories(config.output.dir);
  const std::string path = (fs::path(config.output.dir) / "solve.json").string();
  write_json_file(path, out);
  log_info("wrote " + path);
  std::cout << out.dump(2) << "\n";
  return nash.converged ? kExitOk : kExitDivergence;
}

int cmd_sweep(const std::string& sweep_path, const std::string& out_override,
              int workers, const std::string& seed_override,
              const std::string& tol_override) {
  SweepSpec sweep;
  try {
    sweep = parse_sweep_file(sweep_path);
    sweep.base = apply_overrides(sweep.base, out_override, seed_override,
                                 tol_override);
  } catch (const ConfigError& e) {
    log_error(e.what());
    return kExitConfigError;
  }

  const long cells = sweep.cell_count();
  if (workers < 1)
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<long>(workers, cells));
  log_info("sweep: " + std::to_string(cells) + " cells, " +
           std::to_string(workers) + " workers");

  struct CellResult {
    bool ok = false;
    std::string error;
    double final_residual = 0.0;
    double final_loss = 0.0;
    bool converged = false;
    double tv_to_fixed_point = 0.0;
  };
  std::vector<CellResult> results(static_cast<size_t>(cells));
  const fs::path root(sweep.base.output.dir);
  fs::create_directories(root);

  std::atomic<long> next{0};
  auto worker = [&]() {
    while (true) {
      const long index = next.fetch_add(1);
      if (index >= cells) return;
      CellResult& cell = results[static_cast<size_t>(index)];
      try {
        ExperimentConfig config = sweep.cell(index);
        config.output.dir =
            (root / ("cell_" + std::to_string(index))).string();
        const RunArtifacts artifacts = run_experiment(config);
        const auto& traj = artifacts.trajectory;
        cell.ok = !traj.diverged;
        if (traj.diverged) cell.error = "diverged";
        cell.final_residual = traj.final_residual;
        cell.final_loss =
            traj.records.empty() ? 0.0 : traj.records.back().population_loss;
        cell.converged = traj.converged;
        cell.tv_to_fixed_point = traj.final_residual;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  // Aggregate rows in cell-index order regardless of completion order.
  std::string csv = "cell,tau,beta,learning_rate,seed,final_residual,final_loss,"
                    "converged,tv_to_fixed_point,status\n";
  long failures = 0;
  for (long index = 0; index < cells; ++index) {
    const auto axes = sweep.cell_axes(index);
    const CellResult& cell = results[static_cast<size_t>(index)];
    csv += std::to_string(index);
    for (const auto& [name, value] : axes) {
      (void)name;
      csv += "," + value;
    }
    csv += "," + format_double(cell.final_residual);
    csv += "," + format_double(cell.final_loss);
    csv += cell.converged ? ",true" : ",false";
    csv += "," + format_double(cell.tv_to_fixed_point);
    csv += cell.ok ? ",ok" : (",error:" + cell.error);
    csv += "\n";
    if (!cell.ok) {
      ++failures;
      log_error("cell " + std::to_string(index) + ": " + cell.error);
    }
  }
  const std::string path = (root / "sweep.csv").string();
  write_text_file(path, csv);
  log_info("wrote " + path);
  if (failures == cells) return kExitDivergence;
  return kExitOk;
}

int cmd_check(const std::string& suite, const std::string& out_dir,
              std::uint64_t seed) {
  std::vector<checks::CheckResult> results;
  try {
    results = checks::run_suite(suite, seed);
  } catch (const std::invalid_argument& e) {
    log_error(e.what());
    return kExitConfigError;
  }
  json out;
  out["artifact_version"] = kArtifactVersion;
  out["suite"] = suite;
  out["seed"] = seed;
  json checks_json = json::array();
  for (const auto& r : results) {
    checks_json.push_back({{"name", r.name},
                           {"pass", r.pass},
                           {"observed", r.observed},
                           {"tolerance", r.tolerance},
                           {"note", r.note}});
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name
              << "  observed=" << format_double(r.observed)
              << " tolerance=" << format_double(r.tolerance) << "\n";
  }
  const bool ok = checks::all_pass(results);
  out["checks"] = checks_json;
  out["all_pass"] = ok;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const std::string path = (fs::path(out_dir) / ("check_" + suite + ".json")).string();
    write_json_file(path, out);
    log_info("wrote " + path);
  }
  return ok ? kExitOk : kExitCheckFailure;
}

int cmd_reproduce_appendix_d(const std::string& out_dir,
                             const std::vector<double>& betas,
                             double learning_rate, long steps,
                             long record_every, double tolerance) {
  if (betas.empty()) throw ConfigError("betas", "need at least one value");
  for (double beta : betas)
    if (!(beta >= 0.0 && beta <= 1.0))
      throw ConfigError("betas", "values must be in [0,1]");
  if (!(learning_rate > 0.0))
    throw ConfigError("learning_rate", "must be > 0");
  const GameSpec spec = example_game_3x3();
  fs::create_directories(out_dir);

  json index;
  index["artifact_version"] = kArtifactVersion;
  index["game"] = {{"tau", spec.tau},
                   {"reference_policy", policy_to_json(spec.ref_policy)},
                   {"preference_matrix", spec.prefs.entries()}};
  json runs = json::array();
  bool any_diverged = false;

  auto run_one = [&](const dynamics::AlgorithmId& algo, const std::string& label) {
    dynamics::DynamicsConfig dyn;
    dyn.algorithm = algo;
    dyn.spec = spec;
    dyn.learning_rate = learning_rate;
    dyn.steps = steps;
    dyn.record_every = record_every;
    dyn.tolerance = tolerance;
    const dynamics::Trajectory traj = dynamics::run_dynamics(dyn);
    const std::string csv_path = (fs::path(out_dir) / (label + ".csv")).string();
    write_trajectory_csv(csv_path, traj, spec.size());
    log_info(label + ": final tv " + format_double(traj.final_residual) +
             (traj.converged ? " (converged)" : " (not converged)"));
    runs.push_back({{"label", label},
                    {"algorithm", algo.name()},
                    {"beta", algo.beta},
                    {"trajectory_csv", csv_path},
                    {"final_policy", policy_to_json(traj.final_policy)},
                    {"final_tv_to_fixed_point", traj.final_residual},
                    {"fixed_point", policy_to_json(traj.fixed_point.policy)},
                    {"fixed_point_residual", traj.fixed_point.residual},
                    {"converged", traj.converged},
                    {"diverged", traj.diverged}});
    any_diverged = any_diverged || traj.diverged;
  };

  std::string fp_csv = "label,beta";
  for (int y = 0; y < spec.size(); ++y) fp_csv += ",pi_" + std::to_string(y);
  fp_csv += ",residual\n";

  for (double beta : betas) {
    const std::string label = "ipo_md_beta_" + format_double(beta);
    run_one(dynamics::AlgorithmId::ipo_md(beta), label);
    const auto fp = solvers::solve_ipo_md_fixed_point(spec, beta, 1e-12);
    fp_csv += label + "," + format_double(beta);
    for (int y = 0; y < spec.size(); ++y) fp_csv += "," + format_double(fp.policy[y]);
    fp_csv += "," + format_double(fp.residual) + "\n";
  }
  run_one(dynamics::AlgorithmId::online_ipo(), "online_ipo");
  run_one(dynamics::AlgorithmId::offline_ipo(spec.ref_policy), "offline_ipo");

  const std::string fp_path = (fs::path(out_dir) / "fixed_points.csv").string();
  write_text_file(fp_path, fp_csv);
  index["runs"] = runs;
  const std::string index_path = (fs::path(out_dir) / "summary.json").string();
  write_json_file(index_path, index);
  log_info("wrote " + fp_path);
  log_info("wrote " + index_path);
  return any_diverged ? kExitDivergence : kExitOk;
}

}  // namespace prefgame::cli
