// Command-line front end: run | solve | sweep | check | reproduce-appendix-d.

#include <cstdint>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prefgame/config.hpp"
#include "prefgame/experiment.hpp"

int main(int argc, char** argv) {
  using namespace prefgame;

  CLI::App app{"prefgame: tabular preference-game optimisation laboratory"};
  app.set_version_flag("--version", cli::kArtifactVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seed_override;
  std::string tol_override;
  int workers = 0;

  auto* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("--config", config_path, "experiment config (key = value lines)")
      ->required();
  run->add_option("--out", out_dir, "override output.dir");
  run->add_option("--seed", seed_override, "override run.seed");
  run->add_option("--tolerance", tol_override, "override run.tolerance");

  auto* solve = app.add_subcommand(
      "solve", "solve the regularised equilibrium (and the mixture fixed point "
               "when algo.beta is set)");
  solve->add_option("--config", config_path, "experiment config")->required();
  solve->add_option("--out", out_dir, "override output.dir");
  solve->add_option("--tolerance", tol_override, "override run.tolerance");

  auto* sweep = app.add_subcommand("sweep", "cross-product sweep over config axes");
  sweep->add_option("--config", config_path, "sweep config")->required();
  sweep->add_option("--out", out_dir, "override output.dir");
  sweep->add_option("--seed", seed_override, "override run.seed");
  sweep->add_option("--tolerance", tol_override, "override run.tolerance");
  sweep->add_option("--workers", workers, "worker threads (default: cores)");

  std::string suite = "all";
  std::uint64_t check_seed = 20240901;
  auto* check = app.add_subcommand("check", "numerical check suites");
  check->add_option("--suite", suite,
                    "gradients | propositions | variance | dpo-analysis | all");
  check->add_option("--out", out_dir, "directory for the JSON report");
  check->add_option("--seed", check_seed, "seed for the randomised checks");

  std::vector<double> betas = {0.0, 0.25, 0.5, 0.75, 1.0};
  double lr = 0.1;
  long steps = 100000;
  long record_every = 100;
  double tolerance = 1e-4;
  auto* reproduce = app.add_subcommand(
      "reproduce-appendix-d",
      "mixture-sampled squared-loss dynamics on the built-in 3x3 cyclic game");
  reproduce->add_option("--out", out_dir, "output directory")->required();
  reproduce->add_option("--betas", betas, "mixing coefficients to run");
  reproduce->add_option("--learning-rate", lr, "step size");
  reproduce->add_option("--steps", steps, "iteration count");
  reproduce->add_option("--record-every", record_every, "record cadence");
  reproduce->add_option("--tolerance", tolerance, "convergence tolerance (tv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cli::cmd_run(config_path, out_dir, seed_override, tol_override);
    if (solve->parsed()) return cli::cmd_solve(config_path, out_dir, tol_override);
    if (sweep->parsed())
      return cli::cmd_sweep(config_path, out_dir, workers, seed_override,
                            tol_override);
    if (check->parsed()) return cli::cmd_check(suite, out_dir, check_seed);
    if (reproduce->parsed())
      return cli::cmd_reproduce_appendix_d(out_dir, betas, lr, steps,
                                           record_every, tolerance);
  } catch (const cli::ConfigError& e) {
    cli::log_error(e.what());
    return cli::kExitConfigError;
  } catch (const std::exception& e) {
    cli::log_error(e.what());
    return 1;
  }
  return 0;
}
