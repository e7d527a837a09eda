#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prefgame/config.hpp"
#include "prefgame/dynamics.hpp"

namespace prefgame::cli {

// Exit codes shared by the CLI commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitCheckFailure = 4;

inline constexpr const char* kArtifactVersion = "0.1.0";

// PREFGAME_LOG = error | info | debug (default info). Messages go to stderr.
enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };
LogLevel log_level();
void log_info(const std::string& message);
void log_debug(const std::string& message);
void log_error(const std::string& message);

struct RunArtifacts {
  dynamics::Trajectory trajectory;
  std::vector<std::string> files;
};

// Execute one experiment and write trajectory.csv / summary.json into
// config.output.dir (created if needed). Returns the trajectory plus the
// written paths; the summary JSON echoes the canonical flat config so the
// run is reproducible from its own output.
RunArtifacts run_experiment(const ExperimentConfig& config);

// Trajectory CSV, one row per record:
// step,pi_0..pi_{n-1},population_loss,nash_residual,kl_to_ref,grad_norm
// with every number rendered at 17 significant digits.
void write_trajectory_csv(const std::string& path,
                          const dynamics::Trajectory& trajectory, int n);

int cmd_run(const std::string& config_path, const std::string& out_override,
            const std::string& seed_override, const std::string& tol_override);

int cmd_solve(const std::string& config_path, const std::string& out_override,
              const std::string& tol_override);

int cmd_sweep(const std::string& sweep_path, const std::string& out_override,
              int workers, const std::string& seed_override,
              const std::string& tol_override);

int cmd_check(const std::string& suite, const std::string& out_dir,
              std::uint64_t seed);

int cmd_reproduce_appendix_d(const std::string& out_dir,
                             const std::vector<double>& betas,
                             double learning_rate, long steps,
                             long record_every, double tolerance);

}  // namespace prefgame::cli
