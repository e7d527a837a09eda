#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prefgame/core.hpp"
#include "prefgame/dynamics.hpp"

namespace prefgame::cli {

// Raised on any malformed or inconsistent configuration; carries the
// offending key path so the CLI can print a precise diagnostic and exit
// with the config-error code.
struct ConfigError : std::runtime_error {
  std::string field;
  int line;

  ConfigError(std::string field_path, const std::string& message, int line_no = -1)
      : std::runtime_error(field_path + ": " + message +
                           (line_no >= 0 ? " (line " + std::to_string(line_no) + ")"
                                         : "")),
        field(std::move(field_path)),
        line(line_no) {}
};

// A parsed flat "key.path = value" file: ordered map from key path to the
// raw value string, plus source line numbers for diagnostics.
struct FlatConfig {
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  int line_of(const std::string& key) const;
};

FlatConfig parse_flat_text(const std::string& text);
FlatConfig parse_flat_file(const std::string& path);

struct GameConfig {
  // Either an explicit matrix or a generator; exactly one must be present.
  std::optional<std::vector<std::vector<double>>> preference_matrix;
  struct Generator {
    std::string kind;  // random | bradley_terry | rps
    int n = 0;
    std::uint64_t seed = 0;
    std::vector<double> rewards;  // bradley_terry only

    bool operator==(const Generator&) const = default;
  };
  std::optional<Generator> generator;
  std::optional<std::vector<double>> reference_policy;  // absent = uniform
  double tau = 1.0;

  bool operator==(const GameConfig&) const = default;
};

struct AlgoConfig {
  std::string name;  // online-ipo | ipo-md | offline-ipo | nash-md-pg |
                     // self-play | online-dpo | online-slic | rlhf-pg
  std::optional<double> beta;
  std::optional<std::vector<double>> mu;      // offline-ipo sampling policy
  std::optional<std::vector<double>> reward;  // rlhf-pg
  double learning_rate = 0.1;
  std::string mode = "expected";  // expected | stochastic
  std::optional<int> batch_size;  // stochastic only
  bool expected_label = false;

  bool operator==(const AlgoConfig&) const = default;
};

struct RunConfig {
  long steps = 100000;
  std::uint64_t seed = 0;
  long record_every = 100;
  double tolerance = 1e-4;

  bool operator==(const RunConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  bool csv = true;
  bool json = true;

  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
  GameConfig game;
  AlgoConfig algo;
  RunConfig run;
  OutputConfig output;

  bool operator==(const ExperimentConfig&) const = default;
};

// Sweep axes over a base experiment. Cells are the cross product in the
// fixed order tau x beta x learning_rate x seed.
struct SweepSpec {
  ExperimentConfig base;
  std::vector<double> tau;
  std::vector<double> beta;
  std::vector<double> learning_rate;
  std::vector<std::uint64_t> seed;
  long max_cells = 10000;

  long cell_count() const;
  ExperimentConfig cell(long index) const;
  // Axis values of a cell as (name, rendered value) pairs, for reporting.
  std::vector<std::pair<std::string, std::string>> cell_axes(long index) const;
};

ExperimentConfig experiment_config_from_flat(const FlatConfig& flat);
SweepSpec sweep_spec_from_flat(const FlatConfig& flat);

ExperimentConfig parse_experiment_file(const std::string& path);
SweepSpec parse_sweep_file(const std::string& path);

// Canonical flat rendering; parsing it back yields an equal ExperimentConfig.
FlatConfig to_flat(const ExperimentConfig& config);

GameSpec build_game(const GameConfig& game);
dynamics::AlgorithmId build_algorithm(const AlgoConfig& algo, const GameSpec& spec);
dynamics::DynamicsConfig build_dynamics_config(const ExperimentConfig& config);

// Full-precision decimal rendering (17 significant digits) used everywhere a
// double is written to CSV or config echoes, so outputs are byte-stable.
std::string format_double(double x);

}  // namespace prefgame::cli
