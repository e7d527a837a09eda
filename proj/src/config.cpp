#include "prefgame/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "prefgame/generators.hpp"

namespace prefgame::cli {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0;
  size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  for (char c : key) {
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
      return false;
  }
  return true;
}

double parse_double(const FlatConfig& flat, const std::string& key,
                    const std::string& raw) {
  try {
    size_t pos = 0;
    const double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + raw + "'",
                      flat.line_of(key));
  }
}

long parse_long(const FlatConfig& flat, const std::string& key,
                const std::string& raw) {
  try {
    size_t pos = 0;
    const long v = std::stol(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + raw + "'",
                      flat.line_of(key));
  }
}

std::uint64_t parse_u64(const FlatConfig& flat, const std::string& key,
                        const std::string& raw) {
  try {
    size_t pos = 0;
    const unsigned long long v = std::stoull(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("trailing characters");
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a nonnegative integer, got '" + raw + "'",
                      flat.line_of(key));
  }
}

bool parse_bool(const FlatConfig& flat, const std::string& key,
                const std::string& raw) {
  if (raw == "true") return true;
  if (raw == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + raw + "'",
                    flat.line_of(key));
}

std::vector<double> parse_number_list(const FlatConfig& flat,
                                      const std::string& key,
                                      const std::string& raw) {
  std::vector<double> out;
  std::string cleaned = raw;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream in(cleaned);
  std::string tok;
  while (in >> tok) out.push_back(parse_double(flat, key, tok));
  if (out.empty())
    throw ConfigError(key, "expected a list of numbers", flat.line_of(key));
  return out;
}

std::vector<std::vector<double>> parse_matrix(const FlatConfig& flat,
                                              const std::string& key,
                                              const std::string& raw) {
  std::vector<std::vector<double>> rows;
  std::string row;
  std::istringstream in(raw);
  while (std::getline(in, row, ';')) {
    row = trim(row);
    if (row.empty()) continue;
    rows.push_back(parse_number_list(flat, key, row));
  }
  if (rows.empty())
    throw ConfigError(key, "expected rows separated by ';'", flat.line_of(key));
  return rows;
}

std::string render_number_list(const std::vector<double>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += " ";
    out += format_double(xs[i]);
  }
  return out;
}

std::string render_matrix(const std::vector<std::vector<double>>& m) {
  std::string out;
  for (size_t i = 0; i < m.size(); ++i) {
    if (i) out += " ; ";
    out += render_number_list(m[i]);
  }
  return out;
}

const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names = {
      "online-ipo", "ipo-md",     "offline-ipo", "nash-md-pg",
      "self-play",  "online-dpo", "online-slic", "rlhf-pg"};
  return names;
}

bool algorithm_takes_beta(const std::string& name) {
  return name == "ipo-md" || name == "nash-md-pg";
}

// Keys the experiment schema understands; anything else is a config error so
// typos fail loudly.
bool known_experiment_key(const std::string& key) {
  static const std::vector<std::string> keys = {
      "game.preference_matrix", "game.generator", "game.n",
      "game.generator_seed",    "game.rewards",   "game.reference_policy",
      "game.tau",               "algo.name",      "algo.beta",
      "algo.mu",                "algo.reward",    "algo.learning_rate",
      "algo.mode",              "algo.batch_size", "algo.expected_label",
      "run.steps",              "run.seed",       "run.record_every",
      "run.tolerance",          "output.dir",     "output.formats"};
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

bool known_sweep_key(const std::string& key) {
  static const std::vector<std::string> keys = {
      "sweep.tau", "sweep.beta", "sweep.learning_rate", "sweep.seed",
      "sweep.max_cells"};
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

}  // namespace

int FlatConfig::line_of(const std::string& key) const {
  auto it = lines.find(key);
  return it == lines.end() ? -1 : it->second;
}

FlatConfig parse_flat_text(const std::string& text) {
  FlatConfig flat;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("(file)", "expected 'key = value', got '" + line + "'",
                        line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key))
      throw ConfigError(key.empty() ? "(file)" : key, "malformed key path", line_no);
    if (value.empty()) throw ConfigError(key, "empty value", line_no);
    if (flat.values.count(key))
      throw ConfigError(key, "duplicate key (first on line " +
                                 std::to_string(flat.lines[key]) + ")",
                        line_no);
    flat.values[key] = value;
    flat.lines[key] = line_no;
  }
  return flat;
}

FlatConfig parse_flat_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("(file)", "cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_flat_text(buffer.str());
}

ExperimentConfig experiment_config_from_flat(const FlatConfig& flat) {
  for (const auto& [key, value] : flat.values) {
    (void)value;
    if (!known_experiment_key(key) && !known_sweep_key(key))
      throw ConfigError(key, "unknown key", flat.line_of(key));
  }

  ExperimentConfig config;
  auto raw = [&](const std::string& key) -> const std::string& {
    auto it = flat.values.find(key);
    if (it == flat.values.end()) throw ConfigError(key, "missing required key");
    return it->second;
  };

  // game
  const bool has_matrix = flat.has("game.preference_matrix");
  const bool has_generator = flat.has("game.generator");
  if (has_matrix == has_generator)
    throw ConfigError("game.preference_matrix",
                      "exactly one of game.preference_matrix and game.generator "
                      "must be given");
  if (has_matrix) {
    config.game.preference_matrix = parse_matrix(
        flat, "game.preference_matrix", raw("game.preference_matrix"));
  } else {
    GameConfig::Generator gen;
    gen.kind = raw("game.generator");
    if (gen.kind != "random" && gen.kind != "bradley_terry" && gen.kind != "rps")
      throw ConfigError("game.generator",
                        "expected random | bradley_terry | rps, got '" +
                            gen.kind + "'",
                        flat.line_of("game.generator"));
    if (gen.kind == "rps") {
      gen.n = 3;
      if (flat.has("game.n") && parse_long(flat, "game.n", raw("game.n")) != 3)
        throw ConfigError("game.n", "the rps generator is 3 actions",
                          flat.line_of("game.n"));
    } else if (gen.kind == "bradley_terry") {
      gen.rewards = parse_number_list(flat, "game.rewards", raw("game.rewards"));
      gen.n = static_cast<int>(gen.rewards.size());
      if (flat.has("game.n") &&
          parse_long(flat, "game.n", raw("game.n")) != gen.n)
        throw ConfigError("game.n", "does not match the length of game.rewards",
                          flat.line_of("game.n"));
    } else {
      const long n = parse_long(flat, "game.n", raw("game.n"));
      if (n < 2 || n > 1000)
        throw ConfigError("game.n", "expected 2 <= n <= 1000",
                          flat.line_of("game.n"));
      gen.n = static_cast<int>(n);
      gen.seed = flat.has("game.generator_seed")
                     ? parse_u64(flat, "game.generator_seed", raw("game.generator_seed"))
                     : 0;
    }
    config.game.generator = std::move(gen);
  }
  if (flat.has("game.reference_policy")) {
    const std::string& ref = raw("game.reference_policy");
    if (ref != "uniform")
      config.game.reference_policy =
          parse_number_list(flat, "game.reference_policy", ref);
  }
  config.game.tau = parse_double(flat, "game.tau", raw("game.tau"));
  if (!(config.game.tau > 0.0))
    throw ConfigError("game.tau", "must be > 0", flat.line_of("game.tau"));

  // algo
  config.algo.name = raw("algo.name");
  if (std::find(known_algorithms().begin(), known_algorithms().end(),
                config.algo.name) == known_algorithms().end())
    throw ConfigError("algo.name", "unknown algorithm '" + config.algo.name + "'",
                      flat.line_of("algo.name"));
  if (flat.has("algo.beta")) {
    if (!algorithm_takes_beta(config.algo.name))
      throw ConfigError("algo.beta",
                        "only the mixture-sampled algorithms (ipo-md, "
                        "nash-md-pg) take beta",
                        flat.line_of("algo.beta"));
    config.algo.beta = parse_double(flat, "algo.beta", raw("algo.beta"));
    if (!(*config.algo.beta >= 0.0 && *config.algo.beta <= 1.0))
      throw ConfigError("algo.beta", "must be in [0,1]", flat.line_of("algo.beta"));
  } else if (algorithm_takes_beta(config.algo.name)) {
    throw ConfigError("algo.beta",
                      "required for " + config.algo.name);
  }
  if (flat.has("algo.mu")) {
    if (config.algo.name != "offline-ipo")
      throw ConfigError("algo.mu", "only offline-ipo takes a sampling policy",
                        flat.line_of("algo.mu"));
    config.algo.mu = parse_number_list(flat, "algo.mu", raw("algo.mu"));
  }
  if (flat.has("algo.reward")) {
    if (config.algo.name != "rlhf-pg")
      throw ConfigError("algo.reward", "only rlhf-pg takes a reward vector",
                        flat.line_of("algo.reward"));
    config.algo.reward = parse_number_list(flat, "algo.reward", raw("algo.reward"));
  } else if (config.algo.name == "rlhf-pg") {
    throw ConfigError("algo.reward", "required for rlhf-pg");
  }
  config.algo.learning_rate =
      parse_double(flat, "algo.learning_rate", raw("algo.learning_rate"));
  if (!(config.algo.learning_rate > 0.0))
    throw ConfigError("algo.learning_rate", "must be > 0",
                      flat.line_of("algo.learning_rate"));
  if (flat.has("algo.mode")) {
    config.algo.mode = raw("algo.mode");
    if (config.algo.mode != "expected" && config.algo.mode != "stochastic")
      throw ConfigError("algo.mode", "expected 'expected' or 'stochastic'",
                        flat.line_of("algo.mode"));
  }
  if (flat.has("algo.batch_size")) {
    if (config.algo.mode != "stochastic")
      throw ConfigError("algo.batch_size", "only meaningful in stochastic mode",
                        flat.line_of("algo.batch_size"));
    const long b = parse_long(flat, "algo.batch_size", raw("algo.batch_size"));
    if (b < 1)
      throw ConfigError("algo.batch_size", "must be >= 1",
                        flat.line_of("algo.batch_size"));
    config.algo.batch_size = static_cast<int>(b);
  }
  if (flat.has("algo.expected_label")) {
    if (config.algo.mode != "stochastic")
      throw ConfigError("algo.expected_label",
                        "only meaningful in stochastic mode",
                        flat.line_of("algo.expected_label"));
    config.algo.expected_label =
        parse_bool(flat, "algo.expected_label", raw("algo.expected_label"));
  }

  // run
  config.run.steps = parse_long(flat, "run.steps", raw("run.steps"));
  if (config.run.steps < 1)
    throw ConfigError("run.steps", "must be >= 1", flat.line_of("run.steps"));
  if (flat.has("run.seed")) config.run.seed = parse_u64(flat, "run.seed", raw("run.seed"));
  if (flat.has("run.record_every")) {
    config.run.record_every =
        parse_long(flat, "run.record_every", raw("run.record_every"));
    if (config.run.record_every < 1)
      throw ConfigError("run.record_every", "must be >= 1",
                        flat.line_of("run.record_every"));
  }
  if (flat.has("run.tolerance")) {
    config.run.tolerance = parse_double(flat, "run.tolerance", raw("run.tolerance"));
    if (!(config.run.tolerance > 0.0))
      throw ConfigError("run.tolerance", "must be > 0",
                        flat.line_of("run.tolerance"));
  }

  // output
  if (flat.has("output.dir")) config.output.dir = raw("output.dir");
  if (flat.has("output.formats")) {
    std::string formats = raw("output.formats");
    std::replace(formats.begin(), formats.end(), ',', ' ');
    std::istringstream in(formats);
    std::string tok;
    config.output.csv = false;
    config.output.json = false;
    while (in >> tok) {
      if (tok == "csv")
        config.output.csv = true;
      else if (tok == "json")
        config.output.json = true;
      else
        throw ConfigError("output.formats", "unknown format '" + tok + "'",
                          flat.line_of("output.formats"));
    }
    if (!config.output.csv && !config.output.json)
      throw ConfigError("output.formats", "needs at least one of csv, json",
                        flat.line_of("output.formats"));
  }

  // Validate cross-field consistency by actually building the run pieces.
  const GameSpec spec = build_game(config.game);
  build_algorithm(config.algo, spec);
  return config;
}

SweepSpec sweep_spec_from_flat(const FlatConfig& flat) {
  SweepSpec sweep;
  sweep.base = experiment_config_from_flat(flat);
  if (flat.has("sweep.tau"))
    sweep.tau = parse_number_list(flat, "sweep.tau", flat.values.at("sweep.tau"));
  if (flat.has("sweep.beta")) {
    if (!algorithm_takes_beta(sweep.base.algo.name))
      throw ConfigError("sweep.beta",
                        "beta axis needs a mixture-sampled algorithm",
                        flat.line_of("sweep.beta"));
    sweep.beta =
        parse_number_list(flat, "sweep.beta", flat.values.at("sweep.beta"));
  }
  if (flat.has("sweep.learning_rate"))
    sweep.learning_rate = parse_number_list(flat, "sweep.learning_rate",
                                            flat.values.at("sweep.learning_rate"));
  if (flat.has("sweep.seed")) {
    for (double v : parse_number_list(flat, "sweep.seed", flat.values.at("sweep.seed"))) {
      if (v < 0.0 || v != std::floor(v))
        throw ConfigError("sweep.seed", "seeds must be nonnegative integers",
                          flat.line_of("sweep.seed"));
      sweep.seed.push_back(static_cast<std::uint64_t>(v));
    }
  }
  if (flat.has("sweep.max_cells")) {
    sweep.max_cells =
        parse_long(flat, "sweep.max_cells", flat.values.at("sweep.max_cells"));
    if (sweep.max_cells < 1)
      throw ConfigError("sweep.max_cells", "must be >= 1",
                        flat.line_of("sweep.max_cells"));
  }
  if (sweep.cell_count() > sweep.max_cells)
    throw ConfigError("sweep.max_cells",
                      "cross product has " + std::to_string(sweep.cell_count()) +
                          " cells, cap is " + std::to_string(sweep.max_cells));
  return sweep;
}

long SweepSpec::cell_count() const {
  auto dim = [](size_t n) { return n == 0 ? 1L : static_cast<long>(n); };
  return dim(tau.size()) * dim(beta.size()) * dim(learning_rate.size()) *
         dim(seed.size());
}

ExperimentConfig SweepSpec::cell(long index) const {
  if (index < 0 || index >= cell_count())
    throw std::out_of_range("SweepSpec::cell: index out of range");
  ExperimentConfig config = base;
  auto pick = [&index](size_t n) {
    if (n == 0) return static_cast<size_t>(0);
    const size_t i = static_cast<size_t>(index) % n;
    index /= static_cast<long>(n);
    return i;
  };
  // Innermost axis first so that the cell order is the natural cross product
  // (seed fastest).
  if (!seed.empty()) config.run.seed = seed[pick(seed.size())];
  if (!learning_rate.empty())
    config.algo.learning_rate = learning_rate[pick(learning_rate.size())];
  if (!beta.empty()) config.algo.beta = beta[pick(beta.size())];
  if (!tau.empty()) config.game.tau = tau[pick(tau.size())];
  return config;
}

std::vector<std::pair<std::string, std::string>> SweepSpec::cell_axes(
    long index) const {
  const ExperimentConfig config = cell(index);
  std::vector<std::pair<std::string, std::string>> axes;
  axes.emplace_back("tau", format_double(config.game.tau));
  axes.emplace_back("beta", config.algo.beta ? format_double(*config.algo.beta) : "");
  axes.emplace_back("learning_rate", format_double(config.algo.learning_rate));
  axes.emplace_back("seed", std::to_string(config.run.seed));
  return axes;
}

ExperimentConfig parse_experiment_file(const std::string& path) {
  return experiment_config_from_flat(parse_flat_file(path));
}

SweepSpec parse_sweep_file(const std::string& path) {
  return sweep_spec_from_flat(parse_flat_file(path));
}

FlatConfig to_flat(const ExperimentConfig& config) {
  FlatConfig flat;
  auto set = [&flat](const std::string& key, const std::string& value) {
    flat.values[key] = value;
  };
  if (config.game.preference_matrix)
    set("game.preference_matrix", render_matrix(*config.game.preference_matrix));
  if (config.game.generator) {
    const auto& gen = *config.game.generator;
    set("game.generator", gen.kind);
    if (gen.kind == "random") {
      set("game.n", std::to_string(gen.n));
      set("game.generator_seed", std::to_string(gen.seed));
    }
    if (gen.kind == "bradley_terry") set("game.rewards", render_number_list(gen.rewards));
  }
  set("game.reference_policy", config.game.reference_policy
                                   ? render_number_list(*config.game.reference_policy)
                                   : "uniform");
  set("game.tau", format_double(config.game.tau));

  set("algo.name", config.algo.name);
  if (config.algo.beta) set("algo.beta", format_double(*config.algo.beta));
  if (config.algo.mu) set("algo.mu", render_number_list(*config.algo.mu));
  if (config.algo.reward) set("algo.reward", render_number_list(*config.algo.reward));
  set("algo.learning_rate", format_double(config.algo.learning_rate));
  set("algo.mode", config.algo.mode);
  if (config.algo.batch_size)
    set("algo.batch_size", std::to_string(*config.algo.batch_size));
  if (config.algo.mode == "stochastic")
    set("algo.expected_label", config.algo.expected_label ? "true" : "false");

  set("run.steps", std::to_string(config.run.steps));
  set("run.seed", std::to_string(config.run.seed));
  set("run.record_every", std::to_string(config.run.record_every));
  set("run.tolerance", format_double(config.run.tolerance));

  set("output.dir", config.output.dir);
  std::string formats;
  if (config.output.csv) formats = "csv";
  if (config.output.json) formats += formats.empty() ? "json" : ",json";
  set("output.formats", formats);
  return flat;
}

GameSpec build_game(const GameConfig& game) {
  std::vector<std::vector<double>> entries;
  if (game.preference_matrix) {
    entries = *game.preference_matrix;
  } else if (game.generator) {
    const auto& gen = *game.generator;
    if (gen.kind == "rps") {
      entries = rock_paper_scissors_matrix().entries();
    } else if (gen.kind == "bradley_terry") {
      entries = bradley_terry_matrix(gen.rewards).entries();
    } else {
      Rng rng(gen.seed);
      entries = random_preference_matrix(gen.n, rng).entries();
    }
  } else {
    throw ConfigError("game.preference_matrix", "no game given");
  }

  PreferenceMatrix prefs;
  try {
    prefs = validate_preference_matrix(entries);
  } catch (const std::exception& e) {
    throw ConfigError("game.preference_matrix", e.what());
  }
  Policy ref;
  try {
    ref = game.reference_policy ? Policy(*game.reference_policy)
                                : Policy::uniform(prefs.size());
  } catch (const std::exception& e) {
    throw ConfigError("game.reference_policy", e.what());
  }
  try {
    return GameSpec(std::move(prefs), std::move(ref), game.tau);
  } catch (const std::exception& e) {
    throw ConfigError("game.tau", e.what());
  }
}

dynamics::AlgorithmId build_algorithm(const AlgoConfig& algo,
                                      const GameSpec& spec) {
  using dynamics::AlgorithmId;
  AlgorithmId id;
  try {
    if (algo.name == "online-ipo") {
      id = AlgorithmId::online_ipo();
    } else if (algo.name == "ipo-md") {
      id = AlgorithmId::ipo_md(algo.beta.value());
    } else if (algo.name == "nash-md-pg") {
      id = AlgorithmId::nash_md_pg(algo.beta.value());
    } else if (algo.name == "self-play") {
      id = AlgorithmId::self_play();
    } else if (algo.name == "online-dpo") {
      id = AlgorithmId::online_dpo();
    } else if (algo.name == "online-slic") {
      id = AlgorithmId::online_slic();
    } else if (algo.name == "offline-ipo") {
      Policy mu = algo.mu ? Policy(*algo.mu) : spec.ref_policy;
      if (mu.size() != spec.size())
        throw ConfigError("algo.mu", "size does not match the action count");
      id = AlgorithmId::offline_ipo(std::move(mu));
    } else if (algo.name == "rlhf-pg") {
      if (static_cast<int>(algo.reward->size()) != spec.size())
        throw ConfigError("algo.reward", "size does not match the action count");
      id = AlgorithmId::rlhf_pg(*algo.reward);
    } else {
      throw ConfigError("algo.name", "unknown algorithm '" + algo.name + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("algo." + algo.name, e.what());
  }
  id.expected_label = algo.expected_label;
  return id;
}

dynamics::DynamicsConfig build_dynamics_config(const ExperimentConfig& config) {
  const GameSpec spec = build_game(config.game);
  dynamics::DynamicsConfig dyn;
  dyn.algorithm = build_algorithm(config.algo, spec);
  dyn.spec = spec;
  dyn.learning_rate = config.algo.learning_rate;
  dyn.steps = config.run.steps;
  dyn.seed = config.run.seed;
  dyn.mode = config.algo.mode == "stochastic"
                 ? dynamics::DynamicsConfig::Mode::kStochastic
                 : dynamics::DynamicsConfig::Mode::kExpected;
  dyn.batch_size = config.algo.batch_size.value_or(1);
  dyn.record_every = config.run.record_every;
  dyn.tolerance = config.run.tolerance;
  return dyn;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace prefgame::cli
