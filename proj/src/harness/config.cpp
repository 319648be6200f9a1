#include "xi_index/harness/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>

#include "CLI11.hpp"
#include "xi_index/errors.hpp"

namespace xidx::harness {

namespace {

using nlohmann::json;

std::string normalize(std::string_view text) {
  std::string s;
  for (char c : text) s.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return s;
}

struct EpsParts {
  std::optional<double> start;
  std::optional<double> factor;
  std::optional<int> steps;
};

void rebuild_schedule(ExperimentConfig& cfg, const EpsParts& parts) {
  if (!parts.start && !parts.factor && !parts.steps) return;
  const auto& v = cfg.eps.values;
  const double start = parts.start.value_or(v.empty() ? 1e-2 : v.front());
  const double factor = parts.factor.value_or(v.size() >= 2 ? v[1] / v[0] : 0.5);
  const int steps = parts.steps.value_or(static_cast<int>(v.size()));
  if (steps < 3) throw ConfigError("eps steps must be at least 3");
  if (!(start > 0.0)) throw ConfigError("eps start must be positive");
  if (!(factor > 0.0 && factor < 1.0)) throw ConfigError("eps factor must lie in (0, 1)");
  EpsSchedule s = EpsSchedule::geometric(start, factor, steps);
  s.extrapolation = cfg.eps.extrapolation;
  s.stall_tolerance = cfg.eps.stall_tolerance;
  cfg.eps = std::move(s);
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::Xi: return "xi";
    case Command::Det: return "det";
    case Command::BsVerify: return "bs-verify";
    case Command::BsLimit: return "bs-limit";
    case Command::BkVerify: return "bk-verify";
    case Command::Ssf: return "ssf";
    case Command::Sweep: return "sweep";
  }
  return "unknown";
}

Command parse_command(std::string_view text) {
  const std::string s = normalize(text);
  for (Command c : {Command::Xi, Command::Det, Command::BsVerify, Command::BsLimit, Command::BkVerify, Command::Ssf,
                    Command::Sweep})
    if (s == to_string(c)) return c;
  throw ConfigError("unknown command '" + std::string(text) + "'");
}

LimitMode parse_limit_mode(std::string_view text) {
  const std::string s = normalize(text);
  for (LimitMode m : {LimitMode::BothRegularized, LimitMode::NInvertible, LimitMode::Boundary})
    if (s == to_string(m)) return m;
  throw ConfigError("unknown limit mode '" + std::string(text) + "'");
}

void apply_json(ExperimentConfig& cfg, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"command", "seed",  "dim",  "blocks", "trials", "tol",
                                           "eps",     "ensemble", "mode", "grid", "matrix", "out"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

  if (j.contains("command")) cfg.command = parse_command(get_as<std::string>(j["command"], "command"));
  if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("dim")) cfg.dim = get_as<int>(j["dim"], "dim");
  if (j.contains("blocks")) cfg.blocks = get_as<std::string>(j["blocks"], "blocks");
  if (j.contains("trials")) cfg.trials = get_as<int>(j["trials"], "trials");
  if (j.contains("tol")) cfg.tol = get_as<double>(j["tol"], "tol");
  if (j.contains("ensemble")) {
    try {
      cfg.ensemble = parse_ensemble(get_as<std::string>(j["ensemble"], "ensemble"));
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("mode")) cfg.limit_mode = parse_limit_mode(get_as<std::string>(j["mode"], "mode"));
  if (j.contains("grid")) cfg.grid = get_as<std::vector<double>>(j["grid"], "grid");
  if (j.contains("matrix")) {
    const json& m = j["matrix"];
    cfg.matrices = m.is_array() ? get_as<std::vector<std::string>>(m, "matrix")
                                : std::vector<std::string>{get_as<std::string>(m, "matrix")};
  }
  if (j.contains("out")) cfg.out = get_as<std::string>(j["out"], "out");
  if (j.contains("eps")) {
    const json& e = j["eps"];
    if (!e.is_object()) throw ConfigError("config key 'eps' must be an object");
    static const std::set<std::string> eps_keys{"start", "factor", "steps", "extrapolation", "stall_tolerance"};
    for (const auto& [key, _] : e.items())
      if (!eps_keys.count(key)) throw ConfigError("unknown eps key '" + key + "'");
    if (e.contains("extrapolation")) {
      const std::string x = normalize(get_as<std::string>(e["extrapolation"], "eps.extrapolation"));
      if (x == "richardson") cfg.eps.extrapolation = Extrapolation::Richardson;
      else if (x == "none") cfg.eps.extrapolation = Extrapolation::None;
      else throw ConfigError("eps.extrapolation must be 'richardson' or 'none'");
    }
    if (e.contains("stall_tolerance"))
      cfg.eps.stall_tolerance = get_as<double>(e["stall_tolerance"], "eps.stall_tolerance");
    EpsParts parts;
    if (e.contains("start")) parts.start = get_as<double>(e["start"], "eps.start");
    if (e.contains("factor")) parts.factor = get_as<double>(e["factor"], "eps.factor");
    if (e.contains("steps")) parts.steps = get_as<int>(e["steps"], "eps.steps");
    rebuild_schedule(cfg, parts);
  }
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.dim < 2 || cfg.dim > 256) throw ConfigError("dim must lie in [2, 256]");
  if (cfg.tol && !(*cfg.tol > 0.0)) throw ConfigError("tol must be positive");
  if (cfg.blocks) {
    try {
      (void)AlgebraDescriptor::parse(*cfg.blocks);
    } catch (const Error& e) {
      throw ConfigError(std::string("bad --blocks: ") + e.what());
    }
  }
  try {
    cfg.eps.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("bad eps schedule: ") + e.what());
  }
}

ExperimentConfig parse_config(int argc, const char* const* argv) {
  CLI::App app{"Relative index toolkit: verifies xi-index identities on seeded random ensembles", "xi_index"};
  std::string config_path, command, blocks, ensemble, mode, out;
  std::vector<std::string> matrices;
  std::vector<double> grid;
  std::uint64_t seed = 0;
  int dim = 0, trials = 0, eps_steps = 0;
  double tol = 0, eps_start = 0, eps_factor = 0;

  app.add_option("--config", config_path, "JSON config file (flags override its keys)");
  auto* o_command = app.add_option("--command,command", command,
                                   "xi | det | bs-verify | bs-limit | bk-verify | ssf | sweep");
  auto* o_seed = app.add_option("--seed", seed, "Run seed (required, here or in the config)");
  auto* o_dim = app.add_option("--dim", dim, "Maximum total dimension of trial algebras");
  auto* o_blocks = app.add_option("--blocks", blocks, "Fixed descriptor, e.g. 2x0.25,2x0.25");
  auto* o_trials = app.add_option("--trials", trials, "Number of trials");
  auto* o_tol = app.add_option("--tol", tol, "Override the primary tolerance of every check");
  auto* o_eps_start = app.add_option("--eps-start", eps_start, "First eps of the schedule");
  auto* o_eps_factor = app.add_option("--eps-factor", eps_factor, "Ratio between successive eps");
  auto* o_eps_steps = app.add_option("--eps-steps", eps_steps, "Number of eps values");
  auto* o_ensemble = app.add_option("--ensemble", ensemble,
                                    "hermitian-gaussian | dissipative | positive-definite | unitary-haar-like");
  auto* o_mode = app.add_option("--mode", mode, "bs-limit mode: both-regularized | n-invertible | boundary");
  auto* o_grid = app.add_option("--grid", grid, "ssf spectral parameters")->delimiter(',');
  auto* o_matrix = app.add_option("--matrix", matrices, "Operator file(s); repeatable");
  auto* o_out = app.add_option("--out", out, "NDJSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  ExperimentConfig cfg;
  bool have_seed = false;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("malformed config: ") + e.what());
    }
    apply_json(cfg, j);
    have_seed = j.is_object() && j.contains("seed");
  }

  if (o_command->count()) cfg.command = parse_command(command);
  if (o_seed->count()) {
    cfg.seed = seed;
    have_seed = true;
  }
  if (o_dim->count()) cfg.dim = dim;
  if (o_blocks->count()) cfg.blocks = blocks;
  if (o_trials->count()) cfg.trials = trials;
  if (o_tol->count()) cfg.tol = tol;
  if (o_ensemble->count()) {
    try {
      cfg.ensemble = parse_ensemble(ensemble);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (o_mode->count()) cfg.limit_mode = parse_limit_mode(mode);
  if (o_grid->count()) cfg.grid = grid;
  if (o_matrix->count()) cfg.matrices = matrices;
  if (o_out->count()) cfg.out = out;
  EpsParts parts;
  if (o_eps_start->count()) parts.start = eps_start;
  if (o_eps_factor->count()) parts.factor = eps_factor;
  if (o_eps_steps->count()) parts.steps = eps_steps;
  rebuild_schedule(cfg, parts);

  if (!have_seed) throw ConfigError("a seed is required (--seed or \"seed\" in the config)");

  if (const char* env = std::getenv("XI_INDEX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("XI_INDEX_THREADS must be a positive integer");
    cfg.threads = static_cast<int>(v);
  }
  validate(cfg);
  return cfg;
}

}  // namespace xidx::harness
