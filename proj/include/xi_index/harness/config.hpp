#pragma once

// Experiment configuration: a JSON file (--config) overlaid by command-line
// flags. Parsing failures raise ConfigError, which the CLI maps to exit 2.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xi_index/bschwinger.hpp"
#include "xi_index/harness/ensemble.hpp"
#include "xi_index/limits.hpp"

namespace xidx::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// --help was requested; carries the rendered help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { Xi, Det, BsVerify, BsLimit, BkVerify, Ssf, Sweep };

const char* to_string(Command c) noexcept;
Command parse_command(std::string_view text);
LimitMode parse_limit_mode(std::string_view text);

struct ExperimentConfig {
  Command command = Command::Sweep;
  std::uint64_t seed = 0;
  /// Maximum total dimension of random trial algebras.
  int dim = 8;
  /// Fixed descriptor ("2x0.25,2x0.25"); unset means random per trial.
  std::optional<std::string> blocks;
  int trials = 1;
  /// Overrides the primary tolerance of every check family when set.
  std::optional<double> tol;
  EpsSchedule eps = EpsSchedule::geometric();
  Ensemble ensemble = Ensemble::Dissipative;
  LimitMode limit_mode = LimitMode::NInvertible;
  /// Spectral parameters for the ssf command.
  std::vector<double> grid;
  std::vector<std::string> matrices;
  /// NDJSON report path; empty means no file.
  std::string out;
  /// Worker cap from XI_INDEX_THREADS; 0 means hardware concurrency.
  int threads = 0;
};

/// Applies the keys of a JSON config object onto `cfg`. Unknown keys are
/// rejected.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);

/// Full parse: --config file first, then flags, then XI_INDEX_THREADS.
/// Throws ConfigError or HelpRequested.
ExperimentConfig parse_config(int argc, const char* const* argv);

/// Consistency checks shared by both sources (seed present is enforced by
/// parse_config).
void validate(const ExperimentConfig& cfg);

}  // namespace xidx::harness
