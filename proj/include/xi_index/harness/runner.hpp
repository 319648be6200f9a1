#pragma once

// Sweep orchestration. Every trial draws its operators from a Generator
// seeded by trial_seed(seed, trial), so the record list is independent of
// how trials are spread over worker threads.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "xi_index/harness/config.hpp"
#include "xi_index/harness/ensemble.hpp"
#include "xi_index/report.hpp"

namespace xidx::harness {

/// Condition number above which a random draw is rejected and redrawn.
inline constexpr double kResampleCondition = 1e8;

struct TrialOutcome {
  std::int64_t trial = 0;
  /// Finished reports, in dispatch order.
  std::vector<VerificationReport> reports;
  /// Error records for identities that raised.
  std::vector<nlohmann::json> errors;
};

struct RunSummary {
  std::size_t trials = 0;
  std::size_t reports = 0;
  std::size_t failed = 0;
  std::size_t errors = 0;
  double max_residual = 0.0;
  /// "identity/check" of the worst residual-to-tolerance ratio.
  std::string worst;
  double elapsed_ms = 0.0;

  bool passed() const noexcept { return failed == 0 && errors == 0; }
};

struct RunResult {
  /// NDJSON records ordered by trial, reports before errors within a trial.
  std::vector<nlohmann::json> records;
  RunSummary summary;

  /// 0 when everything passed, 1 otherwise.
  int exit_code() const noexcept { return summary.passed() ? 0 : 1; }
};

/// The identities a single trial of `cfg.command` runs. Exceptions from the
/// numerical modules are turned into error records; ConfigError propagates.
TrialOutcome run_trial(const ExperimentConfig& cfg, std::int64_t trial);

/// All trials (or all operators of the matrix files), in parallel when
/// allowed. `with_timing` = false drops elapsed_ms from the records.
RunResult run(const ExperimentConfig& cfg, bool with_timing = true);

/// Text of the summary printed by the CLI (no trailing newline).
std::string summary_line(const ExperimentConfig& cfg, const RunSummary& summary);

/// Comparison of every Xi strategy applicable to `m`: the Xi values, their
/// traces and the pairwise operator-norm differences.
VerificationReport xi_strategy_comparison(const Operator& m, const EpsSchedule& sched, double exact_tol = 1e-9,
                                          double limit_tol = 1e-6);

/// ssf consistency on a grid: values in [-1, 1], agreement with the
/// self-adjoint split, and with an eigenvalue-count oracle away from the
/// spectra.
VerificationReport ssf_check(const Operator& h, const Operator& h0, const std::vector<double>& grid,
                             double tolerance = 1e-9);

}  // namespace xidx::harness
