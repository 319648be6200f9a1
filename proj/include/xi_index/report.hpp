#pragma once

// Structured record of one identity check. Every verification routine in the
// toolkit returns a VerificationReport; the harness serializes them.

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xi_index/algebra.hpp"

namespace xidx {

struct Check {
  std::string name;
  Complex lhs;
  Complex rhs;
  double residual = 0.0;
  double tolerance = 0.0;

  bool passed() const noexcept { return residual <= tolerance; }
};

struct InputDigest {
  std::uint64_t seed = 0;
  std::int64_t trial = -1;
  std::vector<int> dims;
  std::string descriptor;
};

struct VerificationReport {
  std::string identity;
  /// Short human label of the identity being checked.
  std::string anchor;
  InputDigest inputs;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  /// Auxiliary scalar quantities (named), e.g. individual xi values.
  std::map<std::string, Complex> values;
  /// eps-histories and similar sequences.
  std::map<std::string, std::vector<double>> histories;
  /// Free-form labelled facts (conventions, chosen routes).
  std::map<std::string, std::string> notes;
  double elapsed_ms = 0.0;

  /// Appends a check with residual |lhs - rhs|.
  Check& add_check(std::string name, Complex lhs, Complex rhs, double tolerance);
  /// Appends a check with an explicitly computed residual.
  Check& add_residual(std::string name, double residual, double tolerance);

  bool passed() const noexcept;
  /// Check with the largest residual / tolerance ratio; nullptr when empty.
  const Check* worst() const noexcept;
  double max_residual() const noexcept;
};

using Clock = std::chrono::steady_clock;

inline void stamp_elapsed(VerificationReport& report, Clock::time_point start) {
  report.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Fills the dims/descriptor part of a digest from an operator's algebra.
InputDigest digest_of(const AlgebraDescriptor& alg, std::uint64_t seed = 0, std::int64_t trial = -1);

}  // namespace xidx
