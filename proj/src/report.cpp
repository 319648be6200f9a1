#include "xi_index/report.hpp"

#include <algorithm>
#include <cmath>

namespace xidx {

Check& VerificationReport::add_check(std::string name, Complex lhs, Complex rhs, double tolerance) {
  const double r = std::abs(lhs - rhs);
  checks.push_back(Check{std::move(name), lhs, rhs, std::isfinite(r) ? r : HUGE_VAL, tolerance});
  return checks.back();
}

Check& VerificationReport::add_residual(std::string name, double residual, double tolerance) {
  checks.push_back(Check{std::move(name), residual, 0.0, std::isfinite(residual) ? residual : HUGE_VAL, tolerance});
  return checks.back();
}

bool VerificationReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed(); });
}

const Check* VerificationReport::worst() const noexcept {
  const Check* out = nullptr;
  double ratio = -1.0;
  for (const auto& c : checks) {
    const double r = c.tolerance > 0.0 ? c.residual / c.tolerance : (c.residual > 0.0 ? HUGE_VAL : 0.0);
    if (r > ratio) {
      ratio = r;
      out = &c;
    }
  }
  return out;
}

double VerificationReport::max_residual() const noexcept {
  double m = 0.0;
  for (const auto& c : checks) m = std::max(m, c.residual);
  return m;
}

InputDigest digest_of(const AlgebraDescriptor& alg, std::uint64_t seed, std::int64_t trial) {
  InputDigest d;
  d.seed = seed;
  d.trial = trial;
  for (const auto& b : alg.blocks()) d.dims.push_back(b.dim);
  d.descriptor = alg.to_string();
  return d;
}

}  // namespace xidx
