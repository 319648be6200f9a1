#pragma once

// eps -> 0 boundary values. A quantity f(eps) is sampled along a decreasing
// schedule and extrapolated to eps = 0 by polynomial (Richardson/Neville)
// extrapolation on the trailing samples. Convergence is certified a
// posteriori: the extrapolated estimates must form a Cauchy tail below the
// stall tolerance.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace xidx {

enum class Extrapolation { None, Richardson };

struct EpsSchedule {
  std::vector<double> values;
  Extrapolation extrapolation = Extrapolation::Richardson;
  double stall_tolerance = 1e-7;

  /// start * factor^k, k = 0..steps-1. Default: 1e-2 * 2^-k, k = 0..12.
  static EpsSchedule geometric(double start = 1e-2, double factor = 0.5, int steps = 13);

  /// Throws DomainError unless values are positive, strictly decreasing and
  /// at least three, and the stall tolerance is positive.
  void validate() const;
};

template <class Value>
struct LimitEstimate {
  Value limit;
  /// f(eps_k) along the schedule.
  std::vector<Value> samples;
  /// Extrapolated estimates (the raw samples when extrapolation is None).
  std::vector<Value> estimates;
  /// |estimate_k - estimate_{k-1}|.
  std::vector<double> differences;
  bool converged = false;
};

/// Value at 0 of the interpolating polynomial through (x_i, y_i) (Neville).
template <class Value>
Value extrapolate_to_zero(std::span<const double> x, std::span<const Value> y) {
  std::vector<Value> p(y.begin(), y.end());
  const std::size_t n = p.size();
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t i = 0; i + m < n; ++i) {
      const double xi = x[i];
      const double xm = x[i + m];
      Value next = (-xm / (xi - xm)) * p[i];
      next += (xi / (xi - xm)) * p[i + 1];
      p[i] = std::move(next);
    }
  }
  return p.front();
}

/// Samples f along the schedule and extrapolates. Does not throw on
/// non-convergence; callers inspect `converged`.
template <class Value, class F, class Norm>
LimitEstimate<Value> eps_limit(F&& f, const EpsSchedule& schedule, Norm&& norm) {
  schedule.validate();
  const auto& eps = schedule.values;
  std::vector<Value> samples;
  for (double e : eps) samples.push_back(f(e));

  std::vector<Value> estimates;
  if (schedule.extrapolation == Extrapolation::None) {
    estimates = samples;
  } else {
    const std::size_t order = std::min<std::size_t>(2, eps.size() - 2);
    for (std::size_t k = order; k < eps.size(); ++k) {
      std::span<const double> xs(eps.data() + (k - order), order + 1);
      std::span<const Value> ys(samples.data() + (k - order), order + 1);
      estimates.push_back(extrapolate_to_zero<Value>(xs, ys));
    }
  }
  std::vector<double> d;
  for (std::size_t k = 1; k < estimates.size(); ++k) {
    Value diff = estimates[k];
    diff += -1.0 * estimates[k - 1];
    d.push_back(norm(diff));
  }

  const double tol = schedule.stall_tolerance;
  bool converged = false;
  if (d.size() == 1) {
    converged = d.back() <= tol;
  } else if (d.size() > 1) {
    const double last = d[d.size() - 1];
    const double prev = d[d.size() - 2];
    converged = last <= tol && (last <= prev || prev <= tol);
  }
  LimitEstimate<Value> out{estimates.back(), std::move(samples), std::move(estimates), std::move(d), converged};
  return out;
}

}  // namespace xidx
