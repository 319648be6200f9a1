#include "xi_index/xi.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "xi_index/errors.hpp"
#include "xi_index/oplog.hpp"

namespace xidx {

namespace {

constexpr double kPi = std::numbers::pi;
// Kernel eigenvalues within this factor of the threshold produce a warning.
constexpr double kNearThresholdFactor = 1e3;

void require_dissipative(const Operator& m) {
  const double defect = dissipativity_defect(m);
  if (defect > kStructureTolerance * std::max(1.0, norm(m))) {
    std::ostringstream os;
    os << "operator is not dissipative (lambda_min(Im M) = " << -defect << ")";
    throw DomainError(os.str());
  }
}

double log_route_trace(const Operator& m) { return trace_log(m, Branch::ImCut).imag() / kPi; }

Operator log_route_operator(const Operator& m) { return (1.0 / kPi) * im_part(log_op(m, Branch::ImCut)); }

std::string format_history(const std::vector<double>& d) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < d.size(); ++i) os << (i ? ", " : "") << d[i];
  os << ']';
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// EpsSchedule
// ---------------------------------------------------------------------------

EpsSchedule EpsSchedule::geometric(double start, double factor, int steps) {
  EpsSchedule s;
  double e = start;
  for (int k = 0; k < steps; ++k, e *= factor) s.values.push_back(e);
  return s;
}

void EpsSchedule::validate() const {
  if (values.size() < 3) throw DomainError("eps schedule needs at least three values");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) throw DomainError("eps schedule values must be positive");
    if (i && !(values[i] < values[i - 1])) throw DomainError("eps schedule must be strictly decreasing");
  }
  if (!(stall_tolerance > 0.0)) throw DomainError("eps schedule stall tolerance must be positive");
}

// ---------------------------------------------------------------------------
// Xi-operator
// ---------------------------------------------------------------------------

const char* to_string(XiMethod m) noexcept {
  switch (m) {
    case XiMethod::InvertibleLog: return "invertible-log";
    case XiMethod::SelfAdjointSpectral: return "self-adjoint-spectral";
    case XiMethod::EpsLimit: return "eps-limit";
  }
  return "unknown";
}

XiMethod select_method(const Operator& m) {
  if (is_self_adjoint(m)) return XiMethod::SelfAdjointSpectral;
  if (is_invertible(m)) return XiMethod::InvertibleLog;
  return XiMethod::EpsLimit;
}

SignProjections sign_projections(const Operator& h) {
  const SpectralDecomposition d = spectral(h);
  double radius = 0.0;
  for (double l : d.eigenvalues) radius = std::max(radius, std::abs(l));
  const double kernel_tol = kKernelTolerance * radius;

  SignProjections out{Operator::zero(h.algebra()), Operator::zero(h.algebra()), {}};
  for (std::size_t i = 0; i < d.eigenvalues.size(); ++i) {
    const double l = d.eigenvalues[i];
    if (std::abs(l) <= kernel_tol) {
      out.kernel += d.projections[i];
    } else {
      if (l < 0.0) out.negative += d.projections[i];
      if (std::abs(l) <= kNearThresholdFactor * kernel_tol) {
        std::ostringstream os;
        os << "eigenvalue " << l << " is near the kernel threshold " << kernel_tol;
        out.warnings.push_back(os.str());
      }
    }
  }
  return out;
}

XiResult compute_xi(const Operator& m, const XiStrategy& strategy) {
  require_dissipative(m);
  switch (strategy.method) {
    case XiMethod::SelfAdjointSpectral: {
      if (!is_self_adjoint(m)) throw DomainError("self-adjoint spectral strategy needs a self-adjoint operator");
      auto sp = sign_projections(m);
      Operator value = sp.negative + 0.5 * sp.kernel;
      const double tr = trace(value).real();
      return XiResult{std::move(value), tr, strategy.method, std::move(sp.warnings), {}, {}};
    }
    case XiMethod::InvertibleLog: {
      if (!is_invertible(m)) throw DomainError("invertible-log strategy needs an invertible operator");
      Operator value = log_route_operator(m);
      const double tr = trace(value).real();
      return XiResult{std::move(value), tr, strategy.method, {}, {}, {}};
    }
    case XiMethod::EpsLimit: {
      const Complex i(0.0, 1.0);
      auto traces = eps_limit<double>([&](double e) { return log_route_trace(m.shifted(i * e)); }, strategy.schedule,
                                      [](double x) { return std::abs(x); });
      if (!traces.converged) {
        throw NumericError("eps-limit of tau[Xi(M + i eps)] did not settle below the stall tolerance; differences " +
                               format_history(traces.differences),
                           traces.differences);
      }
      auto ops = eps_limit<Operator>([&](double e) { return log_route_operator(m.shifted(i * e)); },
                                     strategy.schedule, [](const Operator& x) { return norm(x); });
      std::vector<std::string> warnings;
      if (!ops.converged)
        warnings.push_back("operator-level eps extrapolation did not settle; differences " +
                           format_history(ops.differences));
      Operator value = re_part(ops.limit);
      const double tr = trace(value).real();
      return XiResult{std::move(value), tr, strategy.method, std::move(warnings), std::move(traces.samples),
                      std::move(traces.differences)};
    }
  }
  throw DomainError("unknown Xi strategy");
}

Operator xi_operator(const Operator& m, const XiStrategy& strategy) { return compute_xi(m, strategy).value; }

Operator xi_operator(const Operator& m) { return xi_operator(m, XiStrategy{select_method(m)}); }

double xi_trace(const Operator& m, const XiStrategy& strategy) {
  switch (strategy.method) {
    case XiMethod::SelfAdjointSpectral:
      return compute_xi(m, strategy).trace;
    case XiMethod::InvertibleLog:
      require_dissipative(m);
      if (!is_invertible(m)) throw DomainError("invertible-log strategy needs an invertible operator");
      return log_route_trace(m);
    case XiMethod::EpsLimit: {
      require_dissipative(m);
      const Complex i(0.0, 1.0);
      auto traces = eps_limit<double>([&](double e) { return log_route_trace(m.shifted(i * e)); }, strategy.schedule,
                                      [](double x) { return std::abs(x); });
      if (!traces.converged) {
        throw NumericError("eps-limit of tau[Xi(M + i eps)] did not settle below the stall tolerance; differences " +
                               format_history(traces.differences),
                           traces.differences);
      }
      return traces.limit;
    }
  }
  throw DomainError("unknown Xi strategy");
}

double xi_trace(const Operator& m, const XiPolicy& policy) {
  return xi_trace(m, XiStrategy{policy.method.value_or(select_method(m)), policy.schedule});
}

double xi_index(const Operator& m, const Operator& n, const XiPolicy& policy) {
  require_same_algebra(m, n, "xi_index");
  return xi_trace(n, policy) - xi_trace(m, policy);
}

// ---------------------------------------------------------------------------
// Self-adjoint specializations
// ---------------------------------------------------------------------------

double tau_fredholm_index(const Operator& p, const Operator& q) {
  require_same_algebra(p, q, "tau_fredholm_index");
  constexpr double tol = 1e-9;
  if (projection_defect(p) > tol || projection_defect(q) > tol)
    throw DomainError("tau_fredholm_index: arguments must be orthogonal projections");
  return trace(p - q).real();
}

SelfAdjointSplit xi_selfadjoint_split(const Operator& h, const Operator& h0) {
  require_same_algebra(h, h0, "xi_selfadjoint_split");
  if (!is_self_adjoint(h) || !is_self_adjoint(h0))
    throw DomainError("xi_selfadjoint_split: both operators must be self-adjoint");
  const auto s = sign_projections(h);
  const auto s0 = sign_projections(h0);
  SelfAdjointSplit out;
  out.continuous = tau_fredholm_index(s0.negative, s.negative);
  out.kernel = 0.5 * tau_fredholm_index(s0.kernel, s.kernel);
  out.total = out.continuous + out.kernel;
  return out;
}

double morse_index(const Operator& h) {
  if (!is_self_adjoint(h)) throw DomainError("morse_index: operator must be self-adjoint");
  if (!is_invertible(h)) throw DomainError("morse_index: operator must be invertible");
  return xi_trace(h, XiStrategy{XiMethod::SelfAdjointSpectral});
}

std::vector<std::pair<double, double>> ssf_curve(const Operator& h, const Operator& h0,
                                                 std::span<const double> grid) {
  require_same_algebra(h, h0, "ssf_curve");
  if (!is_self_adjoint(h) || !is_self_adjoint(h0)) throw DomainError("ssf_curve: operators must be self-adjoint");
  const XiPolicy spectral_policy{XiMethod::SelfAdjointSpectral};
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double lambda : grid)
    out.emplace_back(lambda, xi_index(h.shifted(-lambda), h0.shifted(-lambda), spectral_policy));
  return out;
}

}  // namespace xidx
