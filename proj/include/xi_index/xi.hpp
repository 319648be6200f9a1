#pragma once

// The Xi-operator of a dissipative operator, the relative xi-index, and the
// self-adjoint specializations built on top of it.
//
//   Xi(M)    = (1/pi) Im log M                     M invertible (ImCut branch)
//   Xi(H)    = E_H((-inf, 0)) + 1/2 E_H({0})       H self-adjoint
//   Xi(M)    = lim_{eps -> 0} Xi(M + i eps I)       any dissipative M
//   xi(M, N) = tau[Xi(N)] - tau[Xi(M)]

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xi_index/algebra.hpp"
#include "xi_index/limits.hpp"

namespace xidx {

enum class XiMethod { InvertibleLog, SelfAdjointSpectral, EpsLimit };

const char* to_string(XiMethod m) noexcept;

/// Eigenvalues with |lambda| <= kKernelTolerance * ||H|| count as kernel.
inline constexpr double kKernelTolerance = 1e-8;

struct XiStrategy {
  XiMethod method = XiMethod::InvertibleLog;
  EpsSchedule schedule = EpsSchedule::geometric();
};

/// Strategy override for xi_index; `method` unset means auto-selection.
struct XiPolicy {
  std::optional<XiMethod> method;
  EpsSchedule schedule = EpsSchedule::geometric();
};

struct XiResult {
  Operator value;
  /// tau[value].
  double trace = 0.0;
  XiMethod method = XiMethod::InvertibleLog;
  /// Near-threshold kernel eigenvalues, operator-level extrapolation issues.
  std::vector<std::string> warnings;
  /// EpsLimit only: tau[Xi(M + i eps)] along the schedule and the successive
  /// differences of the extrapolated estimates.
  std::vector<double> trace_history;
  std::vector<double> differences;
};

/// Self-adjoint > invertible > eps-limit.
XiMethod select_method(const Operator& m);

/// Throws DomainError for non-dissipative input or when the method's
/// precondition fails; NumericError (with history) when the eps-limit stalls.
XiResult compute_xi(const Operator& m, const XiStrategy& strategy);
Operator xi_operator(const Operator& m, const XiStrategy& strategy);
Operator xi_operator(const Operator& m);

/// tau[Xi(M)] computed without forming the operator where possible
/// (eigenvalue sums for the log route, Richardson on traces for eps-limit).
double xi_trace(const Operator& m, const XiStrategy& strategy);
double xi_trace(const Operator& m, const XiPolicy& policy = {});

double xi_index(const Operator& m, const Operator& n, const XiPolicy& policy = {});

/// index_tau(P, Q) = tau(P - Q). Throws DomainError unless both are
/// orthogonal projections within 1e-9.
double tau_fredholm_index(const Operator& p, const Operator& q);

struct SignProjections {
  Operator negative;
  Operator kernel;
  std::vector<std::string> warnings;
};

/// E_H((-inf, 0)) and E_H({0}) with the kernel tolerance applied.
SignProjections sign_projections(const Operator& h);

struct SelfAdjointSplit {
  /// index_tau(E_{H0}(R_-), E_H(R_-)).
  double continuous = 0.0;
  /// 1/2 index_tau(E_{H0}({0}), E_H({0})).
  double kernel = 0.0;
  double total = 0.0;
};

SelfAdjointSplit xi_selfadjoint_split(const Operator& h, const Operator& h0);

/// tau[Xi(H)] for self-adjoint invertible H: tau-dimension of the negative
/// spectral subspace.
double morse_index(const Operator& h);

/// (lambda, xi(H - lambda, H0 - lambda)) per grid point.
std::vector<std::pair<double, double>> ssf_curve(const Operator& h, const Operator& h0,
                                                 std::span<const double> grid);

}  // namespace xidx
