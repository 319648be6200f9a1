#pragma once

// Operator logarithms under two branch conventions.
//
//   ImCut  cut along the negative imaginary semi-axis; arg z in (-pi/2, 3pi/2).
//          For a dissipative invertible M, (1/pi) Im log M is a contraction
//          between 0 and I.
//   ReCut  cut along the negative real semi-axis; arg z in (-pi, pi]. The
//          point -1 is accepted and receives argument +pi.

#include "xi_index/algebra.hpp"
#include "xi_index/quadrature.hpp"

namespace xidx {

enum class Branch { ImCut, ReCut };

const char* to_string(Branch b) noexcept;

/// Relative distance (w.r.t. the operator scale) below which an eigenvalue
/// is considered to sit on the ImCut branch cut.
inline constexpr double kCutProximity = 1e-12;

/// Scalar argument in the branch's range. `scale` sets the cut-proximity
/// threshold; throws BranchError for ImCut when z is within
/// kCutProximity * scale of the negative imaginary semi-axis.
double branch_arg(Complex z, Branch branch, double scale = 1.0);
Complex scalar_log(Complex z, Branch branch, double scale = 1.0);

/// Holomorphic functional calculus log. Uses the Schur form for (numerically)
/// normal blocks and an eigenvector similarity when its condition number is
/// below 1e6; otherwise falls back to log_integral() (ImCut, dissipative M).
/// Throws DomainError for singular M, BranchError near the cut, NumericError
/// when no route applies.
Operator log_op(const Operator& m, Branch branch);

/// log M = -i int_0^inf ((M + i lambda)^{-1} - (1 + i lambda)^{-1} I) d lambda,
/// evaluated after lambda = tan(theta). M must be dissipative and invertible.
/// Throws NumericError when the quadrature does not reach the tolerance.
Operator log_integral(const Operator& m, const QuadraturePolicy& quad = {});

/// -sum_{k>=1} (I - M)^k / k, truncated when a term's norm drops below 1e-14.
/// Requires ||M - I|| < 1 (DomainError otherwise).
Operator log_series(const Operator& m);

/// Self-adjoint argument of a unitary, spectrum in (-pi, pi]. Equals
/// Im log_op(S, ReCut). Throws DomainError when ||S*S - I|| > 1e-9.
Operator arg_unitary(const Operator& s);

/// tau[log M] computed from the eigenvalues of every block (trace of the
/// holomorphic functional calculus). Same gates as log_op.
Complex trace_log(const Operator& m, Branch branch);

/// Matrix exponential, for round-trip checks.
Operator exp_op(const Operator& x);

}  // namespace xidx
