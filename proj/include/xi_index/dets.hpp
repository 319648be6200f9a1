#pragma once

// Determinants on a finite algebra.
//
//   Delta(A)          = exp(tau[log |A|])                  Fuglede-Kadison
//   Delta(t -> H_t)   = exp(int_0^1 tau[H_t' H_t^{-1}] dt)  de la Harpe-Skandalis
//   det_tau(M)        = exp(tau[log M])                    closed forms of the
//                                                          path determinant for
//                                                          dissipative / unitary
//                                                          endpoints

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "xi_index/algebra.hpp"
#include "xi_index/report.hpp"

namespace xidx {

enum class PathKind { Linear, Polygonal, CayleyScaled, Sampled, Analytic, Product };

const char* to_string(PathKind k) noexcept;

/// C^1 path t -> H_t on [0, 1] with derivative access.
class OperatorPath {
 public:
  using Fn = std::function<Operator(double)>;

  /// (1 - t) H0 + t H1.
  static OperatorPath linear(const Operator& h0, const Operator& h1);
  /// Piecewise linear through the vertices, legs of equal parameter length.
  static OperatorPath polygonal(std::vector<Operator> vertices);
  /// U_t = (iI - tH)(iI + tH)^{-1} for self-adjoint H.
  static OperatorPath cayley_scaled(const Operator& h);
  /// Cubic Hermite interpolation of samples (t_k, H_k) with knot derivatives
  /// from central differences (one-sided at the ends). Needs t_0 = 0,
  /// t_last = 1, strictly increasing t and at least 33 samples.
  static OperatorPath sampled(std::vector<std::pair<double, Operator>> samples);
  /// Closed-form path with user-supplied derivative.
  static OperatorPath analytic(AlgebraDescriptor alg, Fn value, Fn derivative);
  /// Pointwise product t -> P_t Q_t.
  static OperatorPath product(const OperatorPath& p, const OperatorPath& q);

  Operator value(double t) const { return value_(t); }
  Operator derivative(double t) const { return derivative_(t); }
  PathKind kind() const noexcept { return kind_; }
  const AlgebraDescriptor& algebra() const noexcept { return algebra_; }
  /// Interior parameters where the path is only C^0 or C^1 (quadrature
  /// splits there).
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

 private:
  OperatorPath(PathKind kind, AlgebraDescriptor alg, Fn value, Fn derivative, std::vector<double> breakpoints);

  PathKind kind_;
  AlgebraDescriptor algebra_;
  Fn value_;
  Fn derivative_;
  std::vector<double> breakpoints_;
};

struct PathQuadrature {
  double abs_tol = 1e-8;
  int max_subintervals = 4000;
  /// Nodes whose condition number exceeds this raise PathError.
  double singular_condition = kSingularCondition;
};

struct PathDeterminant {
  Complex value;
  /// int_0^1 tau[H' H^{-1}] dt; its imaginary part is the continuously
  /// accumulated phase (not reduced mod 2 pi).
  Complex log_value;
  double error_estimate = 0.0;
  int evaluations = 0;

  double phase() const noexcept { return log_value.imag(); }
};

/// Fuglede-Kadison determinant from singular values. DomainError if singular.
double fk_det(const Operator& a);

/// Throws PathError (with t) at a singular node, NumericError when the
/// quadrature does not converge.
PathDeterminant dlhs_det_path(const OperatorPath& path, const PathQuadrature& quad = {});

/// exp(tau[log M]) on the ImCut branch; M dissipative and invertible.
Complex det_tau_dissipative(const Operator& m);
/// exp(tau[log U]) on the ReCut branch; U unitary within 1e-9.
Complex det_tau_unitary(const Operator& u);

/// A nonsingular path from I to M inside the dissipative operators: linear
/// when no eigenvalue of M is close to the negative real axis, otherwise the
/// two legs I -> i max(1, ||M||) I -> M. `polygonal` reports the choice.
struct InClassPath {
  OperatorPath path;
  bool polygonal = false;
};
InClassPath dissipative_path(const Operator& m);

/// det_tau M = exp(i pi tau[Xi(M)]) Delta(M), plus the path determinant of
/// an in-class path against the closed form.
VerificationReport polar_identity_check(const Operator& m);

}  // namespace xidx
