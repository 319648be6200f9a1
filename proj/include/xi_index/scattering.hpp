#pragma once

// Characteristic function of A + iB at the spectral point 0 and the
// Birman-Krein type formula
//
//   det_tau S = Theta exp(-2 pi i xi(H, H0)),   Theta = exp(-2 pi i xi(N, Re calN)),
//   calN = N - K (H0 + i0)^{-1} K*.

#include "xi_index/algebra.hpp"
#include "xi_index/limits.hpp"
#include "xi_index/report.hpp"

namespace xidx {

struct CharacteristicFunction {
  /// (iI - H)(iI + H)^{-1}, H = B^{1/2} A^{-1} B^{1/2}.
  Operator S;
  /// I - 2i B^{1/2} (A + iB)^{-1} B^{1/2}; equals S^{-1}.
  Operator S_alt;
  Operator H;
  double unitarity_residual = 0.0;
  /// min over spec(S) of |s + 1|.
  double distance_to_minus_one = 0.0;
  bool minus_one_in_spectrum = false;
};

/// A self-adjoint invertible, B self-adjoint PSD. DomainError otherwise.
CharacteristicFunction char_function(const Operator& a, const Operator& b);

/// xi(A, A + iB) = (1/pi) tau[arctan H] = (1/(2 pi)) tau[arg S], pairwise
/// within `tolerance`.
VerificationReport xi_dissipative_identity(const Operator& a, const Operator& b, double tolerance = 1e-8);

/// Boundary value K (H0 + i0)^{-1} K* for self-adjoint H0. Exists iff
/// E_{H0}({0}) K* = 0 (within 1e-8 ||K||); then equals K H0^+ K*, certified
/// against eps-extrapolation within 1e-6. Throws ExistenceError otherwise.
Operator boundary_resolvent(const Operator& h0, const Operator& k,
                            const EpsSchedule& sched = EpsSchedule::geometric());

struct BKInstance {
  Operator H0;
  Operator K;
  Operator N;

  /// H0 and N self-adjoint, N invertible, same algebra.
  void validate() const;
  /// H0 - K* N^{-1} K.
  Operator H() const;
};

/// Every link of
///   xi(H0, H) = xi(N, calN) = xi(N, Re calN) + xi(Re calN, calN),
///   xi(Re calN, calN) = (1/(2 pi)) tau[arg S],
/// the path determinant along t S + (1 - t) I against the closed form, and
/// the assembled formula. DomainError names the failed hypothesis.
VerificationReport birman_krein(const BKInstance& inst, const EpsSchedule& sched = EpsSchedule::geometric(),
                                double tolerance = 1e-7);

/// Same chain for prescribed boundary data calN (dissipative, calN and
/// Re calN invertible); xi(N, calN) plays the role of xi(H0, H).
VerificationReport birman_krein_synthetic(const Operator& n, const Operator& cal_n, double tolerance = 1e-7);

}  // namespace xidx
