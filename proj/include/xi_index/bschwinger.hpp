#pragma once

// Schur complements of the Herglotz block matrix
//
//   M(z) = [[M + z, K*], [K, N + z]]
//   calM(z) = M + z - K*(N + z)^{-1} K,   calN(z) = N + z - K(M + z)^{-1} K*
//
// and the Birman-Schwinger type identities relating
//   xi(M, M - K* N^{-1} K)   and   xi(N, N - K M^{-1} K*).
//
// Sign convention for the self-adjoint specialization: H = H0 - K* N^{-1} K.

#include <utility>

#include "xi_index/algebra.hpp"
#include "xi_index/limits.hpp"
#include "xi_index/report.hpp"

namespace xidx {

inline constexpr const char* kPerturbationConvention = "H = H0 - K* N^{-1} K";

struct BSInstance {
  Operator M;
  Operator N;
  Operator K;

  /// Same algebra for all three; M and N dissipative. Throws otherwise.
  void validate() const;
  /// The instance with the roles of the two diagonal entries exchanged:
  /// (N, M, K*).
  BSInstance swapped() const;
};

/// (calM(z), calN(z)). DomainError when M + z or N + z is singular.
std::pair<Operator, Operator> schur_complements(const BSInstance& inst, Complex z);

/// max of ||[M(z)^{-1}]_11 - calM(z)^{-1}|| and ||[M(z)^{-1}]_22 - calN(z)^{-1}||,
/// relative to max(1, ||M(z)^{-1}||), with the block inverse formed directly.
double schur_inverse_residual(const BSInstance& inst, Complex z);

/// ||calN^{-1} - (N+z)^{-1} - (N+z)^{-1} K calM^{-1} K* (N+z)^{-1}||, relative
/// to max(1, ||calN^{-1}||).
double resolvent_identity_residual(const BSInstance& inst, Complex z);

/// xi(M, M - K*N^{-1}K) = xi(N, N - K M^{-1} K*) at tolerance 1e-8.
/// DomainError listing the singular operators when a precondition fails; a
/// mismatch between the invertibility of the two complements is reported
/// as a failed check instead.
VerificationReport verify_bs(const BSInstance& inst, double tolerance = 1e-8);

enum class LimitMode { BothRegularized, NInvertible, Boundary };

const char* to_string(LimitMode m) noexcept;

/// eps -> 0 variants:
///   BothRegularized  lim xi(M + ie, calM-side) = lim xi(N + ie, calN-side)
///   NInvertible      xi(M, M - K*N^{-1}K) = lim xi(N, N - K(M + ie)^{-1}K*)
///   Boundary         xi(M, M - K*N^{-1}K) = xi(N, N - K(M + i0)^{-1}K*)
/// NumericError (with history) when an extrapolation stalls.
VerificationReport bs_limit(const BSInstance& inst, const EpsSchedule& sched, LimitMode mode,
                            double tolerance = 1e-6);

/// Block-matrix corollary: both two-term splittings of 2 tau2[Xi(M)], in the
/// isometry form and in the Schur complement form, the inverse-block
/// identities U* M^{-1} U = (M - K*N^{-1}K)^{-1}, W* M^{-1} W =
/// (N - K M^{-1} K*)^{-1}, and the off-diagonal xi relations.
VerificationReport block_corollary(const BSInstance& inst, double tolerance = 1e-8);

/// Self-adjoint specialization with H = H0 - K*N^{-1}K:
///   index_tau(E_{H0}(R-), E_H(R-)) = index_tau(E_N(R-), E_{N - K H0^{-1} K*}(R-)).
/// When H0 > 0 and N = I, also the counting form
///   Dim E_{H0 - V}(R-) = Dim E_{V^{1/2} H0^{-1} V^{1/2}}((1, inf)),  V = K*K.
VerificationReport sa_specialization(const Operator& h0, const Operator& k, const Operator& n,
                                     double tolerance = 1e-10);

/// (K, N) = (|V|^{1/2}, -sgn V) with sgn 0 = 1, so that V = -K* N^{-1} K.
std::pair<Operator, Operator> factor_perturbation(const Operator& v);

/// Large-y behaviour of the three logarithms entering the additivity
/// identity 2 tau2[log M(z)] = tau[log calM(z)] + tau[log(N + z)]:
/// decay rate of |tau[log X(iy)] - log(iy)| over y in {1e2, 1e3, 1e4}
/// (must be at least 1/y) and the identity itself at those points.
VerificationReport herglotz_asymptotics(const BSInstance& inst);

}  // namespace xidx
