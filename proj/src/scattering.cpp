#include "xi_index/scattering.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "xi_index/dets.hpp"
#include "xi_index/errors.hpp"
#include "xi_index/oplog.hpp"
#include "xi_index/xi.hpp"

namespace xidx {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinusOneGap = 1e-12;

// PSD part of an operator that is PSD up to rounding.
Operator clamp_psd(const Operator& b) { return apply_hermitian(re_part(b), [](double x) { return std::max(x, 0.0); }); }

double tau_arg_over_2pi(const Operator& s) { return trace(arg_unitary(s)).real() / (2.0 * kPi); }

// Links shared by the matrix and the synthetic Birman-Krein chains. `xi_top`
// is the index that the assembled formula exponentiates: xi(H0, H) for
// matrix instances, the prescribed xi(N, calN) for synthetic ones.
void add_bk_chain(VerificationReport& report, const Operator& n, const Operator& cal_n, double xi_top,
                  double tolerance) {
  const Operator re_n = re_part(cal_n);
  std::vector<std::string> singular;
  if (!is_invertible(cal_n)) singular.push_back("calN");
  if (!is_invertible(re_n)) singular.push_back("Re calN");
  if (!singular.empty()) {
    std::string list;
    for (std::size_t i = 0; i < singular.size(); ++i) list += (i ? ", " : "") + singular[i];
    throw DomainError("hypothesis failed: " + list + " must have bounded inverses");
  }
  const double im_defect = dissipativity_defect(cal_n);
  if (im_defect > kStructureTolerance * std::max(1.0, norm(cal_n)))
    throw DomainError("hypothesis failed: calN is not dissipative");

  const double xi_n_caln = xi_index(n, cal_n);
  const double xi_n_re = xi_index(n, re_n);
  const double xi_re_caln = xi_index(re_n, cal_n);
  report.values["xi_N_calN"] = xi_n_caln;
  report.values["xi_N_ReN"] = xi_n_re;
  report.values["xi_ReN_calN"] = xi_re_caln;
  report.add_check("telescoping", xi_n_caln, xi_n_re + xi_re_caln, tolerance);

  const CharacteristicFunction cf = char_function(re_n, clamp_psd(im_part(cal_n)));
  if (cf.minus_one_in_spectrum) throw DomainError("hypothesis failed: -1 lies in the spectrum of S");
  const double xi_from_s = tau_arg_over_2pi(cf.S);
  report.values["xi_from_arg_S"] = xi_from_s;
  report.add_check("char-function", xi_re_caln, xi_from_s, tolerance);

  const Operator id = Operator::identity(n.algebra());
  const PathDeterminant path = dlhs_det_path(OperatorPath::linear(id, cf.S));
  const Complex closed = det_tau_unitary(cf.S);
  report.values["det_S_path"] = path.value;
  report.values["det_S_closed"] = closed;
  report.add_check("det-path-vs-closed", path.value, closed, tolerance);

  const Complex theta = std::exp(Complex(0.0, -2.0 * kPi * xi_n_re));
  report.values["theta"] = theta;
  report.add_residual("theta-range", std::max(0.0, std::abs(xi_n_re) - 1.0), 0.0);
  report.add_check("assembled", path.value, theta * std::exp(Complex(0.0, 2.0 * kPi * xi_top)), tolerance);
}

}  // namespace

CharacteristicFunction char_function(const Operator& a, const Operator& b) {
  require_same_algebra(a, b, "char_function");
  if (!is_self_adjoint(a)) throw DomainError("char_function: A must be self-adjoint");
  if (!is_self_adjoint(b)) throw DomainError("char_function: B must be self-adjoint");
  const Operator a_inv = inverse(a);
  const Operator sb = psd_sqrt(re_part(b));
  const Operator h = re_part(sb * a_inv * sb);
  const Complex i(0.0, 1.0);
  const Operator id = Operator::identity(a.algebra());

  Operator s = (Operator::scalar(a.algebra(), i) - h) * inverse(h.shifted(i));
  Operator s_alt = id - Complex(0.0, 2.0) * (sb * inverse(a + i * b) * sb);

  double gap = HUGE_VAL;
  for (const auto& block : eigenvalues(s))
    for (Eigen::Index j = 0; j < block.size(); ++j) gap = std::min(gap, std::abs(block(j) + 1.0));
  const double unit = unitarity_defect(s);
  return CharacteristicFunction{std::move(s), std::move(s_alt), h, unit, gap, gap <= kMinusOneGap};
}

VerificationReport xi_dissipative_identity(const Operator& a, const Operator& b, double tolerance) {
  const auto start = Clock::now();
  VerificationReport report;
  report.identity = "characteristic-function";
  report.anchor = "xi(A, A + iB) = (1/pi) tau[arctan H] = (1/2pi) tau[arg S]";
  report.inputs = digest_of(a.algebra());

  const Complex i(0.0, 1.0);
  const Operator ab = a + i * b;
  if (!is_invertible(a)) throw DomainError("xi_dissipative_identity: A is singular");
  if (!is_invertible(ab)) throw DomainError("xi_dissipative_identity: A + iB is singular");

  const CharacteristicFunction cf = char_function(a, b);
  const double q_xi = xi_index(a, ab);
  const double q_arctan = trace(apply_hermitian(cf.H, [](double x) { return std::atan(x); })).real() / kPi;
  const double q_arg = tau_arg_over_2pi(cf.S);
  const double q_alt = tau_arg_over_2pi(cf.S_alt);

  report.values["xi"] = q_xi;
  report.values["arctan"] = q_arctan;
  report.values["arg_S"] = q_arg;
  report.values["arg_S_resolvent_form"] = q_alt;
  report.values["tau_S"] = trace(cf.S);
  report.values["tau_S_resolvent_form"] = trace(cf.S_alt);
  report.values["unitarity_residual"] = cf.unitarity_residual;
  report.values["resolvent_form_vs_S_inverse"] = norm(cf.S_alt * cf.S - Operator::identity(a.algebra()));
  report.notes["char_function"] = "S = (iI - H)(iI + H)^{-1}, H = B^{1/2} A^{-1} B^{1/2}";
  if (std::abs(q_alt - q_arg) > tolerance)
    report.warnings.push_back(
        "resolvent form I - 2i B^{1/2}(A + iB)^{-1}B^{1/2} is S^{-1}: its argument has the opposite sign");

  report.add_check("xi-vs-arctan", q_xi, q_arctan, tolerance);
  report.add_check("xi-vs-arg", q_xi, q_arg, tolerance);
  report.add_check("arctan-vs-arg", q_arctan, q_arg, tolerance);
  report.add_residual("unitarity", cf.unitarity_residual, 1e-10);
  stamp_elapsed(report, start);
  return report;
}

Operator boundary_resolvent(const Operator& h0, const Operator& k, const EpsSchedule& sched) {
  require_same_algebra(h0, k, "boundary_resolvent");
  if (!is_self_adjoint(h0)) throw DomainError("boundary_resolvent: H0 must be self-adjoint");
  sched.validate();
  const Complex i(0.0, 1.0);
  const Operator kstar = k.adjoint();
  auto regularized = [&](double e) { return k * inverse(h0.shifted(i * e)) * kstar; };

  const Operator kernel = sign_projections(h0).kernel;
  const double obstruction = norm(kernel * kstar);
  if (obstruction > 1e-8 * norm(k)) {
    std::vector<double> history;
    for (double e : sched.values) history.push_back(norm(regularized(e)));
    std::ostringstream os;
    os << "boundary value K(H0 + i0)^{-1}K* does not exist: ||E_H0({0}) K*|| = " << obstruction;
    throw ExistenceError(os.str(), obstruction, std::move(history));
  }

  double radius = 0.0;
  for (const auto& ev : hermitian_eigenvalues(h0)) radius = std::max(radius, ev.cwiseAbs().maxCoeff());
  const double kernel_tol = kKernelTolerance * radius;
  const Operator pinv = apply_hermitian(h0, [kernel_tol](double x) { return std::abs(x) <= kernel_tol ? 0.0 : 1.0 / x; });
  Operator value = k * pinv * kstar;

  // The regularization error is a function of eps / gap, so the schedule is
  // measured in units of the smallest nonzero |eigenvalue| of H0.
  double gap = HUGE_VAL;
  for (const auto& ev : hermitian_eigenvalues(h0))
    for (double x : ev)
      if (std::abs(x) > kernel_tol) gap = std::min(gap, std::abs(x));
  EpsSchedule scaled = sched;
  if (gap < 1.0)
    for (double& e : scaled.values) e *= gap;

  // Cauchy test relative to the size of the value: a small eigenvalue of H0
  // makes the norm large without slowing convergence.
  const double scale = std::max(1.0, norm(value));
  auto est = eps_limit<Operator>(regularized, scaled, [scale](const Operator& x) { return norm(x) / scale; });
  const double mismatch = norm(est.limit - value) / scale;
  if (!est.converged || mismatch > 1e-6) {
    std::ostringstream os;
    os << "boundary_resolvent: eps-extrapolation does not certify the pseudoinverse value (gap " << mismatch << ")";
    throw NumericError(os.str(), est.differences);
  }
  return value;
}

void BKInstance::validate() const {
  require_same_algebra(H0, K, "BKInstance");
  require_same_algebra(H0, N, "BKInstance");
  if (!is_self_adjoint(H0)) throw DomainError("BKInstance: H0 must be self-adjoint");
  if (!is_self_adjoint(N)) throw DomainError("BKInstance: N must be self-adjoint");
  if (!is_invertible(N)) throw DomainError("BKInstance: N must be invertible");
}

Operator BKInstance::H() const { return re_part(H0 - K.adjoint() * inverse(N) * K); }

VerificationReport birman_krein(const BKInstance& inst, const EpsSchedule& sched, double tolerance) {
  const auto start = Clock::now();
  inst.validate();
  VerificationReport report;
  report.identity = "birman-krein";
  report.anchor = "det_tau S = Theta exp(-2 pi i xi(H, H0)), Theta = exp(-2 pi i xi(N, Re calN))";
  report.inputs = digest_of(inst.H0.algebra());
  report.notes["convention"] = "H = H0 - K* N^{-1} K, calN = N - K (H0 + i0)^{-1} K*";

  Operator boundary = Operator::zero(inst.H0.algebra());
  try {
    boundary = boundary_resolvent(inst.H0, inst.K, sched);
  } catch (const ExistenceError& e) {
    throw DomainError(std::string("hypothesis failed: the norm limit K(H0 + i0)^{-1}K* does not exist (") +
                      e.what() + ")");
  }
  const Operator h = inst.H();
  const Operator cal_n = inst.N - boundary;
  const double xi_h0_h = xi_index(inst.H0, h);
  report.values["xi_H0_H"] = xi_h0_h;

  add_bk_chain(report, inst.N, cal_n, xi_h0_h, tolerance);
  report.add_check("bs-boundary", xi_h0_h, report.values["xi_N_calN"], tolerance);
  stamp_elapsed(report, start);
  return report;
}

VerificationReport birman_krein_synthetic(const Operator& n, const Operator& cal_n, double tolerance) {
  const auto start = Clock::now();
  require_same_algebra(n, cal_n, "birman_krein_synthetic");
  if (!is_self_adjoint(n) || !is_invertible(n))
    throw DomainError("birman_krein_synthetic: N must be self-adjoint and invertible");
  VerificationReport report;
  report.identity = "birman-krein-synthetic";
  report.anchor = "det_tau S = Theta exp(2 pi i xi(N, calN)), Theta = exp(-2 pi i xi(N, Re calN))";
  report.inputs = digest_of(n.algebra());

  add_bk_chain(report, n, cal_n, xi_index(n, cal_n), tolerance);
  stamp_elapsed(report, start);
  return report;
}

}  // namespace xidx
