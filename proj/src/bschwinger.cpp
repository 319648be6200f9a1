#include "xi_index/bschwinger.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "xi_index/errors.hpp"
#include "xi_index/oplog.hpp"
#include "xi_index/scattering.hpp"
#include "xi_index/xi.hpp"

namespace xidx {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out;
}

double relative_gap(const Operator& a, const Operator& b) { return norm(a - b) / std::max(1.0, norm(b)); }

NumericError stalled(const std::string& what, const std::vector<double>& differences) {
  std::ostringstream os;
  os << what << " did not settle; differences [";
  for (std::size_t i = 0; i < differences.size(); ++i) os << (i ? ", " : "") << differences[i];
  os << ']';
  return NumericError(os.str(), differences);
}

LimitEstimate<double> scalar_limit(const std::function<double(double)>& f, const EpsSchedule& sched,
                                   const std::string& what) {
  auto est = eps_limit<double>(f, sched, [](double x) { return std::abs(x); });
  if (!est.converged) throw stalled(what, est.differences);
  return est;
}

// tau[Xi(X)] on the log route; X is invertible by construction at eps > 0.
double xi_log(const Operator& x) { return xi_trace(x, XiStrategy{XiMethod::InvertibleLog}); }

}  // namespace

void BSInstance::validate() const {
  require_same_algebra(M, N, "BSInstance");
  require_same_algebra(M, K, "BSInstance");
  std::vector<std::string> bad;
  if (!is_dissipative(M, kStructureTolerance * std::max(1.0, norm(M)))) bad.push_back("M");
  if (!is_dissipative(N, kStructureTolerance * std::max(1.0, norm(N)))) bad.push_back("N");
  if (!bad.empty()) throw DomainError("BSInstance: not dissipative: " + join(bad));
}

BSInstance BSInstance::swapped() const { return BSInstance{N, M, K.adjoint()}; }

std::pair<Operator, Operator> schur_complements(const BSInstance& inst, Complex z) {
  inst.validate();
  const Operator mz = inst.M.shifted(z);
  const Operator nz = inst.N.shifted(z);
  std::vector<std::string> bad;
  if (!is_invertible(mz)) bad.push_back("M + zI");
  if (!is_invertible(nz)) bad.push_back("N + zI");
  if (!bad.empty()) throw DomainError("schur_complements: singular: " + join(bad));
  const Operator& k = inst.K;
  const Operator kstar = k.adjoint();
  return {mz - kstar * inverse(nz) * k, nz - k * inverse(mz) * kstar};
}

double schur_inverse_residual(const BSInstance& inst, Complex z) {
  const auto [cm, cn] = schur_complements(inst, z);
  const Operator big = block2(inst.M, inst.K, inst.N).shifted(z);
  const Operator big_inv = inverse(big);
  const double scale = std::max(1.0, norm(big_inv));
  const double upper = norm(compress_upper(big_inv) - inverse(cm)) / scale;
  const double lower = norm(compress_lower(big_inv) - inverse(cn)) / scale;
  return std::max(upper, lower);
}

double resolvent_identity_residual(const BSInstance& inst, Complex z) {
  const auto [cm, cn] = schur_complements(inst, z);
  const Operator rn = inverse(inst.N.shifted(z));
  const Operator lhs = inverse(cn);
  const Operator rhs = rn + rn * inst.K * inverse(cm) * inst.K.adjoint() * rn;
  return norm(lhs - rhs) / std::max(1.0, norm(lhs));
}

VerificationReport verify_bs(const BSInstance& inst, double tolerance) {
  const auto start = Clock::now();
  inst.validate();
  VerificationReport report;
  report.identity = "birman-schwinger";
  report.anchor = "xi(M, M - K*N^{-1}K) = xi(N, N - K M^{-1} K*)";
  report.inputs = digest_of(inst.M.algebra());
  report.notes["convention"] = kPerturbationConvention;

  std::vector<std::string> singular;
  const double cond_m = condition_number(inst.M);
  const double cond_n = condition_number(inst.N);
  if (!(cond_m <= kSingularCondition)) singular.push_back("M");
  if (!(cond_n <= kSingularCondition)) singular.push_back("N");
  if (!singular.empty()) throw DomainError("verify_bs: singular operators: " + join(singular));

  const Operator& k = inst.K;
  const Operator kstar = k.adjoint();
  const Operator cal_m = inst.M - kstar * inverse(inst.N) * k;
  const Operator cal_n = inst.N - k * inverse(inst.M) * kstar;
  const double cond_cm = condition_number(cal_m);
  const double cond_cn = condition_number(cal_n);
  const bool cm_ok = cond_cm <= kSingularCondition;
  const bool cn_ok = cond_cn <= kSingularCondition;
  if (!cm_ok && !cn_ok)
    throw DomainError("verify_bs: singular operators: M - K*N^{-1}K, N - K M^{-1} K*");
  report.values["cond_M"] = cond_m;
  report.values["cond_N"] = cond_n;
  report.values["cond_schur_M"] = cond_cm;
  report.values["cond_schur_N"] = cond_cn;
  if (cm_ok != cn_ok) {
    report.add_residual("complement-invertibility", 1.0, 0.0);
    report.warnings.push_back(std::string("only ") + (cm_ok ? "M - K*N^{-1}K" : "N - K M^{-1} K*") +
                              " passed the invertibility gate");
  }

  const double lhs = xi_index(inst.M, cal_m);
  const double rhs = xi_index(inst.N, cal_n);
  report.values["xi_lhs"] = lhs;
  report.values["xi_rhs"] = rhs;
  report.add_check("birman-schwinger", lhs, rhs, tolerance);
  stamp_elapsed(report, start);
  return report;
}

const char* to_string(LimitMode m) noexcept {
  switch (m) {
    case LimitMode::BothRegularized: return "both-regularized";
    case LimitMode::NInvertible: return "n-invertible";
    case LimitMode::Boundary: return "boundary";
  }
  return "unknown";
}

VerificationReport bs_limit(const BSInstance& inst, const EpsSchedule& sched, LimitMode mode, double tolerance) {
  const auto start = Clock::now();
  inst.validate();
  sched.validate();
  VerificationReport report;
  report.identity = std::string("birman-schwinger-limit/") + to_string(mode);
  report.inputs = digest_of(inst.M.algebra());
  report.notes["mode"] = to_string(mode);
  report.notes["convention"] = kPerturbationConvention;

  const Complex i(0.0, 1.0);
  const Operator& m = inst.M;
  const Operator& n = inst.N;
  const Operator& k = inst.K;
  const Operator kstar = k.adjoint();

  double lhs = 0.0;
  double rhs = 0.0;
  switch (mode) {
    case LimitMode::BothRegularized: {
      report.anchor = "lim xi(M + ie, M + ie - K*(N + ie)^{-1}K) = lim xi(N + ie, N + ie - K(M + ie)^{-1}K*)";
      auto left = [&](double e) {
        const Operator me = m.shifted(i * e);
        return xi_log(me - kstar * inverse(n.shifted(i * e)) * k) - xi_log(me);
      };
      auto right = [&](double e) {
        const Operator ne = n.shifted(i * e);
        return xi_log(ne - k * inverse(m.shifted(i * e)) * kstar) - xi_log(ne);
      };
      auto l = scalar_limit(left, sched, "left eps-limit");
      auto r = scalar_limit(right, sched, "right eps-limit");
      lhs = l.limit;
      rhs = r.limit;
      report.histories["lhs_eps"] = l.samples;
      report.histories["lhs_differences"] = l.differences;
      report.histories["rhs_eps"] = r.samples;
      report.histories["rhs_differences"] = r.differences;
      break;
    }
    case LimitMode::NInvertible: {
      report.anchor = "xi(M, M - K*N^{-1}K) = lim xi(N, N - K(M + ie)^{-1}K*)";
      if (!is_invertible(n)) throw DomainError("bs_limit: N is singular");
      lhs = xi_index(m, m - kstar * inverse(n) * k, XiPolicy{std::nullopt, sched});
      const double xi_n = xi_trace(n, XiPolicy{std::nullopt, sched});
      auto right = [&](double e) {
        return xi_trace(n - k * inverse(m.shifted(i * e)) * kstar, XiPolicy{std::nullopt, sched}) - xi_n;
      };
      auto r = scalar_limit(right, sched, "right eps-limit");
      rhs = r.limit;
      report.histories["rhs_eps"] = r.samples;
      report.histories["rhs_differences"] = r.differences;
      break;
    }
    case LimitMode::Boundary: {
      report.anchor = "xi(M, M - K*N^{-1}K) = xi(N, N - K(M + i0)^{-1}K*)";
      if (!is_invertible(n)) throw DomainError("bs_limit: N is singular");
      Operator boundary = Operator::zero(m.algebra());
      if (is_self_adjoint(m)) {
        boundary = boundary_resolvent(m, k, sched);
        report.notes["boundary_route"] = "pseudoinverse";
      } else if (is_invertible(m)) {
        boundary = k * inverse(m) * kstar;
        report.notes["boundary_route"] = "inverse";
      } else {
        auto est = eps_limit<Operator>([&](double e) { return k * inverse(m.shifted(i * e)) * kstar; }, sched,
                                       [](const Operator& x) { return norm(x); });
        if (!est.converged) throw stalled("eps-limit of K(M + ie)^{-1}K*", est.differences);
        boundary = est.limit;
        report.notes["boundary_route"] = "eps-extrapolation";
        report.histories["boundary_differences"] = est.differences;
      }
      const Operator target = n - boundary;
      if (!is_invertible(target)) throw DomainError("bs_limit: N - K(M + i0)^{-1}K* is singular");
      lhs = xi_index(m, m - kstar * inverse(n) * k, XiPolicy{std::nullopt, sched});
      rhs = xi_index(n, target, XiPolicy{std::nullopt, sched});
      break;
    }
  }
  report.values["xi_lhs"] = lhs;
  report.values["xi_rhs"] = rhs;
  report.add_check("limit-equality", lhs, rhs, tolerance);
  stamp_elapsed(report, start);
  return report;
}

VerificationReport block_corollary(const BSInstance& inst, double tolerance) {
  const auto start = Clock::now();
  inst.validate();
  VerificationReport report;
  report.identity = "block-corollary";
  report.anchor = "2 tau2[Xi(M)] = tau[Xi((W*M^{-1}W)^{-1})] + tau[Xi(U*MU)] = ...";
  report.inputs = digest_of(inst.M.algebra());

  const Operator& m = inst.M;
  const Operator& n = inst.N;
  const Operator& k = inst.K;
  const Operator kstar = k.adjoint();
  std::vector<std::string> singular;
  if (!is_invertible(m)) singular.push_back("M");
  if (!is_invertible(n)) singular.push_back("N");
  if (!singular.empty()) throw DomainError("block_corollary: singular operators: " + join(singular));
  const Operator cal_m = m - kstar * inverse(n) * k;
  const Operator cal_n = n - k * inverse(m) * kstar;
  if (!is_invertible(cal_m)) singular.push_back("M - K*N^{-1}K");
  if (!is_invertible(cal_n)) singular.push_back("N - K M^{-1} K*");
  if (!singular.empty()) throw DomainError("block_corollary: singular operators: " + join(singular));

  const Operator big = block2(m, k, n);
  const Operator big_inv = inverse(big);
  const Operator upper_inv = compress_upper(big_inv);
  const Operator lower_inv = compress_lower(big_inv);

  const AlgebraDescriptor alg2 = big.algebra();
  const double tau2_big = tau2(alg2, xi_operator(big)).real();
  const double two_tau2 = 2.0 * tau2_big;
  const double xi_m = xi_trace(m);
  const double xi_n = xi_trace(n);
  const double xi_cm = xi_trace(cal_m);
  const double xi_cn = xi_trace(cal_n);

  report.values["two_tau2_xi"] = two_tau2;
  const double xi_from_upper = xi_trace(inverse(upper_inv));
  const double xi_from_lower = xi_trace(inverse(lower_inv));
  report.add_check("isometry-split-W", two_tau2, xi_from_lower + xi_trace(compress_upper(big)), tolerance);
  report.add_check("isometry-split-U", two_tau2, xi_from_upper + xi_trace(compress_lower(big)), tolerance);
  report.add_check("schur-split-N", two_tau2, xi_cn + xi_m, tolerance);
  report.add_check("schur-split-M", two_tau2, xi_cm + xi_n, tolerance);
  report.add_residual("inverse-upper", relative_gap(upper_inv, inverse(cal_m)), tolerance);
  report.add_residual("inverse-lower", relative_gap(lower_inv, inverse(cal_n)), tolerance);

  const Operator diag = block2(m, Operator::zero(m.algebra()), n);
  const double two_xi_off = 2.0 * (tau2_big - tau2(alg2, xi_operator(diag)).real());
  report.add_check("offdiag-U", two_xi_off, xi_from_upper - xi_trace(compress_upper(big)), tolerance);
  report.add_check("offdiag-W", two_xi_off, xi_from_lower - xi_trace(compress_lower(big)), tolerance);
  stamp_elapsed(report, start);
  return report;
}

VerificationReport sa_specialization(const Operator& h0, const Operator& k, const Operator& n, double tolerance) {
  const auto start = Clock::now();
  require_same_algebra(h0, k, "sa_specialization");
  require_same_algebra(h0, n, "sa_specialization");
  if (!is_self_adjoint(h0) || !is_self_adjoint(n))
    throw DomainError("sa_specialization: H0 and N must be self-adjoint");

  VerificationReport report;
  report.identity = "self-adjoint-birman-schwinger";
  report.anchor = "index_tau(E_H0(R-), E_H(R-)) = index_tau(E_N(R-), E_{N - K H0^{-1} K*}(R-))";
  report.inputs = digest_of(h0.algebra());
  report.notes["convention"] = kPerturbationConvention;

  std::vector<std::string> singular;
  if (!is_invertible(h0)) singular.push_back("H0");
  if (!is_invertible(n)) singular.push_back("N");
  if (!singular.empty()) throw DomainError("sa_specialization: singular operators: " + join(singular));
  const Operator kstar = k.adjoint();
  const Operator h = re_part(h0 - kstar * inverse(n) * k);
  const Operator t = re_part(n - k * inverse(h0) * kstar);
  if (!is_invertible(h)) singular.push_back("H");
  if (!is_invertible(t)) singular.push_back("N - K H0^{-1} K*");
  if (!singular.empty()) throw DomainError("sa_specialization: singular operators: " + join(singular));

  const double lhs = tau_fredholm_index(sign_projections(h0).negative, sign_projections(h).negative);
  const double rhs = tau_fredholm_index(sign_projections(n).negative, sign_projections(t).negative);
  report.values["index_lhs"] = lhs;
  report.values["index_rhs"] = rhs;
  report.add_check("index-equality", lhs, rhs, tolerance);

  double min_h0 = HUGE_VAL;
  for (const auto& ev : hermitian_eigenvalues(h0)) min_h0 = std::min(min_h0, ev.minCoeff());
  const bool counting = min_h0 > 0.0 && norm(n - Operator::identity(n.algebra())) <= 1e-12;
  if (counting) {
    const Operator v = re_part(kstar * k);
    const Operator sv = psd_sqrt(v);
    const Operator bs = re_part(sv * inverse(h0) * sv);
    const auto& blocks = h0.algebra().blocks();
    auto weighted_count = [&](const Operator& x, auto&& pred) {
      const auto ev = hermitian_eigenvalues(x);
      double acc = 0.0;
      for (std::size_t b = 0; b < ev.size(); ++b)
        for (Eigen::Index j = 0; j < ev[b].size(); ++j)
          if (pred(ev[b](j))) acc += blocks[b].weight;
      return acc;
    };
    const double negatives = weighted_count(h, [](double x) { return x < 0.0; });
    const double above_one = weighted_count(bs, [](double x) { return x > 1.0; });
    report.values["count_negative_H"] = negatives;
    report.values["count_bs_above_one"] = above_one;
    report.add_check("counting-form", negatives, above_one, tolerance);
  }
  stamp_elapsed(report, start);
  return report;
}

std::pair<Operator, Operator> factor_perturbation(const Operator& v) {
  if (!is_self_adjoint(v)) throw DomainError("factor_perturbation: V must be self-adjoint");
  const double zero_tol = 1e-14 * std::max(1.0, norm(v));
  Operator k = apply_hermitian(v, [](double x) { return std::sqrt(std::abs(x)); });
  Operator n = apply_hermitian(v, [zero_tol](double x) { return x >= -zero_tol ? -1.0 : 1.0; });
  return {std::move(k), std::move(n)};
}

VerificationReport herglotz_asymptotics(const BSInstance& inst) {
  const auto start = Clock::now();
  inst.validate();
  VerificationReport report;
  report.identity = "herglotz-asymptotics";
  report.anchor = "2 tau2[log M(z)] = tau[log calM(z)] + tau[log(N + z)], each = log(iy) + O(1/y)";
  report.inputs = digest_of(inst.M.algebra());

  const std::vector<double> ys{1e2, 1e3, 1e4};
  const Operator big = block2(inst.M, inst.K, inst.N);
  std::vector<double> d_big, d_schur, d_n, additivity;
  for (double y : ys) {
    const Complex z(0.0, y);
    const Complex log_z = std::log(z);
    const Complex t_big = trace_log(big.shifted(z), Branch::ImCut);
    const Complex t_schur = trace_log(schur_complements(inst, z).first, Branch::ImCut);
    const Complex t_n = trace_log(inst.N.shifted(z), Branch::ImCut);
    d_big.push_back(std::abs(t_big - log_z));
    d_schur.push_back(std::abs(t_schur - log_z));
    d_n.push_back(std::abs(t_n - log_z));
    additivity.push_back(std::abs(2.0 * t_big - t_schur - t_n));
  }
  report.histories["y"] = ys;
  report.histories["deviation_tau2_log_M"] = d_big;
  report.histories["deviation_tau_log_schur"] = d_schur;
  report.histories["deviation_tau_log_N"] = d_n;
  report.histories["additivity"] = additivity;

  // Least-squares slope of log d against log y. Deviations at rounding level
  // carry no rate information and count as decayed.
  constexpr double kFloor = 1e-13;
  auto check_rate = [&](const std::string& name, const std::vector<double>& d) {
    double c = 0.0;
    for (std::size_t j = 0; j < ys.size(); ++j) c = std::max(c, ys[j] * d[j]);
    report.values["c_" + name] = c;
    bool resolved = true;
    for (double x : d) resolved = resolved && x > kFloor;
    if (!resolved) {
      report.warnings.push_back(name + ": deviation below rounding floor");
      report.add_residual("rate-" + name, 0.0, 0.05);
      return;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double lx = std::log(ys[j]);
      const double ly = std::log(d[j]);
      sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    }
    const double nn = static_cast<double>(ys.size());
    const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    report.values["slope_" + name] = slope;
    report.add_residual("rate-" + name, std::max(0.0, slope + 1.0), 0.05);
  };
  check_rate("tau2_log_M", d_big);
  check_rate("tau_log_schur", d_schur);
  check_rate("tau_log_N", d_n);
  double worst = 0.0;
  for (double a : additivity) worst = std::max(worst, a);
  report.add_residual("additivity", worst, 1e-9);
  stamp_elapsed(report, start);
  return report;
}

}  // namespace xidx
