#include "xi_index/dets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <memory>
#include <sstream>
#include <tuple>

#include "xi_index/errors.hpp"
#include "xi_index/oplog.hpp"
#include "xi_index/quadrature.hpp"
#include "xi_index/xi.hpp"

namespace xidx {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMinSamples = 33;
// Eigenvalues with |Im mu| <= this * |mu| and Re mu < 0 push the straight
// segment from I too close to a singular point.
constexpr double kNearNegativeAxis = 1e-3;

}  // namespace

const char* to_string(PathKind k) noexcept {
  switch (k) {
    case PathKind::Linear: return "linear";
    case PathKind::Polygonal: return "polygonal";
    case PathKind::CayleyScaled: return "cayley-scaled";
    case PathKind::Sampled: return "sampled";
    case PathKind::Analytic: return "analytic";
    case PathKind::Product: return "product";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// OperatorPath
// ---------------------------------------------------------------------------

OperatorPath::OperatorPath(PathKind kind, AlgebraDescriptor alg, Fn value, Fn derivative,
                           std::vector<double> breakpoints)
    : kind_(kind),
      algebra_(std::move(alg)),
      value_(std::move(value)),
      derivative_(std::move(derivative)),
      breakpoints_(std::move(breakpoints)) {}

OperatorPath OperatorPath::linear(const Operator& h0, const Operator& h1) {
  require_same_algebra(h0, h1, "OperatorPath::linear");
  const Operator delta = h1 - h0;
  return OperatorPath(
      PathKind::Linear, h0.algebra(), [h0, delta](double t) { return h0 + t * delta; },
      [delta](double) { return delta; }, {});
}

OperatorPath OperatorPath::polygonal(std::vector<Operator> vertices) {
  if (vertices.size() < 2) throw DomainError("polygonal path needs at least two vertices");
  for (std::size_t i = 1; i < vertices.size(); ++i) require_same_algebra(vertices[0], vertices[i], "polygonal path");
  const std::size_t legs = vertices.size() - 1;
  auto v = std::make_shared<const std::vector<Operator>>(std::move(vertices));
  auto locate = [legs](double t) {
    const double x = std::clamp(t, 0.0, 1.0) * static_cast<double>(legs);
    const std::size_t k = std::min(static_cast<std::size_t>(x), legs - 1);
    return std::pair<std::size_t, double>{k, x - static_cast<double>(k)};
  };
  std::vector<double> breaks;
  for (std::size_t k = 1; k < legs; ++k) breaks.push_back(static_cast<double>(k) / static_cast<double>(legs));
  const AlgebraDescriptor alg = v->front().algebra();
  return OperatorPath(
      PathKind::Polygonal, alg,
      [v, locate](double t) {
        auto [k, s] = locate(t);
        return (1.0 - s) * (*v)[k] + s * (*v)[k + 1];
      },
      [v, locate, legs](double t) {
        auto [k, s] = locate(t);
        (void)s;
        return static_cast<double>(legs) * ((*v)[k + 1] - (*v)[k]);
      },
      std::move(breaks));
}

OperatorPath OperatorPath::cayley_scaled(const Operator& h) {
  if (!is_self_adjoint(h)) throw DomainError("cayley_scaled path needs a self-adjoint operator");
  const Complex i(0.0, 1.0);
  auto resolvent = [h, i](double t) {
    return h.map_blocks([&](const Matrix& b) -> Matrix {
      Matrix a = t * b;
      a.diagonal().array() += i;
      return a.partialPivLu().inverse();
    });
  };
  return OperatorPath(
      PathKind::CayleyScaled, h.algebra(),
      [h, i, resolvent](double t) { return (Operator::scalar(h.algebra(), i) - t * h) * resolvent(t); },
      [h, resolvent](double t) {
        const Operator r = resolvent(t);
        return Complex(0.0, -2.0) * (h * r * r);
      },
      {});
}

OperatorPath OperatorPath::sampled(std::vector<std::pair<double, Operator>> samples) {
  const std::size_t n = samples.size();
  if (n < kMinSamples) {
    std::ostringstream os;
    os << "sampled path needs at least " << kMinSamples << " samples, got " << n;
    throw DomainError(os.str());
  }
  if (samples.front().first != 0.0 || samples.back().first != 1.0)
    throw DomainError("sampled path must start at t = 0 and end at t = 1");
  for (std::size_t k = 1; k < n; ++k) {
    if (!(samples[k].first > samples[k - 1].first)) throw DomainError("sampled path parameters must increase");
    require_same_algebra(samples[0].second, samples[k].second, "sampled path");
  }

  struct Data {
    std::vector<double> t;
    std::vector<Operator> p;
    std::vector<Operator> d;
  };
  auto data = std::make_shared<Data>();
  for (auto& [t, op] : samples) {
    data->t.push_back(t);
    data->p.push_back(std::move(op));
  }
  const auto& t = data->t;
  const auto& p = data->p;
  {
    const double h1 = t[1] - t[0];
    const double h2 = t[2] - t[1];
    data->d.push_back((-(2.0 * h1 + h2) / (h1 * (h1 + h2))) * p[0] + ((h1 + h2) / (h1 * h2)) * p[1] +
                      (-h1 / (h2 * (h1 + h2))) * p[2]);
  }
  for (std::size_t k = 1; k + 1 < n; ++k) data->d.push_back((1.0 / (t[k + 1] - t[k - 1])) * (p[k + 1] - p[k - 1]));
  {
    const double h1 = t[n - 2] - t[n - 3];
    const double h2 = t[n - 1] - t[n - 2];
    data->d.push_back((h2 / (h1 * (h1 + h2))) * p[n - 3] + (-(h1 + h2) / (h1 * h2)) * p[n - 2] +
                      ((2.0 * h2 + h1) / (h2 * (h1 + h2))) * p[n - 1]);
  }

  auto locate = [data](double x) {
    const auto& tt = data->t;
    auto it = std::upper_bound(tt.begin(), tt.end(), x);
    std::size_t k = it == tt.begin() ? 0 : static_cast<std::size_t>(it - tt.begin()) - 1;
    k = std::min(k, tt.size() - 2);
    const double h = tt[k + 1] - tt[k];
    return std::tuple<std::size_t, double, double>{k, h, (x - tt[k]) / h};
  };
  std::vector<double> breaks(t.begin() + 1, t.end() - 1);
  const AlgebraDescriptor alg = p.front().algebra();
  return OperatorPath(
      PathKind::Sampled, alg,
      [data, locate](double x) {
        auto [k, h, s] = locate(x);
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * data->p[k] + ((s3 - 2 * s2 + s) * h) * data->d[k] +
               (-2 * s3 + 3 * s2) * data->p[k + 1] + ((s3 - s2) * h) * data->d[k + 1];
      },
      [data, locate](double x) {
        auto [k, h, s] = locate(x);
        const double s2 = s * s;
        return ((6 * s2 - 6 * s) / h) * data->p[k] + (3 * s2 - 4 * s + 1) * data->d[k] +
               ((-6 * s2 + 6 * s) / h) * data->p[k + 1] + (3 * s2 - 2 * s) * data->d[k + 1];
      },
      std::move(breaks));
}

OperatorPath OperatorPath::analytic(AlgebraDescriptor alg, Fn value, Fn derivative) {
  return OperatorPath(PathKind::Analytic, std::move(alg), std::move(value), std::move(derivative), {});
}

OperatorPath OperatorPath::product(const OperatorPath& p, const OperatorPath& q) {
  if (!(p.algebra() == q.algebra())) throw StructuralError("product path: algebras differ");
  std::vector<double> breaks = p.breakpoints();
  breaks.insert(breaks.end(), q.breakpoints().begin(), q.breakpoints().end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return OperatorPath(
      PathKind::Product, p.algebra(), [p, q](double t) { return p.value(t) * q.value(t); },
      [p, q](double t) { return p.derivative(t) * q.value(t) + p.value(t) * q.derivative(t); }, std::move(breaks));
}

// ---------------------------------------------------------------------------
// Determinants
// ---------------------------------------------------------------------------

double fk_det(const Operator& a) {
  const double cond = condition_number(a);
  if (!(cond <= kSingularCondition)) {
    std::ostringstream os;
    os << "fk_det: operator is singular (condition estimate " << cond << ")";
    throw DomainError(os.str());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.block_count(); ++i) {
    Eigen::JacobiSVD<Matrix> svd(a.block(i));
    acc += a.algebra().blocks()[i].weight * svd.singularValues().array().log().sum();
  }
  return std::exp(acc);
}

PathDeterminant dlhs_det_path(const OperatorPath& path, const PathQuadrature& quad) {
  const auto& weights = path.algebra().blocks();
  auto integrand = [&](double t) -> Complex {
    const Operator h = path.value(t);
    const double cond = condition_number(h);
    if (!(cond <= quad.singular_condition)) {
      std::ostringstream os;
      os << "path is singular at t = " << t << " (condition estimate " << cond << ")";
      throw PathError(os.str(), t);
    }
    const Operator dh = path.derivative(t);
    Complex acc = 0.0;
    for (std::size_t i = 0; i < h.block_count(); ++i)
      acc += weights[i].weight * h.block(i).partialPivLu().solve(dh.block(i)).trace();
    return acc;
  };

  std::vector<double> cuts{0.0};
  for (double b : path.breakpoints())
    if (b > 0.0 && b < 1.0) cuts.push_back(b);
  cuts.push_back(1.0);

  QuadraturePolicy policy;
  policy.max_subintervals = quad.max_subintervals;
  const double segments = static_cast<double>(cuts.size() - 1);
  policy.abs_tol = quad.abs_tol / segments;

  PathDeterminant out{};
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    auto r = integrate_adaptive<Complex>(integrand, cuts[s], cuts[s + 1], policy,
                                         [](Complex z) { return std::abs(z); });
    if (!r.converged) {
      std::ostringstream os;
      os << "path determinant quadrature did not converge on [" << cuts[s] << ", " << cuts[s + 1]
         << "] (error estimate " << r.error_estimate << ")";
      throw NumericError(os.str(), {r.error_estimate});
    }
    out.log_value += r.value;
    out.error_estimate += r.error_estimate;
    out.evaluations += r.evaluations;
  }
  out.value = std::exp(out.log_value);
  return out;
}

Complex det_tau_dissipative(const Operator& m) {
  if (!is_dissipative(m, kStructureTolerance * std::max(1.0, norm(m))))
    throw DomainError("det_tau_dissipative: operator is not dissipative");
  return std::exp(trace_log(m, Branch::ImCut));
}

Complex det_tau_unitary(const Operator& u) {
  const double defect = unitarity_defect(u);
  if (defect > 1e-9) {
    std::ostringstream os;
    os << "det_tau_unitary: operator is not unitary (||U*U - I|| = " << defect << ")";
    throw DomainError(os.str());
  }
  return std::exp(trace_log(u, Branch::ReCut));
}

InClassPath dissipative_path(const Operator& m) {
  bool near_axis = false;
  for (const auto& block : eigenvalues(m))
    for (Eigen::Index j = 0; j < block.size(); ++j) {
      const Complex mu = block(j);
      if (mu.real() < 0.0 && std::abs(mu.imag()) <= kNearNegativeAxis * std::abs(mu)) near_axis = true;
    }
  const Operator id = Operator::identity(m.algebra());
  if (!near_axis) return {OperatorPath::linear(id, m), false};
  const Operator apex = Operator::scalar(m.algebra(), Complex(0.0, std::max(1.0, norm(m))));
  return {OperatorPath::polygonal({id, apex, m}), true};
}

VerificationReport polar_identity_check(const Operator& m) {
  const auto start = Clock::now();
  if (!is_invertible(m)) throw DomainError("polar_identity_check: operator is singular");

  VerificationReport report;
  report.identity = "polar-determinant";
  report.anchor = "det_tau M = exp(i pi tau[Xi(M)]) Delta(M)";
  report.inputs = digest_of(m.algebra());

  const Complex lhs = det_tau_dissipative(m);
  const double xi = trace(xi_operator(m, XiStrategy{XiMethod::InvertibleLog})).real();
  const double delta = fk_det(m);
  const Complex rhs = std::exp(Complex(0.0, kPi * xi)) * delta;
  report.values["tau_xi"] = xi;
  report.values["fk_det"] = delta;
  report.add_check("polar", lhs, rhs, 1e-8);

  const auto in_class = dissipative_path(m);
  if (in_class.polygonal)
    report.warnings.push_back("straight path from I meets the negative axis; using I -> i||M|| I -> M");
  const PathDeterminant path = dlhs_det_path(in_class.path);
  report.values["path_phase"] = path.phase();
  report.add_residual("path-vs-closed", std::abs(path.value - lhs) / std::max(1.0, std::abs(lhs)), 1e-6);

  stamp_elapsed(report, start);
  return report;
}

}  // namespace xidx
