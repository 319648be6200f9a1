#include "xi_index/oplog.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "xi_index/errors.hpp"

namespace xidx {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEigenbasisConditionLimit = 1e6;
constexpr double kNormalityTolerance = 1e-12;
constexpr double kSeriesTermFloor = 1e-14;
constexpr int kSeriesMaxTerms = 1'000'000;

Matrix diag_similarity(const Matrix& v, const Eigen::VectorXcd& f, const Matrix& v_inv) {
  return v * f.asDiagonal() * v_inv;
}

// Logarithm of one block, or nullopt when neither the normal route nor a
// well-conditioned eigenbasis is available.
std::optional<Matrix> log_block(const Matrix& b, Branch branch, double scale) {
  Eigen::ComplexSchur<Matrix> schur(b);
  if (schur.info() != Eigen::Success) throw NumericError("complex Schur decomposition failed");
  const Matrix& t = schur.matrixT();
  const Matrix& q = schur.matrixU();
  const double off = t.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm();
  if (off <= kNormalityTolerance * std::max(t.norm(), 1e-300)) {
    Eigen::VectorXcd f(t.rows());
    for (Eigen::Index i = 0; i < t.rows(); ++i) f(i) = scalar_log(t(i, i), branch, scale);
    return diag_similarity(q, f, q.adjoint());
  }

  Eigen::ComplexEigenSolver<Matrix> es(b);
  if (es.info() != Eigen::Success) throw NumericError("complex eigensolver failed");
  const Matrix& v = es.eigenvectors();
  Eigen::JacobiSVD<Matrix> svd(v);
  const auto& s = svd.singularValues();
  const double cond = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(cond < kEigenbasisConditionLimit)) return std::nullopt;
  Eigen::VectorXcd f(v.cols());
  for (Eigen::Index i = 0; i < v.cols(); ++i) f(i) = scalar_log(es.eigenvalues()(i), branch, scale);
  return diag_similarity(v, f, v.partialPivLu().inverse());
}

void require_invertible(const Operator& m, const char* context) {
  const double cond = condition_number(m);
  if (!(cond <= kSingularCondition)) {
    std::ostringstream os;
    os << context << ": operator is singular (condition estimate " << cond << ")";
    throw DomainError(os.str());
  }
}

}  // namespace

const char* to_string(Branch b) noexcept {
  switch (b) {
    case Branch::ImCut: return "im-cut";
    case Branch::ReCut: return "re-cut";
  }
  return "unknown";
}

double branch_arg(Complex z, Branch branch, double scale) {
  switch (branch) {
    case Branch::ImCut: {
      if (z.imag() < 0.0 && std::abs(z.real()) <= kCutProximity * scale) {
        std::ostringstream os;
        os << "eigenvalue " << z << " lies on the negative imaginary branch cut";
        throw BranchError(os.str());
      }
      // arg on (-pi/2, 3pi/2): rotate the cut onto the negative real axis.
      return std::arg(Complex(0.0, -1.0) * z) + kPi / 2.0;
    }
    case Branch::ReCut: {
      if (z.real() < 0.0 && std::abs(z.imag()) <= kCutProximity * scale) return kPi;
      return std::arg(z);
    }
  }
  return 0.0;
}

Complex scalar_log(Complex z, Branch branch, double scale) {
  return {std::log(std::abs(z)), branch_arg(z, branch, scale)};
}

Operator log_op(const Operator& m, Branch branch) {
  require_invertible(m, "log_op");
  const double scale = std::max(norm(m), 1e-300);
  std::vector<Matrix> out;
  for (const auto& b : m.blocks()) {
    auto l = log_block(b, branch, scale);
    if (!l) {
      if (branch == Branch::ImCut && is_dissipative(m)) return log_integral(m);
      throw NumericError("log_op: ill-conditioned eigenbasis and no integral route for this input");
    }
    out.push_back(std::move(*l));
  }
  return Operator(m.algebra(), std::move(out));
}

Operator log_integral(const Operator& m, const QuadraturePolicy& quad) {
  if (!is_dissipative(m)) throw DomainError("log_integral: operator is not dissipative");
  require_invertible(m, "log_integral");

  // With lambda = tan(theta) the integrand becomes
  //   -i e^{-i theta} (cos(theta) M + i sin(theta) I)^{-1} (I - M),
  // smooth on the closed interval [0, pi/2].
  std::vector<Matrix> one_minus;
  for (const auto& b : m.blocks()) one_minus.push_back(Matrix::Identity(b.rows(), b.cols()) - b);
  auto integrand = [&](double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Complex phase = Complex(0.0, -1.0) * std::exp(Complex(0.0, -theta));
    std::vector<Matrix> out;
    for (std::size_t i = 0; i < m.block_count(); ++i) {
      Matrix shifted = c * m.block(i);
      shifted.diagonal().array() += Complex(0.0, s);
      out.push_back(phase * shifted.partialPivLu().solve(one_minus[i]));
    }
    return Operator(m.algebra(), std::move(out));
  };

  QuadraturePolicy scaled = quad;
  scaled.abs_tol = quad.abs_tol * std::max(1.0, norm(m));
  auto result = integrate_adaptive<Operator>(integrand, 0.0, kPi / 2.0, scaled,
                                             [](const Operator& x) { return frobenius_norm(x); });
  if (!result.converged) {
    std::ostringstream os;
    os << "log_integral: quadrature did not converge (error estimate " << result.error_estimate << " after "
       << result.subintervals << " panels)";
    throw NumericError(os.str(), {result.error_estimate});
  }
  return result.value;
}

Operator log_series(const Operator& m) {
  const Operator x = Operator::identity(m.algebra()) - m;
  const double radius = norm(x);
  if (!(radius < 1.0)) {
    std::ostringstream os;
    os << "log_series: ||M - I|| = " << radius << " is not below 1";
    throw DomainError(os.str());
  }
  Operator sum = Operator::zero(m.algebra());
  Operator power = x;
  std::vector<double> history;
  for (int k = 1;; ++k) {
    const Operator term = (1.0 / k) * power;
    const double size = frobenius_norm(term);
    if (size < kSeriesTermFloor) break;
    sum -= term;
    if (k >= kSeriesMaxTerms) throw NumericError("log_series: series did not reach the term floor", {size});
    power = power * x;
  }
  return sum;
}

Operator arg_unitary(const Operator& s) {
  const double defect = unitarity_defect(s);
  if (defect > 1e-9) {
    std::ostringstream os;
    os << "arg_unitary: operator is not unitary (||S*S - I|| = " << defect << ")";
    throw DomainError(os.str());
  }
  return im_part(log_op(s, Branch::ReCut));
}

Complex trace_log(const Operator& m, Branch branch) {
  require_invertible(m, "trace_log");
  const double scale = std::max(norm(m), 1e-300);
  const auto eig = eigenvalues(m);
  Complex acc = 0.0;
  for (std::size_t i = 0; i < eig.size(); ++i) {
    Complex block_sum = 0.0;
    for (Eigen::Index j = 0; j < eig[i].size(); ++j) block_sum += scalar_log(eig[i](j), branch, scale);
    acc += m.algebra().blocks()[i].weight * block_sum;
  }
  return acc;
}

Operator exp_op(const Operator& x) {
  return x.map_blocks([](const Matrix& b) -> Matrix { return b.exp(); });
}

}  // namespace xidx
