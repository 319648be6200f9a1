#include "xi_index/algebra.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "xi_index/errors.hpp"

namespace xidx {

namespace {

constexpr double kNormalizationTolerance = 1e-10;

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double hermitian_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// AlgebraDescriptor
// ---------------------------------------------------------------------------

AlgebraDescriptor::AlgebraDescriptor(std::vector<Block> blocks, int amplification)
    : blocks_(std::move(blocks)), amplification_(amplification) {
  if (blocks_.empty()) throw StructuralError("algebra descriptor needs at least one block");
  double mass = 0.0;
  for (const auto& b : blocks_) {
    if (b.dim <= 0) throw StructuralError("block dimension must be positive");
    if (!(b.weight > 0.0) || !std::isfinite(b.weight))
      throw StructuralError("block weight must be positive and finite");
    mass += b.weight * b.dim;
  }
  if (std::abs(mass - 1.0) > kNormalizationTolerance) {
    std::ostringstream os;
    os << "trace weights not normalized: sum w_i n_i = " << mass;
    throw StructuralError(os.str());
  }
  if (amplification_ < 0) throw StructuralError("negative amplification level");
}

AlgebraDescriptor AlgebraDescriptor::factor(int n) {
  if (n <= 0) throw StructuralError("factor dimension must be positive");
  return AlgebraDescriptor({Block{n, 1.0 / n}});
}

AlgebraDescriptor AlgebraDescriptor::parse(std::string_view text) {
  std::vector<Block> blocks;
  while (!text.empty()) {
    const auto comma = text.find(',');
    std::string_view item = trim(text.substr(0, comma));
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    const auto x = item.find('x');
    if (x == std::string_view::npos)
      throw StructuralError("block spec '" + std::string(item) + "' is not of the form DIMxWEIGHT");
    Block b;
    const auto dim_text = trim(item.substr(0, x));
    auto [p, ec] = std::from_chars(dim_text.data(), dim_text.data() + dim_text.size(), b.dim);
    if (ec != std::errc{} || p != dim_text.data() + dim_text.size())
      throw StructuralError("bad block dimension in '" + std::string(item) + "'");
    try {
      std::size_t used = 0;
      const std::string weight_text(trim(item.substr(x + 1)));
      b.weight = std::stod(weight_text, &used);
      if (used != weight_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw StructuralError("bad block weight in '" + std::string(item) + "'");
    }
    blocks.push_back(b);
  }
  return AlgebraDescriptor(std::move(blocks));
}

int AlgebraDescriptor::total_dim() const noexcept {
  return std::accumulate(blocks_.begin(), blocks_.end(), 0,
                         [](int acc, const Block& b) { return acc + b.dim; });
}

std::string AlgebraDescriptor::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (i) os << ',';
    os << blocks_[i].dim << 'x' << blocks_[i].weight;
  }
  return os.str();
}

AlgebraDescriptor amplify(const AlgebraDescriptor& alg) {
  std::vector<Block> blocks;
  blocks.reserve(alg.block_count());
  for (const auto& b : alg.blocks()) blocks.push_back(Block{2 * b.dim, b.weight / 2.0});
  return AlgebraDescriptor(std::move(blocks), alg.amplification() + 1);
}

// ---------------------------------------------------------------------------
// Operator
// ---------------------------------------------------------------------------

Operator::Operator(AlgebraDescriptor algebra, std::vector<Matrix> blocks)
    : algebra_(std::move(algebra)), blocks_(std::move(blocks)) {
  if (blocks_.size() != algebra_.block_count()) {
    std::ostringstream os;
    os << "operator has " << blocks_.size() << " blocks, descriptor has " << algebra_.block_count();
    throw StructuralError(os.str());
  }
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const int n = algebra_.blocks()[i].dim;
    if (blocks_[i].rows() != n || blocks_[i].cols() != n) {
      std::ostringstream os;
      os << "block " << i << " is " << blocks_[i].rows() << "x" << blocks_[i].cols() << ", expected " << n
         << "x" << n;
      throw StructuralError(os.str());
    }
    if (!blocks_[i].allFinite()) throw DomainError("operator has non-finite entries");
  }
}

Operator::Operator(Unchecked, AlgebraDescriptor algebra, std::vector<Matrix> blocks)
    : algebra_(std::move(algebra)), blocks_(std::move(blocks)) {}

Operator Operator::identity(const AlgebraDescriptor& alg) { return scalar(alg, 1.0); }

Operator Operator::zero(const AlgebraDescriptor& alg) { return scalar(alg, 0.0); }

Operator Operator::scalar(const AlgebraDescriptor& alg, Complex value) {
  std::vector<Matrix> blocks;
  for (const auto& b : alg.blocks()) blocks.push_back(value * Matrix::Identity(b.dim, b.dim));
  return Operator(alg, std::move(blocks));
}

Operator Operator::diagonal(const AlgebraDescriptor& alg, std::span<const Complex> entries) {
  if (entries.size() != static_cast<std::size_t>(alg.total_dim()))
    throw StructuralError("diagonal entry count does not match the algebra dimension");
  std::vector<Matrix> blocks;
  std::size_t offset = 0;
  for (const auto& b : alg.blocks()) {
    Matrix m = Matrix::Zero(b.dim, b.dim);
    for (int j = 0; j < b.dim; ++j) m(j, j) = entries[offset++];
    blocks.push_back(std::move(m));
  }
  return Operator(alg, std::move(blocks));
}

Operator Operator::diagonal(const AlgebraDescriptor& alg, std::initializer_list<Complex> entries) {
  return diagonal(alg, std::span<const Complex>(entries.begin(), entries.size()));
}

Operator Operator::adjoint() const {
  std::vector<Matrix> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.adjoint());
  return Operator(Unchecked{}, algebra_, std::move(out));
}

Operator Operator::shifted(Complex z) const {
  Operator out = *this;
  for (auto& b : out.blocks_) b.diagonal().array() += z;
  return out;
}

Operator Operator::map_blocks(const std::function<Matrix(const Matrix&)>& f) const {
  std::vector<Matrix> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(f(b));
  return Operator(algebra_, std::move(out));
}

Operator& Operator::operator+=(const Operator& rhs) {
  require_same_algebra(*this, rhs, "operator+");
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += rhs.blocks_[i];
  return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
  require_same_algebra(*this, rhs, "operator-");
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= rhs.blocks_[i];
  return *this;
}

Operator& Operator::operator*=(Complex s) {
  for (auto& b : blocks_) b *= s;
  return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
  require_same_algebra(lhs, rhs, "operator*");
  std::vector<Matrix> out;
  out.reserve(lhs.blocks_.size());
  for (std::size_t i = 0; i < lhs.blocks_.size(); ++i) out.push_back(lhs.blocks_[i] * rhs.blocks_[i]);
  return Operator(Operator::Unchecked{}, lhs.algebra_, std::move(out));
}

void require_same_algebra(const Operator& a, const Operator& b, std::string_view context) {
  if (!(a.algebra() == b.algebra()))
    throw StructuralError(std::string(context) + ": operands belong to different algebras (" +
                          a.algebra().to_string() + " vs " + b.algebra().to_string() + ")");
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

Complex trace(const AlgebraDescriptor& alg, const Operator& x) {
  if (!(alg == x.algebra())) throw StructuralError("trace: operator does not conform to descriptor");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < alg.block_count(); ++i) acc += alg.blocks()[i].weight * x.block(i).trace();
  return acc;
}

Complex trace(const Operator& x) { return trace(x.algebra(), x); }

Complex tau2(const AlgebraDescriptor& alg2, const Operator& x) {
  if (alg2.amplification() < 1) throw StructuralError("tau2 needs an amplified descriptor");
  if (!(alg2 == x.algebra())) throw StructuralError("tau2: operator does not conform to descriptor");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < alg2.block_count(); ++i) {
    const int n = alg2.blocks()[i].dim / 2;
    const double base_weight = 2.0 * alg2.blocks()[i].weight;
    const Matrix& b = x.block(i);
    acc += base_weight * (b.topLeftCorner(n, n).trace() + b.bottomRightCorner(n, n).trace()) / 2.0;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// 2x2 operator matrices
// ---------------------------------------------------------------------------

Operator block2_general(const Operator& a, const Operator& b, const Operator& c, const Operator& d) {
  require_same_algebra(a, b, "block2");
  require_same_algebra(a, c, "block2");
  require_same_algebra(a, d, "block2");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < a.block_count(); ++i) {
    const auto n = a.block(i).rows();
    Matrix m(2 * n, 2 * n);
    m << a.block(i), b.block(i), c.block(i), d.block(i);
    out.push_back(std::move(m));
  }
  return Operator(amplify(a.algebra()), std::move(out));
}

Operator block2(const Operator& m, const Operator& k, const Operator& n) {
  return block2_general(m, k.adjoint(), k, n);
}

namespace {

AlgebraDescriptor deamplify(const AlgebraDescriptor& alg2) {
  if (alg2.amplification() < 1) throw StructuralError("compression needs an amplified descriptor");
  std::vector<Block> blocks;
  for (const auto& b : alg2.blocks()) blocks.push_back(Block{b.dim / 2, 2.0 * b.weight});
  return AlgebraDescriptor(std::move(blocks), alg2.amplification() - 1);
}

}  // namespace

Operator compress_upper(const Operator& x2) {
  std::vector<Matrix> out;
  for (const auto& b : x2.blocks()) out.push_back(b.topLeftCorner(b.rows() / 2, b.cols() / 2));
  return Operator(deamplify(x2.algebra()), std::move(out));
}

Operator compress_lower(const Operator& x2) {
  std::vector<Matrix> out;
  for (const auto& b : x2.blocks()) out.push_back(b.bottomRightCorner(b.rows() / 2, b.cols() / 2));
  return Operator(deamplify(x2.algebra()), std::move(out));
}

Operator swap_unitary(const AlgebraDescriptor& alg) {
  const auto id = Operator::identity(alg);
  const auto zero = Operator::zero(alg);
  return block2_general(zero, id, id, zero);
}

// ---------------------------------------------------------------------------
// Norms and structure
// ---------------------------------------------------------------------------

double norm(const Operator& x) {
  double out = 0.0;
  for (const auto& b : x.blocks()) out = std::max(out, spectral_norm(b));
  return out;
}

double frobenius_norm(const Operator& x) {
  double out = 0.0;
  for (const auto& b : x.blocks()) out = std::max(out, b.norm());
  return out;
}

double hermitian_defect(const Operator& x) {
  double out = 0.0;
  for (const auto& b : x.blocks()) {
    const Matrix skew_times_i = Complex(0.0, 0.5) * (b - b.adjoint());
    out = std::max(out, hermitian_norm(skew_times_i));
  }
  return out;
}

bool is_self_adjoint(const Operator& x, double tol) {
  return hermitian_defect(x) <= tol * std::max(1.0, norm(x));
}

double unitarity_defect(const Operator& x) {
  double out = 0.0;
  for (const auto& b : x.blocks())
    out = std::max(out, hermitian_norm(b.adjoint() * b - Matrix::Identity(b.rows(), b.cols())));
  return out;
}

double projection_defect(const Operator& p) {
  double out = 0.0;
  for (const auto& b : p.blocks()) {
    out = std::max(out, spectral_norm(b * b - b));
    out = std::max(out, spectral_norm(b - b.adjoint()));
  }
  return out;
}

Operator re_part(const Operator& x) {
  return x.map_blocks([](const Matrix& b) -> Matrix { return (b + b.adjoint()) / 2.0; });
}

Operator im_part(const Operator& x) {
  return x.map_blocks([](const Matrix& b) -> Matrix { return (b - b.adjoint()) / Complex(0.0, 2.0); });
}

double dissipativity_defect(const Operator& x) {
  double lambda_min = std::numeric_limits<double>::infinity();
  for (const auto& b : x.blocks()) {
    const Matrix im = (b - b.adjoint()) / Complex(0.0, 2.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(im, Eigen::EigenvaluesOnly);
    lambda_min = std::min(lambda_min, es.eigenvalues()(0));
  }
  return std::max(0.0, -lambda_min);
}

bool is_dissipative(const Operator& x, double tol) {
  return dissipativity_defect(x) <= tol * std::max(1.0, norm(x));
}

double condition_number(const Operator& x) {
  double smax = 0.0;
  double smin = std::numeric_limits<double>::infinity();
  for (const auto& b : x.blocks()) {
    Eigen::JacobiSVD<Matrix> svd(b);
    const auto& s = svd.singularValues();
    smax = std::max(smax, s(0));
    smin = std::min(smin, s(s.size() - 1));
  }
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

bool is_invertible(const Operator& x, double max_condition) { return condition_number(x) <= max_condition; }

InverseResult inverse_with_condition(const Operator& x, double max_condition) {
  const double cond = condition_number(x);
  if (!(cond <= max_condition)) {
    std::ostringstream os;
    os << "operator is singular (condition estimate " << cond << " exceeds " << max_condition << ")";
    throw DomainError(os.str());
  }
  std::vector<Matrix> out;
  for (const auto& b : x.blocks()) out.push_back(b.partialPivLu().inverse());
  return {Operator(x.algebra(), std::move(out)), cond};
}

Operator inverse(const Operator& x, double max_condition) {
  return inverse_with_condition(x, max_condition).inverse;
}

// ---------------------------------------------------------------------------
// Spectral calculus
// ---------------------------------------------------------------------------

Operator SpectralDecomposition::projection_where(const std::function<bool(double)>& pred) const {
  if (projections.empty()) throw StructuralError("empty spectral decomposition");
  Operator acc = Operator::zero(projections.front().algebra());
  for (std::size_t i = 0; i < eigenvalues.size(); ++i)
    if (pred(eigenvalues[i])) acc += projections[i];
  return acc;
}

SpectralDecomposition spectral(const Operator& x, double cluster_tol) {
  const double scale = std::max(1.0, norm(x));
  if (hermitian_defect(x) > kStructureTolerance * scale)
    throw DomainError("spectral decomposition needs a self-adjoint operator");

  struct Entry {
    double value;
    std::size_t block;
    Eigen::Index column;
  };
  std::vector<Entry> entries;
  std::vector<Matrix> vectors;
  double spectral_radius = 0.0;
  for (std::size_t i = 0; i < x.block_count(); ++i) {
    const Matrix h = (x.block(i) + x.block(i).adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw NumericError("Hermitian eigensolver failed");
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
      entries.push_back({es.eigenvalues()(j), i, j});
      spectral_radius = std::max(spectral_radius, std::abs(es.eigenvalues()(j)));
    }
    vectors.push_back(es.eigenvectors());
  }
  if (cluster_tol < 0.0) cluster_tol = 1e-8 * spectral_radius;
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.value < b.value; });

  SpectralDecomposition out;
  out.cluster_tolerance = cluster_tol;
  std::size_t start = 0;
  while (start < entries.size()) {
    std::size_t end = start + 1;
    while (end < entries.size() && entries[end].value - entries[end - 1].value <= cluster_tol) ++end;
    double mean = 0.0;
    std::vector<Matrix> proj;
    for (const auto& b : x.algebra().blocks()) proj.push_back(Matrix::Zero(b.dim, b.dim));
    for (std::size_t k = start; k < end; ++k) {
      mean += entries[k].value;
      const auto v = vectors[entries[k].block].col(entries[k].column);
      proj[entries[k].block] += v * v.adjoint();
    }
    out.eigenvalues.push_back(mean / static_cast<double>(end - start));
    out.projections.emplace_back(x.algebra(), std::move(proj));
    start = end;
  }
  return out;
}

Operator apply_hermitian(const Operator& x, const std::function<double(double)>& f) {
  const double scale = std::max(1.0, norm(x));
  if (hermitian_defect(x) > kStructureTolerance * scale)
    throw DomainError("functional calculus needs a self-adjoint operator");
  return x.map_blocks([&](const Matrix& b) -> Matrix {
    Eigen::SelfAdjointEigenSolver<Matrix> es((b + b.adjoint()) / 2.0);
    if (es.info() != Eigen::Success) throw NumericError("Hermitian eigensolver failed");
    Eigen::VectorXd fx = es.eigenvalues().unaryExpr(f);
    return es.eigenvectors() * fx.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  });
}

std::vector<Eigen::VectorXd> hermitian_eigenvalues(const Operator& x) {
  const double scale = std::max(1.0, norm(x));
  if (hermitian_defect(x) > kStructureTolerance * scale)
    throw DomainError("hermitian_eigenvalues needs a self-adjoint operator");
  std::vector<Eigen::VectorXd> out;
  for (const auto& b : x.blocks()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es((b + b.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    out.push_back(es.eigenvalues());
  }
  return out;
}

std::vector<Eigen::VectorXcd> eigenvalues(const Operator& x) {
  std::vector<Eigen::VectorXcd> out;
  for (const auto& b : x.blocks()) {
    Eigen::ComplexEigenSolver<Matrix> es(b, false);
    if (es.info() != Eigen::Success) throw NumericError("complex eigensolver failed");
    out.push_back(es.eigenvalues());
  }
  return out;
}

Operator psd_sqrt(const Operator& b) {
  const double floor = -1e-10 * std::max(1.0, norm(b));
  return apply_hermitian(b, [floor](double lambda) {
    if (lambda < floor) throw DomainError("psd_sqrt: operator is not positive semidefinite");
    return std::sqrt(std::max(lambda, 0.0));
  });
}

Operator abs_self_adjoint(const Operator& v) {
  return apply_hermitian(v, [](double lambda) { return std::abs(lambda); });
}

}  // namespace xidx
