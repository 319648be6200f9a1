#pragma once

// Finite multi-matrix *-algebras  A = M_{n_1}(C) (+) ... (+) M_{n_k}(C)
// equipped with the normalized weighted trace
//
//     tau(X) = sum_i w_i Tr(X_i),      sum_i w_i n_i = 1.
//
// Every finite-dimensional von Neumann algebra with a faithful tracial state
// has this form. Unequal weights give non-integer tau-dimensions.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace xidx {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Default gate on the condition number beyond which an operator is treated
/// as singular.
inline constexpr double kSingularCondition = 1e12;
/// Default dissipativity / self-adjointness tolerance (scaled by max(1, ||X||)).
inline constexpr double kStructureTolerance = 1e-10;

struct Block {
  int dim = 1;
  double weight = 1.0;
  friend bool operator==(const Block&, const Block&) = default;
};

class AlgebraDescriptor {
 public:
  /// Throws StructuralError unless weights are positive, dims positive, at
  /// least one block, and sum w_i n_i = 1 (to 1e-10).
  explicit AlgebraDescriptor(std::vector<Block> blocks, int amplification = 0);

  /// Type I_n factor: a single block (n, 1/n).
  static AlgebraDescriptor factor(int n);

  /// Parses "2x0.25,2x0.25" (dim x weight, comma separated).
  static AlgebraDescriptor parse(std::string_view text);

  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  int total_dim() const noexcept;
  /// Number of times this descriptor was produced by amplify().
  int amplification() const noexcept { return amplification_; }

  std::string to_string() const;

  friend bool operator==(const AlgebraDescriptor&, const AlgebraDescriptor&) = default;

 private:
  std::vector<Block> blocks_;
  int amplification_ = 0;
};

/// A * M_2: each block (n, w) becomes (2n, w/2).
AlgebraDescriptor amplify(const AlgebraDescriptor& alg);

/// Block-diagonal element of an algebra. Immutable value type.
class Operator {
 public:
  /// Validates block count, block shapes and finiteness of every entry.
  Operator(AlgebraDescriptor algebra, std::vector<Matrix> blocks);

  static Operator identity(const AlgebraDescriptor& alg);
  static Operator zero(const AlgebraDescriptor& alg);
  static Operator scalar(const AlgebraDescriptor& alg, Complex value);
  /// Diagonal operator; `entries` runs over all blocks in order.
  static Operator diagonal(const AlgebraDescriptor& alg, std::span<const Complex> entries);
  static Operator diagonal(const AlgebraDescriptor& alg, std::initializer_list<Complex> entries);

  const AlgebraDescriptor& algebra() const noexcept { return algebra_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const Matrix& block(std::size_t i) const { return blocks_.at(i); }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }

  Operator adjoint() const;
  /// X + z I.
  Operator shifted(Complex z) const;
  /// Applies `f` to every block; `f` must preserve the block shape.
  Operator map_blocks(const std::function<Matrix(const Matrix&)>& f) const;

  Operator& operator+=(const Operator& rhs);
  Operator& operator-=(const Operator& rhs);
  Operator& operator*=(Complex s);

  friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
  friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
  friend Operator operator-(Operator x) { return x *= Complex(-1.0); }
  friend Operator operator*(Complex s, Operator x) { return x *= s; }
  friend Operator operator*(Operator x, Complex s) { return x *= s; }
  friend Operator operator*(double s, Operator x) { return x *= Complex(s); }
  friend Operator operator*(const Operator& lhs, const Operator& rhs);

 private:
  struct Unchecked {};
  Operator(Unchecked, AlgebraDescriptor algebra, std::vector<Matrix> blocks);

  AlgebraDescriptor algebra_;
  std::vector<Matrix> blocks_;
};

/// Throws StructuralError when the two operators live in different algebras.
void require_same_algebra(const Operator& a, const Operator& b, std::string_view context);

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

/// tau(X) = sum_i w_i Tr(X_i).
Complex trace(const AlgebraDescriptor& alg, const Operator& x);
Complex trace(const Operator& x);

/// Normalized trace on A (x) M_2 evaluated through the diagonal blocks:
/// tau2([[A, B], [C, D]]) = (tau(A) + tau(D)) / 2.
Complex tau2(const AlgebraDescriptor& alg2, const Operator& x);

// ---------------------------------------------------------------------------
// 2x2 operator matrices over the algebra
// ---------------------------------------------------------------------------

/// [[M, K*], [K, N]] in amplify(alg).
Operator block2(const Operator& m, const Operator& k, const Operator& n);
/// General [[A, B], [C, D]] in amplify(alg).
Operator block2_general(const Operator& a, const Operator& b, const Operator& c, const Operator& d);
/// U* X U with U = (I; 0): the upper-left corner of an amplified operator.
Operator compress_upper(const Operator& x2);
/// W* X W with W = (0; I): the lower-right corner of an amplified operator.
Operator compress_lower(const Operator& x2);
/// The block swap unitary [[0, I], [I, 0]] in amplify(alg).
Operator swap_unitary(const AlgebraDescriptor& alg);

// ---------------------------------------------------------------------------
// Norms, structure tests, inverses
// ---------------------------------------------------------------------------

/// Operator (spectral) norm: max over blocks of the largest singular value.
double norm(const Operator& x);
/// Largest blockwise Frobenius norm; cheap upper bound for norm().
double frobenius_norm(const Operator& x);
/// ||(X - X*)/2||.
double hermitian_defect(const Operator& x);
bool is_self_adjoint(const Operator& x, double tol = kStructureTolerance);
/// ||X* X - I||.
double unitarity_defect(const Operator& x);
/// max(||P^2 - P||, ||P - P*||).
double projection_defect(const Operator& p);

Operator re_part(const Operator& x);
/// (X - X*) / (2i).
Operator im_part(const Operator& x);

/// max(0, -lambda_min(Im X)).
double dissipativity_defect(const Operator& x);
bool is_dissipative(const Operator& x, double tol = kStructureTolerance);

/// sigma_max / sigma_min over all blocks (infinity for exactly singular).
double condition_number(const Operator& x);
bool is_invertible(const Operator& x, double max_condition = kSingularCondition);

struct InverseResult {
  Operator inverse;
  double condition;
};

/// Inverse together with its condition estimate. Throws DomainError when the
/// condition exceeds `max_condition`.
InverseResult inverse_with_condition(const Operator& x, double max_condition = kSingularCondition);
Operator inverse(const Operator& x, double max_condition = kSingularCondition);

// ---------------------------------------------------------------------------
// Spectral calculus for self-adjoint operators
// ---------------------------------------------------------------------------

struct SpectralDecomposition {
  /// Cluster representatives, ascending.
  std::vector<double> eigenvalues;
  /// Orthogonal spectral projections, one per cluster.
  std::vector<Operator> projections;
  double cluster_tolerance = 0.0;

  /// Sum of projections whose eigenvalue satisfies `pred`.
  Operator projection_where(const std::function<bool(double)>& pred) const;
};

/// Eigen-decomposition of a self-adjoint operator. Eigenvalues closer than
/// `cluster_tol` are merged. A negative `cluster_tol` selects the default
/// 1e-8 ||X||. Throws DomainError if X is not self-adjoint (1e-10).
SpectralDecomposition spectral(const Operator& x, double cluster_tol = -1.0);

/// f(X) for self-adjoint X via eigendecomposition of every block.
Operator apply_hermitian(const Operator& x, const std::function<double(double)>& f);

/// Eigenvalues of a self-adjoint operator per block, ascending within a block.
std::vector<Eigen::VectorXd> hermitian_eigenvalues(const Operator& x);
/// Eigenvalues of a general operator per block.
std::vector<Eigen::VectorXcd> eigenvalues(const Operator& x);

/// Square root of a positive semidefinite operator. Throws DomainError when
/// the smallest eigenvalue is below -1e-10 ||B||.
Operator psd_sqrt(const Operator& b);
/// |V| = sqrt(V* V) for self-adjoint V.
Operator abs_self_adjoint(const Operator& v);

}  // namespace xidx
