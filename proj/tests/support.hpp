#pragma once

// Test-side random data and reference computations. Deliberately separate
// from the harness ensembles: the generator is a plain splitmix64 stream
// and the oracles go through Eigen's MatrixFunctions / LU determinant rather
// than the library's own spectral routines.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "xi_index/algebra.hpp"

namespace testsupport {

using xidx::AlgebraDescriptor;
using xidx::Block;
using xidx::Complex;
using xidx::Matrix;
using xidx::Operator;

inline constexpr double kPi = std::numbers::pi;
inline const Complex I1{0.0, 1.0};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double normal() {
    const double u = std::max(uniform(), 1e-300);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * kPi * uniform());
  }

 private:
  std::uint64_t state_;
};

/// Single factor or two blocks with unequal trace mass.
inline AlgebraDescriptor descriptor(Rng& rng, int max_dim) {
  if (max_dim < 2 || rng.uniform() < 0.5) return AlgebraDescriptor::factor(rng.integer(1, std::max(1, max_dim)));
  const int n1 = rng.integer(1, max_dim - 1);
  const int n2 = rng.integer(1, max_dim - n1);
  const double p = rng.uniform(0.2, 0.8);
  return AlgebraDescriptor({Block{n1, p / n1}, Block{n2, (1.0 - p) / n2}});
}

inline Matrix gaussian_matrix(Rng& rng, int n) {
  Matrix m(n, n);
  const double s = 1.0 / std::sqrt(2.0 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(rng.normal(), rng.normal()) * s;
  return m;
}

template <class F>
Operator per_block(const AlgebraDescriptor& alg, F&& f) {
  std::vector<Matrix> blocks;
  for (const auto& b : alg.blocks()) blocks.push_back(f(b.dim));
  return Operator(alg, std::move(blocks));
}

inline Operator gaussian(Rng& rng, const AlgebraDescriptor& alg) {
  return per_block(alg, [&](int n) { return gaussian_matrix(rng, n); });
}
inline Operator hermitian(Rng& rng, const AlgebraDescriptor& alg) {
  return per_block(alg, [&](int n) {
    Matrix g = gaussian_matrix(rng, n);
    return Matrix((g + g.adjoint()) / 2.0);
  });
}
inline Operator psd(Rng& rng, const AlgebraDescriptor& alg) {
  return per_block(alg, [&](int n) {
    Matrix g = gaussian_matrix(rng, n);
    return Matrix(g.adjoint() * g);
  });
}
inline Operator positive(Rng& rng, const AlgebraDescriptor& alg) {
  return per_block(alg, [&](int n) {
    Matrix g = gaussian_matrix(rng, n);
    return Matrix(g.adjoint() * g + 0.5 * Matrix::Identity(n, n));
  });
}
inline Operator dissipative(Rng& rng, const AlgebraDescriptor& alg) {
  return hermitian(rng, alg) + I1 * psd(rng, alg);
}
inline Operator unitary(Rng& rng, const AlgebraDescriptor& alg) {
  return per_block(alg, [&](int n) {
    Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(rng, n));
    return Matrix(qr.householderQ());
  });
}
/// Hermitian with prescribed eigenvalues in a random basis (one list per block).
inline Operator hermitian_with_spectrum(Rng& rng, const AlgebraDescriptor& alg,
                                        const std::vector<std::vector<double>>& spectra) {
  std::vector<Matrix> blocks;
  for (std::size_t b = 0; b < alg.block_count(); ++b) {
    const int n = alg.blocks()[b].dim;
    Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(rng, n));
    const Matrix q = qr.householderQ();
    Eigen::VectorXcd d(n);
    for (int i = 0; i < n; ++i) d(i) = spectra[b][i];
    blocks.push_back(q * d.asDiagonal() * q.adjoint());
  }
  return Operator(alg, std::move(blocks));
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Principal matrix logarithm per block (Eigen's Schur-Parlett route). For
/// spectra in the closed upper half plane it coincides with both branches.
inline Operator principal_log(const Operator& x) {
  std::vector<Matrix> blocks;
  for (const auto& b : x.blocks()) blocks.push_back(b.log());
  return Operator(x.algebra(), std::move(blocks));
}

inline Operator matrix_exp(const Operator& x) {
  std::vector<Matrix> blocks;
  for (const auto& b : x.blocks()) blocks.push_back(b.exp());
  return Operator(x.algebra(), std::move(blocks));
}

inline Complex weighted_trace(const Operator& x) {
  Complex t = 0.0;
  for (std::size_t b = 0; b < x.block_count(); ++b) t += x.algebra().blocks()[b].weight * x.block(b).trace();
  return t;
}

/// prod_b |det X_b|^{w_b} through LU determinants.
inline double fk_oracle(const Operator& x) {
  double log_abs = 0.0;
  for (std::size_t b = 0; b < x.block_count(); ++b)
    log_abs += x.algebra().blocks()[b].weight * std::log(std::abs(x.block(b).determinant()));
  return std::exp(log_abs);
}

/// Weighted count of eigenvalues below `lambda` (strictly), from Eigen's
/// self-adjoint solver, with a half weight inside |mu - lambda| <= tol.
inline double weighted_count_below(const Operator& h, double lambda, double tol = 0.0) {
  double c = 0.0;
  for (std::size_t b = 0; b < h.block_count(); ++b) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.block(b), Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double d = es.eigenvalues()(i) - lambda;
      if (std::abs(d) <= tol) c += 0.5 * h.algebra().blocks()[b].weight;
      else if (d < 0.0) c += h.algebra().blocks()[b].weight;
    }
  }
  return c;
}

/// tau[(1/pi) arg] over all eigenvalues in the closed upper half plane,
/// arg in [0, pi].
inline double xi_trace_oracle(const Operator& m) {
  double t = 0.0;
  for (std::size_t b = 0; b < m.block_count(); ++b) {
    Eigen::ComplexEigenSolver<Matrix> es(m.block(b), false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      double a = std::arg(es.eigenvalues()(i));
      if (a < 0.0) a = (a < -kPi / 2) ? kPi : 0.0;  // rounding below the real axis
      t += m.algebra().blocks()[b].weight * a / kPi;
    }
  }
  return t;
}

inline double max_abs_diff(const Operator& a, const Operator& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.block_count(); ++i) d = std::max(d, (a.block(i) - b.block(i)).cwiseAbs().maxCoeff());
  return d;
}

inline Operator scalar(Complex z) { return Operator::scalar(AlgebraDescriptor::factor(1), z); }

}  // namespace testsupport
