#include "xi_index/harness/ensemble.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "xi_index/errors.hpp"

namespace xidx::harness {

namespace {

std::string normalize(std::string_view text) {
  std::string s;
  for (char c : text) s.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return s;
}

template <class F>
Operator per_block(const AlgebraDescriptor& alg, F&& f) {
  std::vector<Matrix> blocks;
  for (const auto& b : alg.blocks()) blocks.push_back(f(b.dim));
  return Operator(alg, std::move(blocks));
}

}  // namespace

const char* to_string(Ensemble e) noexcept {
  switch (e) {
    case Ensemble::HermitianGaussian: return "hermitian-gaussian";
    case Ensemble::Dissipative: return "dissipative";
    case Ensemble::PositiveDefinite: return "positive-definite";
    case Ensemble::UnitaryHaarLike: return "unitary-haar-like";
  }
  return "unknown";
}

Ensemble parse_ensemble(std::string_view text) {
  const std::string s = normalize(text);
  if (s == "hermitian-gaussian" || s == "hermitian") return Ensemble::HermitianGaussian;
  if (s == "dissipative") return Ensemble::Dissipative;
  if (s == "positive-definite") return Ensemble::PositiveDefinite;
  if (s == "unitary-haar-like" || s == "unitary") return Ensemble::UnitaryHaarLike;
  throw DomainError("unknown ensemble '" + std::string(text) + "'");
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed;
  const std::uint64_t base = splitmix64(state);
  state = base ^ (index * 0xD1B54A32D192ED03ULL);
  return splitmix64(state);
}

double Generator::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

int Generator::uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

double Generator::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

Matrix Generator::gaussian_block(int n) {
  const double scale = 1.0 / std::sqrt(2.0 * n);
  Matrix g(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) {
      const double re = normal();
      const double im = normal();
      g(r, c) = Complex(re, im) * scale;
    }
  return g;
}

Operator Generator::gaussian(const AlgebraDescriptor& alg) {
  return per_block(alg, [&](int n) { return gaussian_block(n); });
}

Operator Generator::hermitian(const AlgebraDescriptor& alg) {
  return per_block(alg, [&](int n) -> Matrix {
    const Matrix g = gaussian_block(n);
    return 0.5 * (g + g.adjoint());
  });
}

Operator Generator::psd(const AlgebraDescriptor& alg) {
  return per_block(alg, [&](int n) -> Matrix {
    const Matrix g = gaussian_block(n);
    return g.adjoint() * g;
  });
}

Operator Generator::dissipative(const AlgebraDescriptor& alg) {
  const Operator a = hermitian(alg);
  const Operator b = psd(alg);
  return a + Complex(0.0, 1.0) * b;
}

Operator Generator::positive_definite(const AlgebraDescriptor& alg) { return psd(alg).shifted(0.5); }

Operator Generator::unitary(const AlgebraDescriptor& alg) {
  return per_block(alg, [&](int n) -> Matrix {
    const Matrix g = gaussian_block(n);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR();
    for (int j = 0; j < n; ++j) {
      const Complex d = r(j, j);
      if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
    }
    return q;
  });
}

Operator Generator::sample(Ensemble e, const AlgebraDescriptor& alg) {
  switch (e) {
    case Ensemble::HermitianGaussian: return hermitian(alg);
    case Ensemble::Dissipative: return dissipative(alg);
    case Ensemble::PositiveDefinite: return positive_definite(alg);
    case Ensemble::UnitaryHaarLike: return unitary(alg);
  }
  return hermitian(alg);
}

Operator Generator::singular_hermitian(const AlgebraDescriptor& alg) {
  const Operator u = unitary(alg);
  std::vector<Matrix> blocks;
  for (std::size_t i = 0; i < alg.block_count(); ++i) {
    const int n = alg.blocks()[i].dim;
    Eigen::VectorXd d(n);
    for (int j = 0; j < n; ++j) {
      // Keep nonzero eigenvalues away from the kernel threshold.
      const double mag = uniform(0.2, 2.0);
      d(j) = uniform(0.0, 1.0) < 0.5 ? -mag : mag;
    }
    const int zeros = n >= 2 ? std::max(1, n / 3) : (i == 0 ? 1 : 0);
    for (int j = 0; j < zeros; ++j) d(j) = 0.0;
    const Matrix& q = u.block(i);
    Matrix h = q * d.cast<Complex>().asDiagonal() * q.adjoint();
    blocks.push_back(0.5 * (h + h.adjoint()));
  }
  return Operator(alg, std::move(blocks));
}

AlgebraDescriptor Generator::algebra(int max_dim, bool two_blocks) {
  const int n = uniform_int(2, std::max(2, max_dim));
  if (!two_blocks) return AlgebraDescriptor::factor(n);
  const int n1 = uniform_int(1, n - 1);
  const int n2 = n - n1;
  const double p = uniform(0.2, 0.8);
  return AlgebraDescriptor({{n1, p / n1}, {n2, (1.0 - p) / n2}});
}

}  // namespace xidx::harness
