#pragma once

// Seeded random operators. Every trial owns a Generator seeded from
// (run seed, trial index), so results do not depend on scheduling.

#include <cstdint>
#include <random>
#include <string_view>

#include "xi_index/algebra.hpp"

namespace xidx::harness {

enum class Ensemble { HermitianGaussian, Dissipative, PositiveDefinite, UnitaryHaarLike };

const char* to_string(Ensemble e) noexcept;
/// Accepts "hermitian-gaussian", "dissipative", "positive-definite",
/// "unitary-haar-like" (case-insensitive, '_' and '-' interchangeable).
Ensemble parse_ensemble(std::string_view text);

/// One splitmix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);
/// Seed of trial `index` in a run seeded with `seed`.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index);

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);
  double normal();

  /// Complex Gaussian matrix with E|g_ij|^2 = 1/n.
  Matrix gaussian_block(int n);

  Operator gaussian(const AlgebraDescriptor& alg);
  /// (G + G*)/2.
  Operator hermitian(const AlgebraDescriptor& alg);
  /// G*G, positive semidefinite.
  Operator psd(const AlgebraDescriptor& alg);
  /// A + iB with A Hermitian Gaussian and B = G*G.
  Operator dissipative(const AlgebraDescriptor& alg);
  /// G*G + I/2.
  Operator positive_definite(const AlgebraDescriptor& alg);
  /// Q from a QR factorization of a Gaussian block, phases normalized.
  Operator unitary(const AlgebraDescriptor& alg);
  Operator sample(Ensemble e, const AlgebraDescriptor& alg);

  /// Hermitian operator with a kernel: in every block of dimension >= 2
  /// about a third of the eigenvalues (at least one) are zero, as is the
  /// first block when it is one-dimensional. Nonzero eigenvalues have
  /// modulus in [0.2, 2].
  Operator singular_hermitian(const AlgebraDescriptor& alg);

  /// Random descriptor of total dimension in [2, max_dim]: a single factor
  /// when `two_blocks` is false, otherwise two factors with the first
  /// carrying trace mass in [0.2, 0.8].
  AlgebraDescriptor algebra(int max_dim, bool two_blocks);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace xidx::harness
