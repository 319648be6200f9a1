#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "xi_index/errors.hpp"
#include "xi_index/scattering.hpp"

using namespace xidx;
using namespace testsupport;

namespace {

Complex only(const Operator& x) { return x.block(0)(0, 0); }

// prod_b det(S_b)^{w_b} for unitary S: exp(i sum_b w_b sum arg(lambda)).
Complex unitary_det_oracle(const Operator& s) {
  double phase = 0.0;
  for (std::size_t b = 0; b < s.block_count(); ++b) {
    Eigen::ComplexEigenSolver<Matrix> es(s.block(b), false);
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j)
      phase += s.algebra().blocks()[b].weight * std::arg(es.eigenvalues()(j));
  }
  return std::polar(1.0, phase);
}

}  // namespace

TEST_CASE("characteristic function examples") {
  const auto alg = AlgebraDescriptor::factor(3);
  const auto trivial = char_function(Operator::diagonal(alg, {1.0, -2.0, 3.0}), Operator::zero(alg));
  CHECK(max_abs_diff(trivial.S, Operator::identity(alg)) <= 1e-15);
  CHECK(trivial.distance_to_minus_one == doctest::Approx(2.0));
  CHECK_FALSE(trivial.minus_one_in_spectrum);

  const auto one = char_function(scalar(1.0), scalar(1.0));
  CHECK(std::abs(only(one.S) - I1) <= 1e-15);
  CHECK(std::abs(only(one.S_alt) + I1) <= 1e-15);

  CHECK_THROWS_AS(char_function(scalar(I1), scalar(1.0)), DomainError);
  CHECK_THROWS_AS(char_function(scalar(1.0), scalar(I1)), DomainError);
  CHECK_THROWS_AS(char_function(scalar(0.0), scalar(1.0)), DomainError);

  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = descriptor(rng, 8);
    const Operator A = hermitian(rng, a);
    const Operator B = psd(rng, a);
    if (condition_number(A) > 1e6) continue;
    const auto cf = char_function(A, B);
    CHECK(cf.unitarity_residual <= 1e-10);
    CHECK(unitarity_defect(cf.S) <= 1e-10);
    CHECK(norm(cf.S_alt * cf.S - Operator::identity(a)) <= 1e-9);
    CHECK(is_self_adjoint(cf.H));
  }
}

TEST_CASE("xi of A + iB through arctan and arg S") {
  const auto quarter = xi_dissipative_identity(scalar(1.0), scalar(1.0));
  CHECK(quarter.passed());
  CHECK(quarter.values.at("xi").real() == doctest::Approx(0.25).epsilon(1e-12));
  const auto negative = xi_dissipative_identity(scalar(-1.0), scalar(1.0));
  CHECK(negative.passed());
  CHECK(negative.values.at("xi").real() == doctest::Approx(-0.25).epsilon(1e-12));

  const auto alg = AlgebraDescriptor({Block{1, 0.3}, Block{2, 0.35}});
  const auto zero = xi_dissipative_identity(Operator::diagonal(alg, {1.0, -1.0, 2.0}), Operator::zero(alg));
  CHECK(zero.passed());
  CHECK(std::abs(zero.values.at("xi")) <= 1e-14);
  CHECK_THROWS_AS(xi_dissipative_identity(scalar(0.0), scalar(1.0)), DomainError);

  Rng rng(42);
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const auto a = descriptor(rng, 8);
    const Operator A = hermitian(rng, a);
    const Operator B = psd(rng, a);
    if (condition_number(A) > 1e6) continue;
    const auto report = xi_dissipative_identity(A, B);
    CHECK(report.passed());
    const double oracle = xi_trace_oracle(A + I1 * B) - xi_trace_oracle(A);
    CHECK(std::abs(report.values.at("xi").real() - oracle) <= 1e-8);
    CHECK(std::abs(report.values.at("xi").real()) <= 0.5 + 1e-12);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("boundary resolvent") {
  const auto alg = AlgebraDescriptor::factor(2);
  const Operator h0 = Operator::diagonal(alg, {1.0, -1.0});
  CHECK(max_abs_diff(boundary_resolvent(h0, Operator::identity(alg)), h0) <= 1e-12);

  try {
    boundary_resolvent(Operator::zero(alg), Operator::identity(alg));
    FAIL("expected ExistenceError");
  } catch (const ExistenceError& e) {
    CHECK(e.obstruction() == doctest::Approx(1.0));
    REQUIRE(e.history().size() == EpsSchedule::geometric().values.size());
    // ||K (i eps)^{-1} K*|| = 1/eps grows along the schedule.
    CHECK(e.history().back() > e.history().front());
  }

  Matrix k(2, 2);
  k << 0.0, 1.0, 0.0, 0.0;
  const Operator corner = boundary_resolvent(Operator::diagonal(alg, {0.0, 2.0}), Operator(alg, {k}));
  CHECK(max_abs_diff(corner, Operator::diagonal(alg, {0.5, 0.0})) <= 1e-12);

  CHECK_THROWS_AS(boundary_resolvent(Operator::scalar(alg, I1), Operator::identity(alg)), DomainError);

  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = descriptor(rng, 8);
    const Operator H0 = hermitian(rng, a);
    if (condition_number(H0) > 1e6) continue;
    const Operator K = gaussian(rng, a);
    const Operator value = boundary_resolvent(H0, K);
    const Operator h0_inv = per_block(a, [&, b = 0](int) mutable { return Matrix(H0.block(b++).fullPivLu().inverse()); });
    const Operator direct = K * h0_inv * K.adjoint();
    CHECK(norm(value - direct) <= 1e-9 * std::max(1.0, norm(direct)));
  }
}

TEST_CASE("Birman-Krein chain on matrix instances") {
  // H = 1 - 2 = -1, calN = -1, S = I.
  const auto flip = birman_krein({scalar(1.0), scalar(std::sqrt(2.0)), scalar(1.0)});
  CHECK(flip.passed());
  CHECK(flip.values.at("xi_H0_H").real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(flip.values.at("det_S_path") - 1.0) <= 1e-9);

  const auto shift = birman_krein({scalar(1.0), scalar(1.0), scalar(-1.0)});
  CHECK(shift.passed());
  CHECK(std::abs(shift.values.at("xi_H0_H")) <= 1e-12);

  const auto alg = AlgebraDescriptor::factor(2);
  const auto decoupled =
      birman_krein({Operator::diagonal(alg, {1.0, -3.0}), Operator::zero(alg), Operator::diagonal(alg, {2.0, -1.0})});
  CHECK(decoupled.passed());
  CHECK(std::abs(decoupled.values.at("xi_H0_H")) <= 1e-12);

  CHECK_THROWS_AS(birman_krein({scalar(0.0), scalar(1.0), scalar(1.0)}), DomainError);
  CHECK_THROWS_AS(birman_krein({scalar(1.0), scalar(1.0), scalar(0.0)}), DomainError);

  Rng rng(44);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = descriptor(rng, 6);
    const BKInstance inst{hermitian(rng, a), gaussian(rng, a), hermitian(rng, a)};
    if (condition_number(inst.H0) > 1e6 || condition_number(inst.N) > 1e6) continue;
    try {
      const auto report = birman_krein(inst);
      CHECK(report.passed());
      const double oracle = weighted_count_below(inst.H(), 0.0) - weighted_count_below(inst.H0, 0.0);
      CHECK(std::abs(report.values.at("xi_H0_H").real() - oracle) <= 1e-9);
      ++checked;
    } catch (const DomainError&) {
      // calN or Re calN near-singular
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("Birman-Krein chain on synthetic boundary data") {
  // S = (i - 1)/(i + 1) = i, xi(1, 1 + i) = 1/4.
  const auto quarter = birman_krein_synthetic(scalar(1.0), scalar(1.0 + I1));
  CHECK(quarter.passed());
  CHECK(std::abs(quarter.values.at("det_S_closed") - I1) <= 1e-12);
  CHECK(std::abs(quarter.values.at("det_S_path") - I1) <= 1e-7);
  CHECK(quarter.values.at("xi_from_arg_S").real() == doctest::Approx(0.25).epsilon(1e-12));

  CHECK_THROWS_AS(birman_krein_synthetic(scalar(1.0), scalar(1.0 - I1)), DomainError);
  CHECK_THROWS_AS(birman_krein_synthetic(scalar(1.0), scalar(I1)), DomainError);

  Rng rng(45);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = descriptor(rng, 6);
    const Operator n = hermitian(rng, a);
    const Operator re = hermitian(rng, a);
    const Operator im = positive(rng, a);
    if (condition_number(n) > 1e6 || condition_number(re) > 1e6) continue;
    const auto report = birman_krein_synthetic(n, re + I1 * im);
    CHECK(report.passed());
    const auto cf = char_function(re, im);
    CHECK(std::abs(report.values.at("det_S_closed") - unitary_det_oracle(cf.S)) <= 1e-9);
    ++checked;
  }
  CHECK(checked > 50);
}
