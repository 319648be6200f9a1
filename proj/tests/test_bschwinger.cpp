#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "xi_index/bschwinger.hpp"
#include "xi_index/errors.hpp"

using namespace xidx;
using namespace testsupport;

namespace {

Complex only(const Operator& x) { return x.block(0)(0, 0); }

BSInstance random_instance(Rng& rng, int max_dim) {
  const auto alg = descriptor(rng, max_dim);
  return BSInstance{dissipative(rng, alg), dissipative(rng, alg), gaussian(rng, alg)};
}

BSInstance scalar_instance(Complex m, Complex n, Complex k) { return {scalar(m), scalar(n), scalar(k)}; }

Operator block_inverse_oracle(const Operator& big) {
  std::vector<Matrix> blocks;
  for (const auto& b : big.blocks()) blocks.push_back(b.fullPivLu().inverse());
  return Operator(big.algebra(), std::move(blocks));
}

double xi_oracle(const Operator& a, const Operator& b) { return xi_trace_oracle(b) - xi_trace_oracle(a); }

}  // namespace

TEST_CASE("schur complements") {
  auto [cm, cn] = schur_complements(scalar_instance(2.0, 1.0, 1.0), 0.0);
  CHECK(std::abs(only(cm) - 1.0) <= 1e-15);
  CHECK(std::abs(only(cn) - 0.5) <= 1e-15);

  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    BSInstance inst = random_instance(rng, 6);
    const Complex z(rng.normal(), rng.uniform(0.1, 2.0));
    const auto [m_side, n_side] = schur_complements(inst, z);
    const Operator big_inv = block_inverse_oracle(block2(inst.M, inst.K, inst.N).shifted(z));
    const double scale = std::max(1.0, norm(big_inv));
    CHECK(norm(compress_upper(big_inv) - inverse(m_side)) / scale <= 1e-9);
    CHECK(norm(compress_lower(big_inv) - inverse(n_side)) / scale <= 1e-9);
    CHECK(schur_inverse_residual(inst, z) <= 1e-9);
    CHECK(resolvent_identity_residual(inst, z) <= 1e-9);

    inst.K = Operator::zero(inst.M.algebra());
    const auto [m0, n0] = schur_complements(inst, z);
    CHECK(max_abs_diff(m0, inst.M.shifted(z)) == 0.0);
    CHECK(max_abs_diff(n0, inst.N.shifted(z)) == 0.0);
  }
  CHECK_THROWS_AS(schur_complements(scalar_instance(0.0, 1.0, 1.0), 0.0), DomainError);
  CHECK_THROWS_AS(schur_complements(scalar_instance(-I1, 1.0, 1.0), 0.0), DomainError);
}

TEST_CASE("verify_bs scalar examples") {
  // 1 - 2 = -1 on both sides.
  const auto whole = verify_bs(scalar_instance(1.0, 1.0, std::sqrt(2.0)));
  CHECK(whole.passed());
  CHECK(whole.values.at("xi_lhs").real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(whole.values.at("xi_rhs").real() == doctest::Approx(1.0).epsilon(1e-12));

  // 1 - 1/i = 1 + i and i - 1.
  const auto quarter = verify_bs(scalar_instance(1.0, I1, 1.0));
  CHECK(quarter.passed());
  CHECK(quarter.values.at("xi_lhs").real() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(quarter.values.at("xi_rhs").real() == doctest::Approx(0.25).epsilon(1e-12));

  const auto alg = AlgebraDescriptor::factor(3);
  const auto zero = verify_bs({Operator::scalar(alg, 1.0 + I1), Operator::identity(alg), Operator::zero(alg)});
  CHECK(zero.passed());
  CHECK(std::abs(zero.values.at("xi_lhs")) <= 1e-14);

  CHECK_THROWS_AS(verify_bs(scalar_instance(0.0, 1.0, 1.0)), DomainError);
  CHECK_THROWS_AS(verify_bs(scalar_instance(1.0, -I1, 1.0)), DomainError);
}

TEST_CASE("verify_bs on random instances against an eigenvalue oracle") {
  Rng rng(32);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const BSInstance inst = random_instance(rng, 8);
    if (condition_number(inst.M) > 1e8 || condition_number(inst.N) > 1e8) continue;
    const auto report = verify_bs(inst);
    CHECK(report.passed());
    const Operator kstar = inst.K.adjoint();
    const double lhs = xi_oracle(inst.M, inst.M - kstar * inverse(inst.N) * inst.K);
    const double rhs = xi_oracle(inst.N, inst.N - inst.K * inverse(inst.M) * kstar);
    CHECK(std::abs(report.values.at("xi_lhs").real() - lhs) <= 1e-8);
    CHECK(std::abs(report.values.at("xi_rhs").real() - rhs) <= 1e-8);
    CHECK(verify_bs(inst.swapped()).passed());
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("bs_limit examples") {
  const auto sched = EpsSchedule::geometric();
  const auto inst = scalar_instance(0.0, 1.0, 1.0);
  for (LimitMode mode : {LimitMode::BothRegularized, LimitMode::NInvertible, LimitMode::Boundary}) {
    CAPTURE(to_string(mode));
    if (mode == LimitMode::Boundary) {
      // M = 0 has a kernel that K* does not avoid.
      CHECK_THROWS_AS(bs_limit(inst, sched, mode), ExistenceError);
      continue;
    }
    const auto report = bs_limit(inst, sched, mode);
    CHECK(report.passed());
    CHECK(report.values.at("xi_lhs").real() == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(report.values.at("xi_rhs").real() == doctest::Approx(0.5).epsilon(1e-6));
  }

  const auto alg = AlgebraDescriptor::factor(2);
  const BSInstance decoupled{Operator::diagonal(alg, {0.0, 1.0}), Operator::identity(alg), Operator::zero(alg)};
  for (LimitMode mode : {LimitMode::BothRegularized, LimitMode::NInvertible, LimitMode::Boundary}) {
    const auto report = bs_limit(decoupled, sched, mode);
    CHECK(report.passed());
    CHECK(std::abs(report.values.at("xi_lhs")) <= 1e-6);
  }

  // Singular self-adjoint M whose kernel K* avoids.
  Matrix k(2, 2);
  k << 0.0, 1.0, 0.0, 0.0;
  const BSInstance corner{Operator::diagonal(alg, {0.0, 2.0}), Operator::identity(alg), Operator(alg, {k})};
  const auto boundary = bs_limit(corner, sched, LimitMode::Boundary);
  CHECK(boundary.passed());
  CHECK(boundary.notes.at("boundary_route") == "pseudoinverse");
  CHECK(std::abs(boundary.values.at("xi_rhs")) <= 1e-6);
}

TEST_CASE("bs_limit modes agree with the invertible identity") {
  Rng rng(33);
  const auto sched = EpsSchedule::geometric();
  for (int trial = 0; trial < 30; ++trial) {
    const BSInstance inst = random_instance(rng, 5);
    if (condition_number(inst.M) > 1e6 || condition_number(inst.N) > 1e6) continue;
    const auto exact = verify_bs(inst);
    REQUIRE(exact.passed());
    for (LimitMode mode : {LimitMode::BothRegularized, LimitMode::NInvertible, LimitMode::Boundary}) {
      CAPTURE(to_string(mode));
      const auto report = bs_limit(inst, sched, mode);
      CHECK(report.passed());
      CHECK(std::abs(report.values.at("xi_lhs") - exact.values.at("xi_lhs")) <= 1e-6);
      CHECK(std::abs(report.values.at("xi_rhs") - exact.values.at("xi_rhs")) <= 1e-6);
    }
  }
}

TEST_CASE("stalled extrapolation carries its history") {
  EpsSchedule sched = EpsSchedule::geometric(1e-1, 0.5, 4);
  sched.stall_tolerance = 1e-30;
  try {
    bs_limit(scalar_instance(0.0, 1.0, 1.0), sched, LimitMode::BothRegularized);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK_FALSE(e.history().empty());
  }
}

TEST_CASE("block corollary") {
  const auto scalar_case = block_corollary(scalar_instance(I1, 1.0, 1.0), 1e-12);
  CHECK(scalar_case.passed());

  const auto alg = AlgebraDescriptor::factor(2);
  const auto decoupled =
      block_corollary({Operator::scalar(alg, 1.0 + I1), Operator::scalar(alg, -1.0 + I1), Operator::zero(alg)});
  CHECK(decoupled.passed());
  // (1/4 + 3/4) / 2 per half, doubled.
  CHECK(decoupled.values.at("two_tau2_xi").real() == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    const BSInstance inst = random_instance(rng, 6);
    if (condition_number(inst.M) > 1e6 || condition_number(inst.N) > 1e6) continue;
    const auto report = block_corollary(inst);
    CHECK(report.passed());
    const auto swapped = block_corollary(inst.swapped());
    CHECK(swapped.passed());
    CHECK(std::abs(report.values.at("two_tau2_xi") - swapped.values.at("two_tau2_xi")) <= 1e-9);
  }
}

TEST_CASE("self-adjoint specialization") {
  const auto one = sa_specialization(scalar(1.0), scalar(std::sqrt(2.0)), scalar(1.0));
  CHECK(one.passed());
  CHECK(one.values.at("count_negative_H").real() == doctest::Approx(1.0));
  CHECK(one.values.at("count_bs_above_one").real() == doctest::Approx(1.0));
  CHECK(one.values.at("index_lhs").real() == doctest::Approx(-1.0));
  CHECK(one.notes.at("convention") == kPerturbationConvention);

  const auto alg = AlgebraDescriptor({Block{1, 0.3}, Block{1, 0.7}});
  const auto none = sa_specialization(Operator::diagonal(alg, {1.0, -2.0}), Operator::zero(alg),
                                      Operator::diagonal(alg, {3.0, -1.0}));
  CHECK(none.passed());
  CHECK(std::abs(none.values.at("index_lhs")) <= 1e-15);

  Rng rng(35);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = descriptor(rng, 8);
    const bool counting = trial % 2 == 1;
    const Operator h0 = counting ? positive(rng, a) : hermitian(rng, a);
    const Operator n = counting ? Operator::identity(a) : hermitian(rng, a);
    const Operator k = rng.uniform(0.5, 2.0) * gaussian(rng, a);
    try {
      const auto report = sa_specialization(h0, k, n);
      CHECK(report.passed());
      const Operator h = re_part(h0 - k.adjoint() * inverse(n) * k);
      const double expected = weighted_count_below(h0, 0.0) - weighted_count_below(h, 0.0);
      CHECK(std::abs(report.values.at("index_lhs").real() - expected) <= 1e-12);
      CHECK(report.values.count("count_negative_H") == (counting ? 1u : 0u));
      ++checked;
    } catch (const DomainError&) {
      // near-singular draw
    }
  }
  CHECK(checked > 150);
}

TEST_CASE("factoring a self-adjoint perturbation") {
  const auto alg = AlgebraDescriptor::factor(2);
  const auto [k1, n1] = factor_perturbation(Operator::identity(alg));
  CHECK(max_abs_diff(k1, Operator::identity(alg)) <= 1e-15);
  CHECK(max_abs_diff(n1, Operator::scalar(alg, -1.0)) <= 1e-15);

  const auto [k2, n2] = factor_perturbation(Operator::diagonal(alg, {4.0, -1.0}));
  CHECK(max_abs_diff(k2, Operator::diagonal(alg, {2.0, 1.0})) <= 1e-14);
  CHECK(max_abs_diff(n2, Operator::diagonal(alg, {-1.0, 1.0})) <= 1e-14);
  CHECK_THROWS_AS(factor_perturbation(Operator::scalar(alg, I1)), DomainError);

  Rng rng(36);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = descriptor(rng, 8);
    const Operator v = hermitian(rng, a);
    const auto [k, n] = factor_perturbation(v);
    CHECK(norm(-1.0 * (k.adjoint() * inverse(n) * k) - v) <= 1e-10);
    CHECK(unitarity_defect(n) <= 1e-10);
  }
}

TEST_CASE("large-y asymptotics of the Herglotz logarithms") {
  Rng rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const auto report = herglotz_asymptotics(random_instance(rng, 6));
    CHECK(report.passed());
    CHECK(report.values.count("c_tau2_log_M") == 1);
  }
}
