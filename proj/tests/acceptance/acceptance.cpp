// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Instances come from the harness generators with fixed seeds.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "xi_index/bschwinger.hpp"
#include "xi_index/dets.hpp"
#include "xi_index/errors.hpp"
#include "xi_index/harness/config.hpp"
#include "xi_index/harness/ensemble.hpp"
#include "xi_index/harness/runner.hpp"
#include "xi_index/oplog.hpp"
#include "xi_index/scattering.hpp"
#include "xi_index/xi.hpp"

using namespace xidx;
using namespace xidx::harness;

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  // Records `value <= bound` under `label`.
  void bound(const std::string& label, double value, double limit) {
    const bool ok = std::isfinite(value) && value <= limit;
    passed = passed && ok;
    detail << ' ' << label << '=' << value << (ok ? "<=" : ">") << limit << ';';
  }
  void require(const std::string& label, bool ok) {
    passed = passed && ok;
    detail << ' ' << label << '=' << (ok ? "yes" : "no") << ';';
  }
  void note(const std::string& text) { detail << ' ' << text << ';'; }
};

Operator scalar(Complex z) { return Operator::scalar(AlgebraDescriptor::factor(1), z); }

Generator trial_generator(std::uint64_t seed, int trial) { return Generator(trial_seed(seed, static_cast<std::uint64_t>(trial))); }

// Draws until the condition number is at most 1e8.
template <class Draw>
Operator well_conditioned(Draw draw) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    Operator x = draw();
    if (condition_number(x) <= kResampleCondition) return x;
  }
  throw NumericError("no well-conditioned draw in 16 attempts");
}

BSInstance random_bs(Generator& g, const AlgebraDescriptor& alg) {
  const Operator m = well_conditioned([&] { return g.dissipative(alg); });
  const Operator n = well_conditioned([&] { return g.dissipative(alg); });
  return BSInstance{m, n, g.gaussian(alg)};
}

void ac1(Outcome& o) {
  ExperimentConfig cfg;
  cfg.command = Command::BsVerify;
  cfg.seed = 1001;
  cfg.trials = 500;
  cfg.dim = 16;
  const auto start = std::chrono::steady_clock::now();
  const RunResult r = run(cfg, false);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require("all 500 reports pass", r.summary.passed() && r.summary.reports == 500);
  o.bound("max|xi_lhs-xi_rhs|", r.summary.max_residual, 1e-8);
  o.bound("runtime_s", seconds, 60.0);
}

void ac2(Outcome& o) {
  o.bound("|xi(1,-1)-1|", std::abs(xi_index(scalar(1.0), scalar(-1.0)) - 1.0), 1e-12);
  o.bound("|xi(i,i-1)-1/4|", std::abs(xi_index(scalar(kI), scalar(kI - 1.0)) - 0.25), 1e-12);
  o.bound("|xi(1,1+i)-1/4|", std::abs(xi_index(scalar(1.0), scalar(1.0 + kI)) - 0.25), 1e-12);
  o.bound("|Xi(0)-1/2|", std::abs(xi_trace(scalar(0.0)) - 0.5), 1e-12);
  const BSInstance limit{scalar(0.0), scalar(1.0), scalar(1.0)};
  const auto rep = bs_limit(limit, EpsSchedule::geometric(), LimitMode::NInvertible);
  o.bound("|lhs-1/2|", std::abs(rep.values.at("xi_lhs") - 0.5), 1e-12);
  o.bound("|rhs-1/2|", std::abs(rep.values.at("xi_rhs") - 0.5), 1e-12);
}

void ac3(Outcome& o) {
  double invertible = 0.0, singular = 0.0;
  for (int t = 0; t < 200; ++t) {
    Generator g = trial_generator(1003, t);
    const auto alg = g.algebra(12, t % 2 == 1);
    const Operator h = well_conditioned([&] { return g.hermitian(alg); });
    const Operator a = xi_operator(h, XiStrategy{XiMethod::SelfAdjointSpectral});
    const Operator b = xi_operator(h, XiStrategy{XiMethod::InvertibleLog});
    invertible = std::max(invertible, norm(a - b));
  }
  for (int t = 0; t < 50; ++t) {
    Generator g = trial_generator(2003, t);
    const Operator h = g.singular_hermitian(g.algebra(12, t % 2 == 1));
    const Operator a = xi_operator(h, XiStrategy{XiMethod::SelfAdjointSpectral});
    const Operator b = xi_operator(h, XiStrategy{XiMethod::EpsLimit});
    singular = std::max(singular, norm(a - b));
  }
  o.bound("invertible spectral-vs-log", invertible, 1e-9);
  o.bound("singular spectral-vs-eps", singular, 1e-6);
}

void ac4(Outcome& o) {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Generator g = trial_generator(1004, t);
    const auto alg = g.algebra(8, t % 2 == 1);
    const Operator m = well_conditioned([&] { return g.dissipative(alg); });
    worst = std::max(worst, norm(log_op(m, Branch::ImCut) - log_integral(m)));
  }
  o.bound("max||log_op-integral||", worst, 1e-6);
}

void ac5(Outcome& o) {
  double worst = 0.0;
  bool all = true;
  for (int t = 0; t < 200; ++t) {
    Generator g = trial_generator(1005, t);
    const auto alg = g.algebra(12, t % 2 == 1);
    const Operator m = well_conditioned([&] { return g.dissipative(alg); });
    const auto rep = polar_identity_check(m);
    for (const auto& c : rep.checks)
      if (c.name == "polar") worst = std::max(worst, c.residual);
    all = all && rep.passed();
  }
  o.require("reports pass", all);
  o.bound("max|det-exp(i pi tau Xi) Delta|", worst, 1e-8);
}

// Same endpoints as the straight path I -> M, bowed into the upper half plane.
Operator bowed(const Operator& m, double t) {
  const Operator id = Operator::identity(m.algebra());
  return (1.0 - t) * id + t * m + Complex(0.0, 0.7 * std::sin(kPi * t)) * id;
}

void ac6(Outcome& o) {
  double homotopy = 0.0, modulus = 0.0, product = 0.0, series = 0.0;
  for (int t = 0; t < 25; ++t) {
    Generator g = trial_generator(1006, t);
    const auto alg = g.algebra(6, t % 2 == 1);
    const Operator id = Operator::identity(alg);
    const Operator lift = Complex(0.0, 0.3) * id;
    const Operator m = well_conditioned([&] { return g.dissipative(alg); }) + lift;

    const auto straight = dlhs_det_path(OperatorPath::linear(id, m));
    std::vector<std::pair<double, Operator>> samples;
    for (int k = 0; k <= 64; ++k) samples.emplace_back(k / 64.0, bowed(m, k / 64.0));
    const auto curved = dlhs_det_path(OperatorPath::sampled(samples));
    homotopy = std::max(homotopy, std::abs(straight.value - curved.value));

    const Operator h0 = well_conditioned([&] { return g.dissipative(alg); }) + lift;
    const Operator h1 = well_conditioned([&] { return g.dissipative(alg); }) + lift;
    const auto p = OperatorPath::linear(h0, h1);
    const auto dp = dlhs_det_path(p);
    const double fk = fk_det(h1 * inverse(h0));
    modulus = std::max(modulus, std::abs(std::abs(dp.value) - fk) / fk);

    const Operator g0 = well_conditioned([&] { return g.dissipative(alg); }) + lift;
    const Operator g1 = well_conditioned([&] { return g.dissipative(alg); }) + lift;
    const auto q = OperatorPath::linear(g0, g1);
    const Complex separate = dp.value * dlhs_det_path(q).value;
    product = std::max(product,
                       std::abs(dlhs_det_path(OperatorPath::product(p, q)).value - separate) / std::abs(separate));

    Operator d0 = g.gaussian(alg), d1 = g.gaussian(alg);
    d0 = (g.uniform(0.05, 0.45) / norm(d0)) * d0;
    d1 = (g.uniform(0.05, 0.45) / norm(d1)) * d1;
    const auto near = dlhs_det_path(OperatorPath::linear(id + d0, id + d1));
    const Complex expected = std::exp(trace(log_series(id + d1)) - trace(log_series(id + d0)));
    series = std::max(series, std::abs(near.value - expected));
  }
  o.bound("homotopy", homotopy, 2e-6);
  o.bound("modulus-vs-FK(rel)", modulus, 1e-6);
  o.bound("multiplicativity(rel)", product, 1e-6);
  o.bound("near-identity", series, 1e-8);
}

void ac7(Outcome& o) {
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    Generator g = trial_generator(1007, t);
    const auto alg = g.algebra(12, t % 2 == 1);
    const Operator a = well_conditioned([&] { return g.hermitian(alg); });
    const auto rep = xi_dissipative_identity(a, g.psd(alg));
    for (const auto& c : rep.checks)
      if (c.name != "unitarity") worst = std::max(worst, c.residual);
    o.passed = o.passed && rep.passed();
  }
  o.bound("max pairwise residual", worst, 1e-8);

  const auto one = xi_dissipative_identity(scalar(1.0), scalar(1.0));
  o.bound("|xi(1,1+i)-1/4|", std::abs(one.values.at("xi") - 0.25), 1e-12);
  o.bound("|S-i|", std::abs(one.values.at("tau_S") - kI), 1e-12);
  // The resolvent form is S^{-1}: -i here, with argument of opposite sign.
  o.bound("|S_resolvent_form+i|", std::abs(one.values.at("tau_S_resolvent_form") + kI), 1e-12);
  o.require("sign discrepancy recorded in report", !one.warnings.empty());
  o.note("arg(S)/2pi=" + std::to_string(one.values.at("arg_S").real()) +
         " arg(S_resolvent_form)/2pi=" + std::to_string(one.values.at("arg_S_resolvent_form").real()));
}

void ac8(Outcome& o) {
  ExperimentConfig cfg;
  cfg.command = Command::BkVerify;
  cfg.seed = 1008;
  cfg.trials = 200;
  cfg.dim = 12;
  const RunResult r = run(cfg, false);
  std::size_t matrix = 0, synthetic = 0;
  for (const auto& rec : r.records) {
    if (rec.value("identity", "") == "birman-krein") ++matrix;
    if (rec.value("identity", "") == "birman-krein-synthetic") ++synthetic;
  }
  o.require("all links pass", r.summary.passed());
  o.bound("max residual", r.summary.max_residual, 1e-7);
  o.require("matrix and synthetic instances", matrix >= 50 && synthetic >= 50);
  o.note("matrix=" + std::to_string(matrix) + " synthetic=" + std::to_string(synthetic));

  const auto quarter = birman_krein_synthetic(scalar(1.0), scalar(1.0 + kI));
  o.require("scalar calN=1+i passes", quarter.passed());
  o.bound("|det S-i|", std::abs(quarter.values.at("det_S_path") - kI), 1e-7);
}

void ac9(Outcome& o) {
  const AlgebraDescriptor alg({Block{1, 0.3}, Block{1, 0.7}});
  const double value = xi_index(Operator::identity(alg), Operator::diagonal(alg, {-1.0, 1.0}));
  o.bound("|xi(I,diag(-1,1))-0.3|", std::abs(value - 0.3), 1e-12);
  const double index = tau_fredholm_index(sign_projections(Operator::identity(alg)).negative,
                                          sign_projections(Operator::diagonal(alg, {-1.0, 1.0})).negative);
  o.bound("|index_tau+0.3|", std::abs(index + 0.3), 1e-12);
}

void ac10(Outcome& o) {
  double resolvent = 0.0;
  bool decay = true;
  double worst_slope = -HUGE_VAL;
  for (int t = 0; t < 50; ++t) {
    Generator g = trial_generator(1010, t);
    const BSInstance inst = random_bs(g, g.algebra(10, t % 2 == 1));
    for (double y : {1e2, 1e3, 1e4}) resolvent = std::max(resolvent, resolvent_identity_residual(inst, Complex(0.0, y)));
    resolvent = std::max(resolvent, resolvent_identity_residual(inst, Complex(g.normal(), g.uniform(0.1, 2.0))));
    const auto rep = herglotz_asymptotics(inst);
    decay = decay && rep.passed();
    for (const auto& [k, v] : rep.values)
      if (k.rfind("slope_", 0) == 0) worst_slope = std::max(worst_slope, v.real());
  }
  o.bound("resolvent identity", resolvent, 1e-9);
  o.require("1/y decay and additivity", decay);
  o.note("steepest observed slope=" + std::to_string(worst_slope));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"AC-1 Birman-Schwinger identity, 500 instances", ac1},
      {"AC-2 scalar oracles", ac2},
      {"AC-3 Xi strategy consistency", ac3},
      {"AC-4 logarithm vs integral representation", ac4},
      {"AC-5 polar determinant identity", ac5},
      {"AC-6 path determinant laws", ac6},
      {"AC-7 xi(A, A+iB) three-way identity", ac7},
      {"AC-8 Birman-Krein chain", ac8},
      {"AC-9 non-integer index", ac9},
      {"AC-10 resolvent identity and 1/y asymptotics", ac10},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.passed = false;
      o.note(std::string("exception: ") + e.what());
    }
    if (!o.passed) ++failures;
    std::printf("[%s] %s:%s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
