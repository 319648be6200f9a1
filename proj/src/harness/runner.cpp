#include "xi_index/harness/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "xi_index/bschwinger.hpp"
#include "xi_index/dets.hpp"
#include "xi_index/errors.hpp"
#include "xi_index/harness/matrix_io.hpp"
#include "xi_index/harness/report_json.hpp"
#include "xi_index/scattering.hpp"
#include "xi_index/xi.hpp"

namespace xidx::harness {

namespace {

using nlohmann::json;

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const ExistenceError*>(&e)) return "existence";
  if (dynamic_cast<const PathError*>(&e)) return "path";
  if (dynamic_cast<const BranchError*>(&e)) return "branch";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const NumericError*>(&e)) return "numeric";
  if (dynamic_cast<const StructuralError*>(&e)) return "structural";
  return "internal";
}

// Collects the reports of one trial; an identity that throws becomes an
// error record and the remaining identities still run.
class TrialScope {
 public:
  TrialScope(const ExperimentConfig& cfg, std::int64_t trial, AlgebraDescriptor alg)
      : cfg_(cfg), alg_(std::move(alg)) {
    out_.trial = trial;
  }

  const AlgebraDescriptor& algebra() const noexcept { return alg_; }

  void attempt(const std::string& identity, const std::function<VerificationReport()>& fn) {
    try {
      VerificationReport r = fn();
      r.inputs.seed = cfg_.seed;
      r.inputs.trial = out_.trial;
      out_.reports.push_back(std::move(r));
    } catch (const ConfigError&) {
      throw;
    } catch (const NumericError& e) {
      json rec = error_record(identity, digest(), error_kind(e), e.what());
      rec["error"]["history"] = e.history();
      out_.errors.push_back(std::move(rec));
    } catch (const ExistenceError& e) {
      json rec = error_record(identity, digest(), error_kind(e), e.what());
      rec["error"]["obstruction"] = e.obstruction();
      rec["error"]["history"] = e.history();
      out_.errors.push_back(std::move(rec));
    } catch (const std::exception& e) {
      out_.errors.push_back(error_record(identity, digest(), error_kind(e), e.what()));
    }
  }

  TrialOutcome take() { return std::move(out_); }

 private:
  InputDigest digest() const { return digest_of(alg_, cfg_.seed, out_.trial); }

  const ExperimentConfig& cfg_;
  AlgebraDescriptor alg_;
  TrialOutcome out_;
};

double tol_or(const ExperimentConfig& cfg, double fallback) { return cfg.tol.value_or(fallback); }

// Redraws until `ok` accepts the sample; after the attempt budget the last
// draw is used and the identity reports the problem itself.
template <class T>
T draw(Generator& g, const std::function<T(Generator&)>& sample, const std::function<bool(const T&)>& ok) {
  T x = sample(g);
  for (int attempt = 1; attempt < 16 && !ok(x); ++attempt) x = sample(g);
  return x;
}

bool well_conditioned(const Operator& x) { return condition_number(x) <= kResampleCondition; }

Operator draw_invertible(Generator& g, const std::function<Operator(Generator&)>& sample) {
  return draw<Operator>(g, sample, well_conditioned);
}

BSInstance draw_bs(Generator& g, const AlgebraDescriptor& alg) {
  return draw<BSInstance>(
      g,
      [&](Generator& gen) {
        Operator m = gen.dissipative(alg);
        Operator n = gen.dissipative(alg);
        Operator k = gen.gaussian(alg);
        return BSInstance{std::move(m), std::move(n), std::move(k)};
      },
      [](const BSInstance& s) {
        if (!well_conditioned(s.M) || !well_conditioned(s.N)) return false;
        const Operator ks = s.K.adjoint();
        return well_conditioned(s.M - ks * inverse(s.N) * s.K) && well_conditioned(s.N - s.K * inverse(s.M) * ks);
      });
}

// M singular self-adjoint, so that the regularization in bs_limit matters.
BSInstance draw_bs_limit(Generator& g, const AlgebraDescriptor& alg, LimitMode mode) {
  switch (mode) {
    case LimitMode::BothRegularized:
      return draw_bs(g, alg);
    case LimitMode::NInvertible:
      return draw<BSInstance>(
          g,
          [&](Generator& gen) {
            Operator m = gen.singular_hermitian(alg);
            Operator n = gen.dissipative(alg);
            Operator k = gen.gaussian(alg);
            return BSInstance{std::move(m), std::move(n), std::move(k)};
          },
          [](const BSInstance& s) {
            return well_conditioned(s.N) && well_conditioned(s.M - s.K.adjoint() * inverse(s.N) * s.K);
          });
    case LimitMode::Boundary:
      return draw<BSInstance>(
          g,
          [&](Generator& gen) {
            Operator m = gen.singular_hermitian(alg);
            const Operator range = Operator::identity(alg) - sign_projections(m).kernel;
            Operator n = gen.dissipative(alg);
            Operator k = gen.gaussian(alg) * range;
            return BSInstance{std::move(m), std::move(n), std::move(k)};
          },
          [](const BSInstance& s) {
            return well_conditioned(s.N) && well_conditioned(s.M - s.K.adjoint() * inverse(s.N) * s.K);
          });
  }
  return draw_bs(g, alg);
}

BKInstance draw_bk(Generator& g, const AlgebraDescriptor& alg) {
  return draw<BKInstance>(
      g,
      [&](Generator& gen) {
        Operator h0 = gen.hermitian(alg);
        Operator k = gen.gaussian(alg);
        Operator n = gen.hermitian(alg);
        return BKInstance{std::move(h0), std::move(k), std::move(n)};
      },
      [](const BKInstance& s) {
        if (!well_conditioned(s.H0) || !well_conditioned(s.N)) return false;
        return well_conditioned(s.H()) && well_conditioned(s.N - s.K * inverse(s.H0) * s.K.adjoint());
      });
}

// (N, calN) with N self-adjoint invertible, Im calN > 0 and Re calN invertible.
std::pair<Operator, Operator> draw_synthetic(Generator& g, const AlgebraDescriptor& alg) {
  const Operator n = draw_invertible(g, [&](Generator& gen) { return gen.hermitian(alg); });
  const Operator re = draw_invertible(g, [&](Generator& gen) { return gen.hermitian(alg); });
  const Operator im = g.positive_definite(alg);
  return {n, re + Complex(0.0, 1.0) * im};
}

Operator sample_dissipative_compatible(Generator& g, Ensemble e, const AlgebraDescriptor& alg) {
  if (e == Ensemble::UnitaryHaarLike)
    throw DomainError("the unitary ensemble is not dissipative; use hermitian-gaussian, dissipative or "
                      "positive-definite");
  return draw_invertible(g, [&](Generator& gen) { return gen.sample(e, alg); });
}

std::vector<double> default_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(-3.0 + 0.5 * i + 0.0123);
  return grid;
}

void run_xi(TrialScope& scope, Generator& g, const ExperimentConfig& cfg) {
  const Operator m = sample_dissipative_compatible(g, cfg.ensemble, scope.algebra());
  scope.attempt("xi-strategies",
                [&] { return xi_strategy_comparison(m, cfg.eps, tol_or(cfg, 1e-9), tol_or(cfg, 1e-6)); });
}

void run_det(TrialScope& scope, Generator& g, const ExperimentConfig& cfg) {
  const Operator m = sample_dissipative_compatible(g, cfg.ensemble, scope.algebra());
  scope.attempt("polar-determinant", [&] { return polar_identity_check(m); });
}

void run_bs_verify(TrialScope& scope, Generator& g, const ExperimentConfig& cfg) {
  const BSInstance inst = draw_bs(g, scope.algebra());
  scope.attempt("birman-schwinger", [&] { return verify_bs(inst, tol_or(cfg, 1e-8)); });
}

void run_bs_limit(TrialScope& scope, Generator& g, const ExperimentConfig& cfg) {
  const BSInstance inst = draw_bs_limit(g, scope.algebra(), cfg.limit_mode);
  scope.attempt(std::string("birman-schwinger-limit/") + to_string(cfg.limit_mode),
                [&] { return bs_limit(inst, cfg.eps, cfg.limit_mode, tol_or(cfg, 1e-6)); });
}

void run_bk(TrialScope& scope, Generator& g, const ExperimentConfig& cfg, bool synthetic) {
  if (synthetic) {
    const auto [n, cal_n] = draw_synthetic(g, scope.algebra());
    scope.attempt("birman-krein-synthetic", [&] { return birman_krein_synthetic(n, cal_n, tol_or(cfg, 1e-7)); });
  } else {
    const BKInstance inst = draw_bk(g, scope.algebra());
    scope.attempt("birman-krein", [&] { return birman_krein(inst, cfg.eps, tol_or(cfg, 1e-7)); });
  }
}

void run_ssf(TrialScope& scope, Generator& g, const ExperimentConfig& cfg) {
  const Operator h = g.hermitian(scope.algebra());
  const Operator h0 = g.hermitian(scope.algebra());
  const std::vector<double> grid = cfg.grid.empty() ? default_grid() : cfg.grid;
  scope.attempt("spectral-shift", [&] { return ssf_check(h, h0, grid, tol_or(cfg, 1e-9)); });
}

void run_sweep(TrialScope& scope, Generator& g, const ExperimentConfig& cfg, std::int64_t trial) {
  const AlgebraDescriptor& alg = scope.algebra();
  const BSInstance bs = draw_bs(g, alg);
  scope.attempt("birman-schwinger", [&] { return verify_bs(bs, tol_or(cfg, 1e-8)); });
  scope.attempt("block-corollary", [&] { return block_corollary(bs, tol_or(cfg, 1e-8)); });
  scope.attempt("herglotz-asymptotics", [&] { return herglotz_asymptotics(bs); });

  const Operator m = draw_invertible(g, [&](Generator& gen) { return gen.dissipative(alg); });
  scope.attempt("xi-strategies", [&] { return xi_strategy_comparison(m, cfg.eps, tol_or(cfg, 1e-9), tol_or(cfg, 1e-6)); });
  scope.attempt("polar-determinant", [&] { return polar_identity_check(m); });

  const Operator a = draw_invertible(g, [&](Generator& gen) { return gen.hermitian(alg); });
  const Operator b = g.psd(alg);
  scope.attempt("dissipative-xi-arctan-arg", [&] { return xi_dissipative_identity(a, b, tol_or(cfg, 1e-8)); });

  // Odd trials use the counting form (H0 > 0, N = I).
  const bool counting = trial % 2 != 0;
  const Operator h0 = draw_invertible(
      g, [&](Generator& gen) { return counting ? gen.positive_definite(alg) : gen.hermitian(alg); });
  const Operator k = g.gaussian(alg);
  const Operator n = counting ? Operator::identity(alg)
                              : draw_invertible(g, [&](Generator& gen) { return gen.hermitian(alg); });
  scope.attempt("self-adjoint-birman-schwinger", [&] { return sa_specialization(h0, k, n, tol_or(cfg, 1e-10)); });

  run_bk(scope, g, cfg, counting);
  run_ssf(scope, g, cfg);
}

AlgebraDescriptor trial_algebra(const ExperimentConfig& cfg, Generator& g, std::int64_t trial) {
  if (cfg.blocks) return AlgebraDescriptor::parse(*cfg.blocks);
  return g.algebra(cfg.dim, trial % 2 != 0);
}

std::vector<Operator> load_matrices(const ExperimentConfig& cfg) {
  std::vector<Operator> ops;
  for (const auto& path : cfg.matrices) {
    try {
      auto batch = read_operator_file(path);
      for (auto& op : batch) ops.push_back(std::move(op));
    } catch (const StructuralError& e) {
      throw ConfigError(e.what());
    }
  }
  return ops;
}

TrialOutcome run_matrix_trial(const ExperimentConfig& cfg, const Operator& m, std::int64_t index) {
  TrialScope scope(cfg, index, m.algebra());
  if (cfg.command == Command::Xi)
    scope.attempt("xi-strategies", [&] { return xi_strategy_comparison(m, cfg.eps, tol_or(cfg, 1e-9), tol_or(cfg, 1e-6)); });
  else
    scope.attempt("polar-determinant", [&] { return polar_identity_check(m); });
  return scope.take();
}

template <class F>
std::vector<TrialOutcome> parallel_map(std::size_t count, int threads, F&& fn) {
  std::vector<TrialOutcome> results(count);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(count, threads > 0 ? static_cast<std::size_t>(threads) : static_cast<std::size_t>(hw));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          results[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace

VerificationReport xi_strategy_comparison(const Operator& m, const EpsSchedule& sched, double exact_tol,
                                          double limit_tol) {
  const auto start = Clock::now();
  if (!is_dissipative(m)) throw DomainError("xi strategies: operator is not dissipative");
  VerificationReport report;
  report.identity = "xi-strategies";
  report.anchor = "Xi(M) agrees across the log, spectral and eps-limit routes";
  report.inputs = digest_of(m.algebra());

  std::vector<XiMethod> methods;
  if (is_invertible(m)) methods.push_back(XiMethod::InvertibleLog);
  if (is_self_adjoint(m)) methods.push_back(XiMethod::SelfAdjointSpectral);
  methods.push_back(XiMethod::EpsLimit);
  report.notes["auto_method"] = to_string(select_method(m));

  std::vector<XiResult> results;
  for (XiMethod method : methods) {
    XiResult r = compute_xi(m, XiStrategy{method, sched});
    report.values[std::string("tau_xi/") + to_string(method)] = r.trace;
    for (auto& w : r.warnings) report.warnings.push_back(std::string(to_string(method)) + ": " + w);
    if (method == XiMethod::EpsLimit) {
      report.histories["eps_trace"] = r.trace_history;
      report.histories["eps_differences"] = r.differences;
    }
    results.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (std::size_t j = i + 1; j < results.size(); ++j) {
      const bool limit = results[i].method == XiMethod::EpsLimit || results[j].method == XiMethod::EpsLimit;
      report.add_residual(std::string(to_string(results[i].method)) + " vs " + to_string(results[j].method),
                          norm(results[i].value - results[j].value), limit ? limit_tol : exact_tol);
    }
  }
  stamp_elapsed(report, start);
  return report;
}

VerificationReport ssf_check(const Operator& h, const Operator& h0, const std::vector<double>& grid, double tolerance) {
  const auto start = Clock::now();
  VerificationReport report;
  report.identity = "spectral-shift";
  report.anchor = "lambda -> xi(H - lambda, H0 - lambda) on a grid";
  report.inputs = digest_of(h.algebra());

  const auto curve = ssf_curve(h, h0, grid);
  const auto& blocks = h.algebra().blocks();
  const auto ev = hermitian_eigenvalues(h);
  const auto ev0 = hermitian_eigenvalues(h0);

  // Weighted count of eigenvalues below lambda, half weight at lambda.
  auto count = [&](const std::vector<Eigen::VectorXd>& e, double lambda, double kernel_tol) {
    double c = 0.0;
    for (std::size_t b = 0; b < e.size(); ++b)
      for (Eigen::Index i = 0; i < e[b].size(); ++i) {
        const double d = e[b][i] - lambda;
        if (std::abs(d) <= kernel_tol) c += 0.5 * blocks[b].weight;
        else if (d < 0.0) c += blocks[b].weight;
      }
    return c;
  };

  std::vector<double> values;
  double range_excess = 0.0;
  double split_gap = 0.0;
  double count_gap = 0.0;
  for (const auto& [lambda, xi] : curve) {
    values.push_back(xi);
    range_excess = std::max(range_excess, std::abs(xi) - 1.0);
    const Operator hl = h.shifted(-lambda);
    const Operator h0l = h0.shifted(-lambda);
    split_gap = std::max(split_gap, std::abs(xi_selfadjoint_split(hl, h0l).total - xi));
    const double oracle = count(ev0, lambda, kKernelTolerance * norm(h0l)) - count(ev, lambda, kKernelTolerance * norm(hl));
    count_gap = std::max(count_gap, std::abs(oracle - xi));
  }
  report.histories["grid"] = grid;
  report.histories["xi"] = values;
  report.add_residual("range", std::max(0.0, range_excess), tolerance);
  report.add_residual("split-consistency", split_gap, tolerance);
  report.add_residual("eigenvalue-count", count_gap, tolerance);
  stamp_elapsed(report, start);
  return report;
}

TrialOutcome run_trial(const ExperimentConfig& cfg, std::int64_t trial) {
  Generator g(trial_seed(cfg.seed, static_cast<std::uint64_t>(trial)));
  TrialScope scope(cfg, trial, trial_algebra(cfg, g, trial));
  try {
    switch (cfg.command) {
      case Command::Xi: run_xi(scope, g, cfg); break;
      case Command::Det: run_det(scope, g, cfg); break;
      case Command::BsVerify: run_bs_verify(scope, g, cfg); break;
      case Command::BsLimit: run_bs_limit(scope, g, cfg); break;
      case Command::BkVerify: run_bk(scope, g, cfg, trial % 2 != 0); break;
      case Command::Ssf: run_ssf(scope, g, cfg); break;
      case Command::Sweep: run_sweep(scope, g, cfg, trial); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    // Failure while drawing the instance itself.
    const std::exception_ptr error = std::current_exception();
    scope.attempt(to_string(cfg.command), [&]() -> VerificationReport { std::rethrow_exception(error); });
  }
  return scope.take();
}

RunResult run(const ExperimentConfig& cfg, bool with_timing) {
  validate(cfg);
  const auto start = Clock::now();
  std::vector<TrialOutcome> outcomes;
  if (!cfg.matrices.empty()) {
    if (cfg.command != Command::Xi && cfg.command != Command::Det)
      throw ConfigError("--matrix is supported by the xi and det commands only");
    const std::vector<Operator> ops = load_matrices(cfg);
    outcomes = parallel_map(ops.size(), cfg.threads,
                            [&](std::size_t i) { return run_matrix_trial(cfg, ops[i], static_cast<std::int64_t>(i)); });
  } else {
    outcomes = parallel_map(static_cast<std::size_t>(cfg.trials), cfg.threads,
                            [&](std::size_t i) { return run_trial(cfg, static_cast<std::int64_t>(i)); });
  }

  RunResult result;
  RunSummary& s = result.summary;
  s.trials = outcomes.size();
  double worst_ratio = -1.0;
  for (auto& o : outcomes) {
    for (const auto& r : o.reports) {
      ++s.reports;
      if (!r.passed()) ++s.failed;
      s.max_residual = std::max(s.max_residual, r.max_residual());
      if (const Check* w = r.worst()) {
        const double ratio = std::isfinite(w->residual) ? w->residual / w->tolerance : HUGE_VAL;
        if (ratio > worst_ratio) {
          worst_ratio = ratio;
          s.worst = r.identity + "/" + w->name;
        }
      }
      result.records.push_back(to_json(r, with_timing));
    }
    for (auto& e : o.errors) {
      ++s.errors;
      result.records.push_back(std::move(e));
    }
  }
  s.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return result;
}

std::string summary_line(const ExperimentConfig& cfg, const RunSummary& s) {
  std::ostringstream os;
  os << (s.passed() ? "PASS" : "FAIL") << ' ' << to_string(cfg.command) << " seed=" << cfg.seed
     << " trials=" << s.trials << " reports=" << s.reports << " failed=" << s.failed << " errors=" << s.errors
     << std::setprecision(3) << std::scientific << " max_residual=" << s.max_residual;
  if (!s.worst.empty()) os << " worst=" << s.worst;
  os << std::fixed << std::setprecision(2) << " elapsed=" << s.elapsed_ms / 1000.0 << "s";
  return os.str();
}

}  // namespace xidx::harness
