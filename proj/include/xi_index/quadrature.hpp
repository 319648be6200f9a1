#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature over values that form a
// vector space: std::complex<double>, Operator, ... . The subdivision order
// and the final summation order are deterministic.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace xidx {

struct QuadraturePolicy {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  int max_subintervals = 4000;
};

template <class Value>
struct QuadratureResult {
  Value value;
  double error_estimate = 0.0;
  int evaluations = 0;
  int subintervals = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the nodes kKronrodNodes[1], [3], [5], [7].
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class Value>
struct Panel {
  double a;
  double b;
  Value kronrod;
  double error;
};

template <class Value, class F, class Norm>
Panel<Value> gauss_kronrod_15(F& f, double a, double b, Norm& norm) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Value fc = f(center);
  Value kronrod = kKronrodWeights[7] * fc;
  Value gauss = kGaussWeights[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    Value sum = f(center - dx);
    sum += f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  kronrod = half * kronrod;
  gauss = half * gauss;
  Value diff = kronrod;
  diff += -1.0 * gauss;
  return {a, b, std::move(kronrod), norm(diff)};
}

}  // namespace detail

/// Integrates f over [a, b]. Splits the panel with the largest error
/// estimate until the summed estimate meets max(abs_tol, rel_tol |I|) or the
/// panel budget is exhausted (`converged` is then false).
template <class Value, class F, class Norm>
QuadratureResult<Value> integrate_adaptive(F&& f, double a, double b, const QuadraturePolicy& policy,
                                           Norm&& norm) {
  std::vector<detail::Panel<Value>> panels;
  panels.push_back(detail::gauss_kronrod_15<Value>(f, a, b, norm));
  int evaluations = 15;
  Value running = panels.front().kronrod;
  double running_error = panels.front().error;

  while (true) {
    const double target = std::max(policy.abs_tol, policy.rel_tol * norm(running));
    const bool converged = running_error <= target;
    if (converged || static_cast<int>(panels.size()) >= policy.max_subintervals) {
      std::vector<const detail::Panel<Value>*> ordered;
      for (const auto& p : panels) ordered.push_back(&p);
      std::sort(ordered.begin(), ordered.end(), [](auto* x, auto* y) { return x->a < y->a; });
      Value acc = ordered.front()->kronrod;
      double err = ordered.front()->error;
      for (std::size_t i = 1; i < ordered.size(); ++i) {
        acc += ordered[i]->kronrod;
        err += ordered[i]->error;
      }
      return QuadratureResult<Value>{std::move(acc), err, evaluations, static_cast<int>(panels.size()),
                                     converged};
    }
    std::size_t worst = 0;
    for (std::size_t i = 1; i < panels.size(); ++i)
      if (panels[i].error > panels[worst].error) worst = i;
    const double lo = panels[worst].a;
    const double hi = panels[worst].b;
    const double mid = 0.5 * (lo + hi);
    running += -1.0 * panels[worst].kronrod;
    running_error -= panels[worst].error;
    panels[worst] = detail::gauss_kronrod_15<Value>(f, lo, mid, norm);
    panels.push_back(detail::gauss_kronrod_15<Value>(f, mid, hi, norm));
    running += panels[worst].kronrod;
    running += panels.back().kronrod;
    running_error += panels[worst].error + panels.back().error;
    running_error = std::max(running_error, 0.0);
    evaluations += 30;
  }
}

}  // namespace xidx
