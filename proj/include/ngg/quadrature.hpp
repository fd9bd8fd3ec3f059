#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "errors.hpp"

namespace ngg {

struct GaussLegendreRule {
  std::vector<double> nodes;    // ascending, on [-1, 1]
  std::vector<double> weights;
};

// n-point Gauss–Legendre rule by Newton iteration on P_n from the Chebyshev guess.
inline GaussLegendreRule make_gauss_legendre(int n) {
  if (n < 1) throw ArgumentError("Gauss-Legendre rule needs at least one node");
  GaussLegendreRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute the derivative at the converged root
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (x * p0 - p1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

// Rules are immutable once built and shared between callers.
inline std::shared_ptr<const GaussLegendreRule> gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const GaussLegendreRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const GaussLegendreRule>(make_gauss_legendre(n));
  return slot;
}

struct QuadratureOptions {
  double tol = 1e-10;     // absolute agreement between successive estimates
  int min_nodes = 16;
  int max_nodes = 4096;
  int panel_nodes = 24;   // per panel in the bisection fallback
  int max_depth = 60;
};

namespace detail {

// Fixed-rule estimate of the vector integral of f over [a, b].
template <class F>
void gl_panel(F& f, std::size_t m, double a, double b, const GaussLegendreRule& rule,
              std::vector<double>& out, std::vector<double>& scratch) {
  std::fill(out.begin(), out.end(), 0.0);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    f(mid + half * rule.nodes[i], std::span<double>(scratch));
    const double w = half * rule.weights[i];
    for (std::size_t k = 0; k < m; ++k) out[k] += w * scratch[k];
  }
}

inline double max_abs_diff(const std::vector<double>& x, const std::vector<double>& y) {
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) d = std::max(d, std::abs(x[k] - y[k]));
  return d;
}

template <class F>
bool bisect(F& f, std::size_t m, double a, double b, const std::vector<double>& whole, int depth,
            const QuadratureOptions& opt, const GaussLegendreRule& rule, std::vector<double>& acc,
            std::vector<double>& scratch) {
  const double mid = 0.5 * (a + b);
  std::vector<double> left(m), right(m), both(m);
  gl_panel(f, m, a, mid, rule, left, scratch);
  gl_panel(f, m, mid, b, rule, right, scratch);
  for (std::size_t k = 0; k < m; ++k) both[k] = left[k] + right[k];
  if (max_abs_diff(both, whole) <= 0.1 * opt.tol || (b - a) < 1e-13) {
    for (std::size_t k = 0; k < m; ++k) acc[k] += both[k];
    return true;
  }
  if (depth >= opt.max_depth) {
    for (std::size_t k = 0; k < m; ++k) acc[k] += both[k];
    return false;
  }
  const bool ok_left = bisect(f, m, a, mid, left, depth + 1, opt, rule, acc, scratch);
  const bool ok_right = bisect(f, m, mid, b, right, depth + 1, opt, rule, acc, scratch);
  return ok_left && ok_right;
}

}  // namespace detail

// Vector-valued integral of f over [a, b]. f(x, out) writes m values.
// Doubles the Gauss–Legendre node count until successive estimates agree to
// opt.tol, then falls back to adaptive bisection (handles undeclared jumps).
template <class F>
std::vector<double> integrate(F&& f, std::size_t m, double a, double b,
                              const QuadratureOptions& opt = {}) {
  std::vector<double> prev(m), cur(m), scratch(m);
  detail::gl_panel(f, m, a, b, *gauss_legendre(opt.min_nodes), prev, scratch);
  double change = 0.0;
  for (int nodes = 2 * opt.min_nodes; nodes <= opt.max_nodes; nodes *= 2) {
    detail::gl_panel(f, m, a, b, *gauss_legendre(nodes), cur, scratch);
    change = detail::max_abs_diff(prev, cur);
    if (change <= opt.tol) return cur;
    std::swap(prev, cur);
  }
  const auto rule = gauss_legendre(opt.panel_nodes);
  std::vector<double> whole(m), acc(m, 0.0);
  detail::gl_panel(f, m, a, b, *rule, whole, scratch);
  if (!detail::bisect(f, m, a, b, whole, 0, opt, *rule, acc, scratch))
    throw ToleranceError("quadrature did not converge", acc, change);
  return acc;
}

// Vector integral of f(t) against the Beta(alpha, beta) probability density on
// [-1, 1], w(t) ∝ (1-t)^(alpha-1) (1+t)^(beta-1). Uses t = cos θ, which folds
// the weight into sin^(2alpha-1)(θ/2) cos^(2beta-1)(θ/2) dθ. Breakpoints in
// (-1, 1) split the θ range (jumps or kinks of f).
template <class F>
std::vector<double> integrate_beta(F&& f, std::size_t m, double alpha, double beta,
                                   std::span<const double> breakpoints = {},
                                   const QuadratureOptions& opt = {}) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("Beta shape parameters must be positive");
  const double norm = std::exp(std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta));
  const double ea = 2.0 * alpha - 1.0, eb = 2.0 * beta - 1.0;
  std::vector<double> inner(m);
  auto g = [&](double theta, std::span<double> out) {
    f(std::cos(theta), std::span<double>(inner));
    const double w = norm * std::pow(std::sin(0.5 * theta), ea) * std::pow(std::cos(0.5 * theta), eb);
    for (std::size_t k = 0; k < m; ++k) out[k] = w * inner[k];
  };

  std::vector<double> cuts{0.0, std::numbers::pi};
  for (double t : breakpoints) {
    if (t > -1.0 && t < 1.0) cuts.push_back(std::acos(t));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> total(m, 0.0);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const auto part = integrate(g, m, cuts[s], cuts[s + 1], opt);
    for (std::size_t k = 0; k < m; ++k) total[k] += part[k];
  }
  return total;
}

}  // namespace ngg
