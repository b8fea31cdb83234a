#pragma once

// Nonlinear conjugate gradient (Polak-Ribiere+) with a curvature-based trial
// step and Armijo backtracking. Shared by the 1D connection solver and the 2D
// relaxation.

#include <algorithm>
#include <array>
#include <concepts>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace tj {

enum class SolverStatus { Converged, NonConverged, NanDetected };

std::string_view to_string(SolverStatus s);

struct NcgOptions {
  double tol = 1e-8;        // on Objective::residual of the projected gradient
  long max_iter = 100000;
  int restart_period = 50;  // 0 disables periodic restarts
  double armijo_c = 1e-4;
  int max_backtracks = 40;
};

struct NcgResult {
  SolverStatus status = SolverStatus::NonConverged;
  long iterations = 0;
  double residual = 0.0;
  long double energy = 0.0L;
};

/// Called after every accepted step with (iteration, energy, residual).
using NcgObserver = std::function<void(long, double, double)>;

/// Requirements on Objective:
///   std::size_t size() const;
///   long double evaluate(std::span<const double> x, std::span<double> grad) const;
///   double curvature(std::span<const double> x, std::span<const double> d) const;  // d^T Hess d
///   void project(std::span<double> v) const;       // removes constrained directions
///   double residual(std::span<const double> grad) const;
///   double step_hint() const;                      // ~ 1 / (largest Hessian eigenvalue)
/// Optionally, when E(x + a d) - E(x) is a polynomial in a:
///   LinePolynomial line_polynomial(std::span<const double> x, std::span<const double> d) const;
/// The line search then works on the difference coefficients, which stay
/// accurate long after E(x + a d) and E(x) agree to all printed digits.

/// Coefficients c[1..6] of E(x + a d) - E(x) = sum_k c[k] a^k (c[0] = 0).
using LinePolynomial = std::array<double, 7>;

inline double eval_poly(const LinePolynomial& c, double a) {
  double v = 0.0;
  for (int k = 6; k >= 1; --k) v = (v + c[static_cast<std::size_t>(k)]) * a;
  return v;
}

template <class Objective>
concept HasLinePolynomial = requires(const Objective& o, std::span<const double> x) {
  { o.line_polynomial(x, x) } -> std::convertible_to<LinePolynomial>;
};

namespace detail {

// Step along d from a polynomial model: the quadratic-model step, refined by
// safeguarded Newton on the exact polynomial, then Armijo backtracking on it.
inline std::pair<double, double> polynomial_step(const LinePolynomial& c, double fallback, double armijo_c,
                                                 int max_backtracks) {
  const double slope = c[1];
  double a = c[2] > 0.0 ? -slope / (2.0 * c[2]) : fallback;
  if (!std::isfinite(a) || a <= 0.0) a = fallback;
  double fa = eval_poly(c, a);
  for (int it = 0; it < 8; ++it) {
    double d1 = 0.0, d2 = 0.0;
    for (int k = 6; k >= 1; --k) d1 = d1 * a + k * c[static_cast<std::size_t>(k)];
    for (int k = 6; k >= 2; --k) d2 = d2 * a + k * (k - 1) * c[static_cast<std::size_t>(k)];
    if (!(d2 > 0.0)) break;
    const double next = a - d1 / d2;
    if (!(next > 0.0) || !std::isfinite(next)) break;
    const double fn = eval_poly(c, next);
    if (!(fn <= fa)) break;
    const bool done = std::abs(next - a) <= 1e-10 * a;
    a = next;
    fa = fn;
    if (done) break;
  }
  for (int bt = 0; bt <= max_backtracks; ++bt) {
    if (std::isfinite(fa) && fa <= armijo_c * a * slope) return {a, fa};
    a *= 0.5;
    fa = eval_poly(c, a);
  }
  return {0.0, 0.0};
}

}  // namespace detail

template <class Objective>
NcgResult minimize_ncg(const Objective& obj, std::vector<double>& x, const NcgOptions& opt,
                       const NcgObserver& observer = {}) {
  const std::size_t n = obj.size();
  std::vector<double> g(n), g_new(n), d(n), trial(n);
  auto dotp = [n](const std::vector<double>& a, const std::vector<double>& b) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
      s0 += a[k] * b[k];
      s1 += a[k + 1] * b[k + 1];
      s2 += a[k + 2] * b[k + 2];
      s3 += a[k + 3] * b[k + 3];
    }
    for (; k < n; ++k) s0 += a[k] * b[k];
    return (s0 + s1) + (s2 + s3);
  };

  NcgResult res;
  long double f = obj.evaluate(x, g);
  obj.project(g);
  res.energy = f;
  res.residual = obj.residual(g);
  if (!std::isfinite(static_cast<double>(f)) || !std::isfinite(res.residual)) {
    res.status = SolverStatus::NanDetected;
    return res;
  }
  if (res.residual <= opt.tol) {
    res.status = SolverStatus::Converged;
    return res;
  }

  for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
  double gg = dotp(g, g);
  double last_alpha = obj.step_hint();
  long since_restart = 0;

  for (long it = 1; it <= opt.max_iter; ++it) {
    double gd = dotp(g, d);
    if (!(gd < 0.0)) {
      for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
      gd = -gg;
      since_restart = 0;
    }
    bool accepted = false;
    long double f_new = 0.0L;
    double alpha = 0.0;
    if constexpr (HasLinePolynomial<Objective>) {
      LinePolynomial c = obj.line_polynomial(x, d);
      c[1] = gd;
      const auto [a, df] = detail::polynomial_step(c, 2.0 * last_alpha, opt.armijo_c, opt.max_backtracks);
      if (a > 0.0) {
        alpha = a;
        for (std::size_t k = 0; k < n; ++k) trial[k] = x[k] + alpha * d[k];
        obj.evaluate(trial, g_new);
        f_new = f + static_cast<long double>(df);
        accepted = std::isfinite(static_cast<double>(f_new));
      }
    } else {
      const double curv = obj.curvature(x, d);
      alpha = curv > 0.0 ? -gd / curv : 2.0 * last_alpha;
      if (!std::isfinite(alpha) || alpha <= 0.0) alpha = obj.step_hint();
      for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
        for (std::size_t k = 0; k < n; ++k) trial[k] = x[k] + alpha * d[k];
        f_new = obj.evaluate(trial, g_new);
        if (std::isfinite(static_cast<double>(f_new)) &&
            f_new <= f + static_cast<long double>(opt.armijo_c * alpha * gd)) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
    }
    if (!accepted) {
      if (since_restart == 0) {
        // Steepest descent already failed: floating-point floor reached.
        res.status = SolverStatus::NonConverged;
        res.iterations = it - 1;
        return res;
      }
      for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
      since_restart = 0;
      continue;
    }

    obj.project(g_new);
    const double r = obj.residual(g_new);
    if (!std::isfinite(r)) {
      // x still holds the last finite iterate.
      res.status = SolverStatus::NanDetected;
      res.iterations = it - 1;
      return res;
    }
    x.swap(trial);
    f = f_new;
    last_alpha = alpha;
    res.energy = f;
    res.residual = r;
    res.iterations = it;
    if (observer) observer(it, static_cast<double>(f), r);
    if (r <= opt.tol) {
      res.status = SolverStatus::Converged;
      return res;
    }

    const double gg_new = dotp(g_new, g_new);
    const double num = gg_new - dotp(g_new, g);
    ++since_restart;
    double beta = std::max(0.0, num / gg);
    if (opt.restart_period > 0 && since_restart >= opt.restart_period) {
      beta = 0.0;
      since_restart = 0;
    }
    for (std::size_t k = 0; k < n; ++k) d[k] = -g_new[k] + beta * d[k];
    obj.project(d);
    g.swap(g_new);
    gg = gg_new;
  }
  res.status = SolverStatus::NonConverged;
  return res;
}

}  // namespace tj
