#pragma once

// Special functions and quadrature rules shared by the modules.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "common.hpp"

namespace fockconc::special {

/// Regularized lower incomplete gamma P(a, x) for integer a >= 1.
inline double gamma_p_series(unsigned a, double x) {
  if (x <= 0.0) return 0.0;
  const double lead = std::exp(a * std::log(x) - log_factorial(a) - x);
  double term = 1.0, sum = 1.0;
  for (unsigned m = 1; m < 100000; ++m) {
    term *= x / (a + m);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return lead * sum;
}

/// Regularized upper incomplete gamma Q(a, x) = e^{-x} sum_{j<a} x^j/j! for integer a >= 1.
inline double gamma_q_finite(unsigned a, double x) {
  if (x <= 0.0) return 1.0;
  // Downward recurrence from the largest term keeps this free of overflow.
  double t = std::exp((a - 1) * std::log(x) - log_factorial(a - 1) - x);
  double sum = 0.0;
  for (unsigned j = a; j-- > 0;) {
    sum += t;
    t *= j / x;
  }
  return sum;
}

inline double gamma_p(unsigned a, double x) {
  if (a == 0) throw invalid_input("gamma_p: a must be >= 1");
  if (x <= 0.0) return 0.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_finite(a, x);
}

inline double gamma_q(unsigned a, double x) {
  if (a == 0) throw invalid_input("gamma_q: a must be >= 1");
  if (x <= 0.0) return 1.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_finite(a, x);
}

struct quadrature_rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
inline quadrature_rule gauss_legendre(unsigned n) {
  quadrature_rule r{std::vector<double>(n), std::vector<double>(n)};
  for (unsigned i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (unsigned k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

/// Composite Gauss-Legendre integral of f over [a, b].
inline double integrate_gl(const std::function<double(double)>& f, double a, double b, unsigned panels = 64,
                           unsigned order = 20) {
  static thread_local quadrature_rule cache;
  if (cache.nodes.size() != order) cache = gauss_legendre(order);
  compensated_sum<double> acc;
  const double h = (b - a) / panels;
  for (unsigned p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (unsigned i = 0; i < order; ++i) acc.add(0.5 * h * cache.weights[i] * f(lo + 0.5 * h * (cache.nodes[i] + 1.0)));
  }
  return acc.value();
}

namespace detail {
inline double adaptive_step(const std::function<double(double)>& f, double a, double b, double whole, double tol,
                            int depth) {
  const double m = 0.5 * (a + b);
  const double left = integrate_gl(f, a, m, 1, 10);
  const double right = integrate_gl(f, m, b, 1, 10);
  if (depth <= 0 || std::abs(left + right - whole) <= tol) return left + right;
  return adaptive_step(f, a, m, left, 0.5 * tol, depth - 1) + adaptive_step(f, m, b, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive bisection on 10-point Gauss-Legendre panels.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  return detail::adaptive_step(f, a, b, integrate_gl(f, a, b, 1, 10), tol, 40);
}

/// Gauss-Hermite rule for weight e^{-x^2}. `weights` are the classical weights;
/// `scaled` holds w_i e^{x_i^2}, which stays representable for large n.
struct hermite_rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> scaled;
};

/// Orthonormal Hermite functions psi_0..psi_{n-1} at x (L2(dx) normalization).
inline void hermite_functions(double x, unsigned n, std::vector<double>& out) {
  out.assign(n, 0.0);
  if (n == 0) return;
  out[0] = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
  if (n > 1) out[1] = std::sqrt(2.0) * x * out[0];
  for (unsigned k = 1; k + 1 < n; ++k)
    out[k + 1] = std::sqrt(2.0 / (k + 1)) * x * out[k] - std::sqrt(static_cast<double>(k) / (k + 1)) * out[k - 1];
}

inline hermite_rule gauss_hermite(unsigned n) {
  if (n == 0) throw invalid_input("gauss_hermite: n must be positive");
  hermite_rule r{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  const unsigned m = (n + 1) / 2;
  double z = 0.0;
  std::vector<double> psi;
  for (unsigned i = 0; i < m; ++i) {
    // Standard asymptotic initial guesses, largest root first.
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * r.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * r.nodes[1];
    else
      z = 2.0 * z - r.nodes[i - 2];
    for (int it = 0; it < 200; ++it) {
      // Normalized polynomial recurrence p_k = psi_k e^{x^2/2}.
      double p1 = std::pow(pi, -0.25), p2 = 0.0;
      for (unsigned k = 0; k < n; ++k) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (k + 1)) * p2 - std::sqrt(static_cast<double>(k) / (k + 1)) * p3;
      }
      const double pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    r.nodes[i] = z;
    r.nodes[n - 1 - i] = -z;
  }
  for (unsigned i = 0; i < n; ++i) {
    hermite_functions(r.nodes[i], n, psi);
    compensated_sum<double> s;
    for (double v : psi) s.add(v * v);
    r.scaled[i] = 1.0 / s.value();
    r.weights[i] = r.scaled[i] * std::exp(-r.nodes[i] * r.nodes[i]);
  }
  // Ascending order.
  std::reverse(r.nodes.begin(), r.nodes.end());
  std::reverse(r.weights.begin(), r.weights.end());
  std::reverse(r.scaled.begin(), r.scaled.end());
  return r;
}

}  // namespace fockconc::special
