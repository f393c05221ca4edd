#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "ddw/errors.hpp"

namespace ddw::quad {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendreRule make_gauss_legendre(std::size_t n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

template <std::size_t N>
const GaussLegendreRule& gauss_legendre() {
  static const GaussLegendreRule rule = make_gauss_legendre(N);
  return rule;
}

/// Fixed-order Gauss-Legendre on [a, b].
template <std::size_t N, class F>
double gl_fixed(F&& f, double a, double b) {
  const auto& rule = gauss_legendre<N>();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                               0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                               0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                               0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                               0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                               0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                               0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
QuadResult gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  return {resk * h, std::abs((resk - resg) * h), true};
}

template <class F>
QuadResult adaptive(F& f, double a, double b, const QuadResult& whole, double abs_tol, int depth) {
  if (whole.error <= abs_tol || depth <= 0 || !(b - a > 1e-15 * std::abs(a))) {
    QuadResult r = whole;
    r.converged = whole.error <= abs_tol;
    return r;
  }
  const double mid = 0.5 * (a + b);
  const QuadResult left = gk15(f, a, mid);
  const QuadResult right = gk15(f, mid, b);
  const QuadResult l = adaptive(f, a, mid, left, 0.5 * abs_tol, depth - 1);
  const QuadResult r = adaptive(f, mid, b, right, 0.5 * abs_tol, depth - 1);
  return {l.value + r.value, l.error + r.error, l.converged && r.converged};
}

}  // namespace detail

/// Recursive Gauss-Kronrod 7/15 on [a, b] to max(rel_tol |I|, abs_tol).
template <class F>
QuadResult adaptive_gk(F&& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 0.0, int max_depth = 40) {
  auto& fn = f;
  const QuadResult whole = detail::gk15(fn, a, b);
  // The first estimate sets the absolute target; one refinement pass tightens it.
  const double target0 = std::max(rel_tol * std::abs(whole.value), abs_tol);
  QuadResult r = detail::adaptive(fn, a, b, whole, target0, max_depth);
  const double target = std::max(rel_tol * std::abs(r.value), abs_tol);
  if (r.error > target) r = detail::adaptive(fn, a, b, whole, target, max_depth);
  r.converged = r.error <= std::max(target, 1e-300);
  return r;
}

/// Integral of f over [a, inf) for integrands that decay at least exponentially in
/// log-scale: substitutes x = a e^u and sums adaptive panels [k, k+1] in u until the
/// panel contributions stay below rel_tol for several consecutive panels.
template <class F>
QuadResult integrate_log_tail(F&& f, double a, double rel_tol = 1e-12, int max_panels = 4000) {
  if (!(a > 0.0)) throw DomainError("integrate_log_tail: lower limit must be positive");
  auto integrand = [&](double u) {
    const double x = a * std::exp(u);
    return x * f(x);
  };
  QuadResult total{0.0, 0.0, true};
  int quiet = 0;
  double width = 0.25;
  double u = 0.0;
  for (int k = 0; k < max_panels; ++k) {
    // Panels far in the tail only need to be resolved relative to the running total.
    const QuadResult piece = adaptive_gk(integrand, u, u + width, rel_tol * 0.1, 1e-3 * rel_tol * std::abs(total.value));
    total.value += piece.value;
    total.error += piece.error;
    total.converged = total.converged && piece.converged;
    u += width;
    width = std::min(width * 1.25, 2.0);
    if (std::abs(piece.value) <= 1e-3 * rel_tol * std::abs(total.value)) {
      if (++quiet >= 4) return total;
    } else {
      quiet = 0;
    }
    if (!std::isfinite(a * std::exp(u))) break;
  }
  total.converged = false;
  return total;
}

}  // namespace ddw::quad
