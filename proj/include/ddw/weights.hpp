#pragma once

// Exponent g of the radial weight f(x) = exp(g(|x|)) and the problem data (N, p, m, g).
//
// g is required to satisfy the doubling bound
//     alpha1 * g(s)/s <= g'(s) <= alpha2 * g(s)/s,   s > 0,
// which forces power-like growth. Two closed-form families are supported: pure powers
// g(s) = s^alpha and the Zygmund family g(s) = s^alpha * log(s + c)^beta.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ddw/errors.hpp"

namespace ddw {

struct PowerWeight {
  double alpha;
};

struct ZygmundWeight {
  double alpha;
  double beta;
  double c;
};

using WeightKind = std::variant<PowerWeight, ZygmundWeight>;

class WeightSpec {
 public:
  static WeightSpec power(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("power weight: alpha must be positive");
    return WeightSpec(PowerWeight{alpha}, alpha, alpha);
  }

  static WeightSpec zygmund(double alpha, double beta, double c) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("zygmund weight: alpha and beta must be positive");
    // c > 1 keeps log(s + c) > 0 on [0, inf).
    if (!(c > 1.0)) throw DomainError("zygmund weight: c must exceed 1");
    return WeightSpec(ZygmundWeight{alpha, beta, c}, alpha, alpha + beta);
  }

  /// Same closed form as `base` but with caller-chosen doubling exponents. Only
  /// 0 < alpha1 <= alpha2 is enforced, so this can build deliberately wrong specs
  /// for negative controls.
  static WeightSpec with_exponents(const WeightSpec& base, double alpha1, double alpha2) {
    if (!(alpha1 > 0.0) || !(alpha1 <= alpha2)) throw DomainError("weight: need 0 < alpha1 <= alpha2");
    return WeightSpec(base.kind_, alpha1, alpha2);
  }

  const WeightKind& kind() const noexcept { return kind_; }
  bool is_power() const noexcept { return std::holds_alternative<PowerWeight>(kind_); }
  double alpha1() const noexcept { return alpha1_; }
  double alpha2() const noexcept { return alpha2_; }

  /// True when alpha1/alpha2 are the exponents implied by the closed form.
  bool exponents_are_nominal() const noexcept {
    if (const auto* pw = std::get_if<PowerWeight>(&kind_)) return alpha1_ == pw->alpha && alpha2_ == pw->alpha;
    const auto& z = std::get<ZygmundWeight>(kind_);
    return alpha1_ == z.alpha && alpha2_ == z.alpha + z.beta;
  }

  double g(double s) const {
    if (!(s >= 0.0)) throw DomainError("g: s must be nonnegative");
    if (s == 0.0) return 0.0;
    if (const auto* pw = std::get_if<PowerWeight>(&kind_)) return std::pow(s, pw->alpha);
    const auto& z = std::get<ZygmundWeight>(kind_);
    return std::pow(s, z.alpha) * std::pow(std::log(s + z.c), z.beta);
  }

  double g_prime(double s) const {
    if (!(s > 0.0)) throw DomainError("g': s must be positive");
    if (const auto* pw = std::get_if<PowerWeight>(&kind_)) return pw->alpha * std::pow(s, pw->alpha - 1.0);
    const auto& z = std::get<ZygmundWeight>(kind_);
    const double L = std::log(s + z.c);
    return z.alpha * std::pow(s, z.alpha - 1.0) * std::pow(L, z.beta) +
           z.beta * std::pow(s, z.alpha) * std::pow(L, z.beta - 1.0) / (s + z.c);
  }

  /// s g'(s) / g(s), evaluated without forming g' and g separately.
  double log_slope(double s) const {
    if (!(s > 0.0)) throw DomainError("log_slope: s must be positive");
    if (const auto* pw = std::get_if<PowerWeight>(&kind_)) return pw->alpha;
    const auto& z = std::get<ZygmundWeight>(kind_);
    return z.alpha + z.beta * s / ((s + z.c) * std::log(s + z.c));
  }

  double g_inverse(double y) const {
    if (!(y >= 0.0)) throw DomainError("g^-1: y must be nonnegative");
    if (y == 0.0) return 0.0;
    if (const auto* pw = std::get_if<PowerWeight>(&kind_)) return std::pow(y, 1.0 / pw->alpha);
    double lo = 0.0;
    double hi = std::max(1.0, y);
    while (g(hi) < y) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi) || hi > 1e300) throw InvariantError("g^-1: root not bracketable");
    }
    for (int k = 0; k < 300; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (g(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  WeightSpec(WeightKind kind, double a1, double a2) : kind_(kind), alpha1_(a1), alpha2_(a2) {}

  WeightKind kind_;
  double alpha1_;
  double alpha2_;
};

inline double eval_g(const WeightSpec& spec, double s) { return spec.g(s); }
inline double eval_g_prime(const WeightSpec& spec, double s) { return spec.g_prime(s); }
inline double invert_g(const WeightSpec& spec, double y) { return spec.g_inverse(y); }

/// Spatial dimension, gradient exponent p, density exponent m and the weight.
struct ProblemSpec {
  int N = 3;
  double p = 2.0;
  double m = 2.0;
  WeightSpec weight = WeightSpec::power(1.0);

  /// p + m - 3, the exponent that sets the decay rate.
  double q() const noexcept { return p + m - 3.0; }
  /// (N - p)/(p - 1), the exponent of the radial transformation.
  double beta() const noexcept { return (static_cast<double>(N) - p) / (p - 1.0); }
  double alpha1() const noexcept { return weight.alpha1(); }
  double alpha2() const noexcept { return weight.alpha2(); }
};

/// Checks 1 < p < N, p + m - 3 > 0 and alpha2 < p; throws ConfigError naming the
/// first violated assumption.
inline void validate_problem(const ProblemSpec& pr) {
  if (pr.N < 2) throw ConfigError("problem: N must be an integer >= 2");
  if (!(pr.p > 1.0)) throw ConfigError("problem: need p > 1");
  if (!(pr.p < pr.N)) throw ConfigError("problem: need p < N");
  if (!(pr.q() > 0.0)) throw ConfigError("problem: need p + m - 3 > 0");
  if (!(pr.alpha2() < pr.p)) throw ConfigError("problem: need alpha2 < p");
}

inline ProblemSpec make_problem(int N, double p, double m, WeightSpec weight) {
  ProblemSpec pr{N, p, m, weight};
  validate_problem(pr);
  return pr;
}

/// n log-spaced points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw DomainError("log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

/// Relative violation of lo <= x <= hi, normalised by the largest magnitude involved
/// (and by `floor_scale`, when the bounds can legitimately all vanish).
inline double sandwich_violation(double lo, double x, double hi, double floor_scale = 0.0) {
  const double scale = std::max({std::abs(lo), std::abs(x), std::abs(hi), floor_scale,
                                 std::numeric_limits<double>::min()});
  return std::max({lo - x, x - hi, 0.0}) / scale;
}

struct ValidationReport {
  double tol = 1e-10;
  double max_derivative_violation = 0.0;
  double derivative_argmax = 0.0;
  double max_scaling_violation = 0.0;
  double scaling_argmax_r = 0.0;
  double scaling_argmax_lambda = 1.0;
  bool pass = true;
};

/// Checks the derivative bound and the scaling bounds
///     lambda^alpha1 g(r) <= g(lambda r) <= lambda^alpha2 g(r),  lambda >= 1
/// over every ordered pair of grid points.
inline ValidationReport validate_doubling(const WeightSpec& spec, std::span<const double> grid, double tol = 1e-10) {
  if (grid.empty() || grid.front() > 1e-3 || grid.back() < 1e3)
    throw DomainError("validate_doubling: grid must span at least 6 decades around 1");
  ValidationReport rep;
  rep.tol = tol;
  const double a1 = spec.alpha1();
  const double a2 = spec.alpha2();
  std::vector<double> gv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    gv[i] = spec.g(s);
    const double v = sandwich_violation(a1 * gv[i] / s, spec.g_prime(s), a2 * gv[i] / s);
    if (v > rep.max_derivative_violation) {
      rep.max_derivative_violation = v;
      rep.derivative_argmax = s;
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      const double lambda = grid[j] / grid[i];
      const double v = sandwich_violation(std::pow(lambda, a1) * gv[i], gv[j], std::pow(lambda, a2) * gv[i]);
      if (v > rep.max_scaling_violation) {
        rep.max_scaling_violation = v;
        rep.scaling_argmax_r = grid[i];
        rep.scaling_argmax_lambda = lambda;
      }
    }
  }
  rep.pass = rep.max_derivative_violation <= tol && rep.max_scaling_violation <= tol;
  return rep;
}

}  // namespace ddw
