#pragma once

// Radial change of variables r = rhat(s) taking the weighted equation to an
// inhomogeneous-density equation. rhat solves
//
//   rhat'(s) = F(rhat) s^{-(N-1)/(p-1)},   F(r) = (e^{g(r)} r^{N-1})^{1/(p-1)},
//
// with rhat(s) -> 0 as s -> 0 and rhat finite for every s. In the variable
// w = s^{-beta}/beta (beta = (N-p)/(p-1)) the equation is autonomous, dr/dw = -F(r),
// and r blows up as w -> 0; r* = rhat(1) is fixed by requiring the blow-up to happen
// at w = 0, i.e. int_{r*}^inf dr/F = 1/beta.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ddw/envelope.hpp"
#include "ddw/errors.hpp"
#include "ddw/parallel.hpp"
#include "ddw/quadrature.hpp"
#include "ddw/weights.hpp"

namespace ddw {

/// F(r) = (e^{g(r)} r^{N-1})^{1/(p-1)}.
inline double transform_speed(const ProblemSpec& pr, double r) {
  return std::exp((pr.weight.g(r) + (pr.N - 1.0) * std::log(r)) / (pr.p - 1.0));
}

/// z1(r*) = int_{r*}^inf dr / F(r).
inline double blowup_time(const ProblemSpec& pr, double r_star, double rel_tol = 1e-12) {
  if (!(r_star > 0.0)) throw DomainError("blowup_time: r* must be positive");
  const auto res = quad::integrate_log_tail([&](double r) { return 1.0 / transform_speed(pr, r); }, r_star, rel_tol);
  if (!res.converged || !std::isfinite(res.value)) throw NumericError("blowup_time: quadrature did not converge");
  return res.value;
}

/// r* with z1(r*) = 1/beta, by bisection on log r*.
inline double shoot_r_star(const ProblemSpec& pr) {
  validate_problem(pr);
  const double target = 1.0 / pr.beta();
  double lo = 1.0;
  double hi = 1.0;
  for (int k = 0; blowup_time(pr, lo) < target; ++k) {
    lo *= 0.5;
    if (k > 2000) throw NumericError("shoot_r_star: lower bracket failed");
  }
  for (int k = 0; blowup_time(pr, hi) > target; ++k) {
    hi *= 2.0;
    if (k > 2000) throw NumericError("shoot_r_star: upper bracket failed");
  }
  double a = std::log(lo);
  double b = std::log(hi);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    (blowup_time(pr, std::exp(mid)) > target ? a : b) = mid;
  }
  return std::exp(0.5 * (a + b));
}

struct TransformOptions {
  double s_min = 1e-4;
  double s_max = 1e8;
  int per_decade = 50;
  double fd_step = 1e-3;  // log-s step of the plug-back stencil
  double zero_probe = 1e-8;  // s at which rho(0+) is estimated
};

struct TransformSample {
  double s = 0.0;
  double r_hat = 0.0;
  double r_hat_s = 0.0;
  double rho = 0.0;
};

struct TransformResult {
  ProblemSpec problem;
  double r_star = 0.0;
  double beta = 0.0;
  double anchor = 0.0;        // rhat(1)
  double rho_at_zero = 0.0;   // rho at s = zero_probe (rho - 1 = O(s log s) near 0)
  std::vector<TransformSample> samples;
  double plugback_max = 0.0;  // max |finite-difference rhat_s - ODE rhs| / rhat_s
  double round_trip_max = 0.0;
  double der_ratio_violation = 0.0;
  long long ode_steps = 0;
};

namespace detail {

// Integrates dr/dw = -F(r) from (w0, r) to w1 with classical RK4, steps limited by
// |F| h <= min(1e-6 (1 + r), 1e-4 r).
inline double advance_w(const ProblemSpec& pr, double r, double w0, double w1, long long* steps = nullptr) {
  double w = w0;
  const double dir = w1 > w0 ? 1.0 : -1.0;
  auto rhs = [&](double x) { return -dir * transform_speed(pr, x); };
  while (w != w1) {
    const double F = transform_speed(pr, r);
    const double remaining = std::abs(w1 - w);
    const double hmax = std::min(1e-6 * (1.0 + r), 1e-4 * r) / F;
    const bool last = hmax >= remaining;
    const double h = last ? remaining : hmax;
    if (!last && h < 1e-14 * std::max(1.0, std::abs(w)))
      throw NumericError("transform: ODE step underflow near blow-up");
    const double k1 = rhs(r);
    const double k2 = rhs(r + 0.5 * h * k1);
    const double k3 = rhs(r + 0.5 * h * k2);
    const double k4 = rhs(r + h * k3);
    r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(r > 0.0) || !std::isfinite(r)) throw NumericError("transform: ODE left the positive half-line");
    w = last ? w1 : w + dir * h;
    if (steps) ++*steps;
  }
  return r;
}

inline double w_of_s(double s, double beta) { return std::pow(s, -beta) / beta; }

}  // namespace detail

inline TransformResult build_transform(const ProblemSpec& pr, const TransformOptions& opt = {}) {
  validate_problem(pr);
  if (!(opt.s_min > 0.0) || !(opt.s_min < 1.0) || !(opt.s_max > 1.0) || opt.per_decade < 1)
    throw ConfigError("build_transform: need s_min < 1 < s_max and per_decade >= 1");
  TransformResult res;
  res.problem = pr;
  res.beta = pr.beta();
  res.r_star = shoot_r_star(pr);
  const double beta = res.beta;

  // Log grid with s = 1 as an exact node.
  std::vector<double> below, above;
  const double step = std::log(10.0) / opt.per_decade;
  for (int k = 1;; ++k) {
    const double s = std::exp(-k * step);
    if (s < opt.s_min * (1.0 - 1e-12)) break;
    below.push_back(s);
  }
  for (int k = 1;; ++k) {
    const double s = std::exp(k * step);
    if (s > opt.s_max * (1.0 + 1e-12)) break;
    above.push_back(s);
  }
  // Snap the outermost nodes onto the requested range ends.
  if (!below.empty() && std::abs(below.back() / opt.s_min - 1.0) < 1e-9) below.back() = opt.s_min;
  if (!above.empty() && std::abs(above.back() / opt.s_max - 1.0) < 1e-9) above.back() = opt.s_max;

  std::vector<TransformSample> lower;
  double r = res.r_star;
  double w = detail::w_of_s(1.0, beta);
  for (double s : below) {
    const double w1 = detail::w_of_s(s, beta);
    r = detail::advance_w(pr, r, w, w1, &res.ode_steps);
    w = w1;
    lower.push_back({s, r, 0.0, 0.0});
  }
  std::reverse(lower.begin(), lower.end());
  res.samples = lower;
  res.samples.push_back({1.0, res.r_star, 0.0, 0.0});
  r = res.r_star;
  w = detail::w_of_s(1.0, beta);
  for (double s : above) {
    const double w1 = detail::w_of_s(s, beta);
    r = detail::advance_w(pr, r, w, w1, &res.ode_steps);
    w = w1;
    res.samples.push_back({s, r, 0.0, 0.0});
  }
  for (auto& smp : res.samples) {
    smp.r_hat_s = transform_speed(pr, smp.r_hat) * std::pow(smp.s, -beta - 1.0);
    smp.rho = std::pow(smp.r_hat_s, pr.p);
  }
  res.anchor = res.r_star;
  {
    const TransformSample& first = res.samples.front();
    const double probe = std::min(opt.zero_probe, first.s);
    const double rp = detail::advance_w(pr, first.r_hat, detail::w_of_s(first.s, beta), detail::w_of_s(probe, beta));
    res.rho_at_zero = std::pow(transform_speed(pr, rp) * std::pow(probe, -beta - 1.0), pr.p);
  }

  // Plug-back: a five-point derivative of locally re-integrated rhat in log s.
  const double h = opt.fd_step;
  std::vector<double> plug(res.samples.size(), 0.0);
  parallel_for(res.samples.size(), [&](std::size_t k) {
    const TransformSample& smp = res.samples[k];
    const double w0 = detail::w_of_s(smp.s, beta);
    auto at = [&](double j) { return detail::advance_w(pr, smp.r_hat, w0, detail::w_of_s(smp.s * std::exp(j * h), beta)); };
    const double d_log = (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h);
    const double fd = d_log / smp.s;
    plug[k] = std::abs(fd - smp.r_hat_s) / smp.r_hat_s;
  });
  res.plugback_max = *std::max_element(plug.begin(), plug.end());

  // Round trip: phi(r) = int_r^inf dx/F equals s(r)^{-beta}/beta, with s(r) the
  // log-log interpolated inverse of the sampled rhat, at midpoints between samples.
  std::vector<double> trip(res.samples.size() - 1, 0.0);
  parallel_for(trip.size(), [&](std::size_t k) {
    const auto& a = res.samples[k];
    const auto& b = res.samples[k + 1];
    const double lr = 0.5 * (std::log(a.r_hat) + std::log(b.r_hat));
    const double rr = std::exp(lr);
    const double frac = (lr - std::log(a.r_hat)) / (std::log(b.r_hat) - std::log(a.r_hat));
    const double s_hat = std::exp(std::log(a.s) + frac * (std::log(b.s) - std::log(a.s)));
    const double phi = blowup_time(pr, rr);
    trip[k] = std::abs(phi - detail::w_of_s(s_hat, beta)) / phi;
  });
  res.round_trip_max = trip.empty() ? 0.0 : *std::max_element(trip.begin(), trip.end());

  // Derivative-ratio sandwich for phi_tilde(r) = r / (g(r) F(r)) against phi.
  const double a1 = pr.alpha1();
  const double a2 = pr.alpha2();
  const double p = pr.p;
  for (const auto& smp : res.samples) {
    const double rr = smp.r_hat;
    const double g = pr.weight.g(rr);
    const double ls = pr.weight.log_slope(rr);
    const double ratio = (ls - 1.0) / g + (ls + (pr.N - 1.0) / g) / (p - 1.0);
    const double lo = a1 / (p - 1.0);
    const double hi = a2 / (p - 1.0) + (a2 - 1.0 + (pr.N - 1.0) / (p - 1.0)) / g;
    res.der_ratio_violation = std::max(res.der_ratio_violation, sandwich_violation(lo, ratio, hi));
  }
  return res;
}

/// phi_tilde(r) = [g(r)/r * F(r)]^{-1}.
inline double phi_tilde(const ProblemSpec& pr, double r) { return r / (pr.weight.g(r) * transform_speed(pr, r)); }

struct AsymptoticRatio {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double band = 0.0;
  bool pass = false;
};

struct AsymptoticsReport {
  double s_lo = 1e3;
  double s_hi = 1e8;
  double bound_factor = 10.0;
  std::vector<AsymptoticRatio> ratios;
  bool pass = false;
};

/// Min/max over s in [s_lo, s_hi] of rhat/g^{-1}(log s), rho s^p (log s)^p / g^{-1}(log s)^p
/// and phi_tilde(rhat) s^beta; each passes when max/min <= bound_factor.
inline AsymptoticsReport asymptotics_report(const TransformResult& res, const EnvelopeCalculus& calc,
                                            double bound_factor = 10.0, double s_lo = 1e3, double s_hi = 1e8) {
  if (res.samples.empty() || res.samples.back().s < 1e6 * (1.0 - 1e-9))
    throw DomainError("asymptotics_report: samples must reach s >= 1e6");
  const ProblemSpec& pr = res.problem;
  AsymptoticsReport rep;
  rep.s_lo = s_lo;
  rep.s_hi = std::min(s_hi, res.samples.back().s);
  rep.bound_factor = bound_factor;
  AsymptoticRatio r1{"r_hat_over_ginv_log_s"}, r2{"rho_density_ratio"}, r3{"phi_tilde_s_beta"};
  bool any = false;
  for (const auto& smp : res.samples) {
    if (smp.s < s_lo * (1.0 - 1e-12) || smp.s > rep.s_hi * (1.0 + 1e-12)) continue;
    const double L = std::log(smp.s);
    const double gi = calc.weight().g_inverse(L);
    const double v1 = smp.r_hat / gi;
    const double v2 = smp.rho * std::pow(smp.s, pr.p) * std::pow(L, pr.p) / std::pow(gi, pr.p);
    const double v3 = phi_tilde(pr, smp.r_hat) * std::pow(smp.s, res.beta);
    if (!any) {
      r1.min = r1.max = v1;
      r2.min = r2.max = v2;
      r3.min = r3.max = v3;
      any = true;
    }
    r1.min = std::min(r1.min, v1), r1.max = std::max(r1.max, v1);
    r2.min = std::min(r2.min, v2), r2.max = std::max(r2.max, v2);
    r3.min = std::min(r3.min, v3), r3.max = std::max(r3.max, v3);
  }
  if (!any) throw DomainError("asymptotics_report: no samples in the window");
  rep.pass = true;
  for (auto* r : {&r1, &r2, &r3}) {
    r->band = r->min > 0.0 ? r->max / r->min : std::numeric_limits<double>::infinity();
    r->pass = r->band <= bound_factor;
    rep.pass = rep.pass && r->pass;
    rep.ratios.push_back(*r);
  }
  return rep;
}

}  // namespace ddw
