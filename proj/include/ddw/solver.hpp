#pragma once

// Explicit finite-volume solver for the radial weighted equation
//
//   r^{N-1} f(r) U_t = d/dr [ r^{N-1} f(r) U^{m-1} |U_r|^{p-2} U_r ],   f = e^g,
//
// on uniform cells of [0, r_max] with zero flux at both ends, plus the measurements
// (sup-norm decay, support growth, ordering against barriers) taken on its output.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ddw/barriers.hpp"
#include "ddw/envelope.hpp"
#include "ddw/errors.hpp"
#include "ddw/quadrature.hpp"
#include "ddw/weights.hpp"

namespace ddw {

struct RadialGrid {
  double r_max = 1.0;
  int n_cells = 100;

  double dr() const { return r_max / n_cells; }
  double center(int i) const { return (i + 0.5) * dr(); }
  double face(int i) const { return i * dr(); }
};

using RadialProfile = std::function<double(double)>;

struct SimulationOptions {
  int n_checkpoints = 200;        // geometric in t, plus t = 0
  double first_checkpoint = 1e-2;
  double fixed_dt = 0.0;          // > 0: use this step (must satisfy the stability bound)
  bool store_fields = true;
};

struct RadialSolution {
  ProblemSpec problem;
  RadialGrid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> fields;
  std::vector<double> supnorm_history;
  std::vector<double> support_history;
  std::vector<double> mass_history;
  double theta_supp = 0.0;
  double initial_support = 0.0;
  long long steps = 0;
};

namespace detail {

// x^e with the common exponents 0, 1, 2 short-circuited.
struct FastPow {
  double e = 1.0;
  int mode = 3;
  explicit FastPow(double exponent) : e(exponent) {
    mode = exponent == 0.0 ? 0 : exponent == 1.0 ? 1 : exponent == 2.0 ? 2 : 3;
  }
  double operator()(double x) const {
    switch (mode) {
      case 0: return 1.0;
      case 1: return x;
      case 2: return x * x;
      default: return std::pow(x, e);
    }
  }
};

struct Geometry {
  std::vector<double> cp;  // w(face i+1/2) / V_i
  std::vector<double> cm;  // w(face i-1/2) / V_i
  std::vector<double> volume_scaled;  // V_i e^{-vol_shift}
  double vol_shift = 0.0;
};

inline double log_face_weight(const ProblemSpec& pr, double r) {
  return pr.weight.g(r) + (pr.N - 1.0) * std::log(r);
}

inline Geometry build_geometry(const ProblemSpec& pr, const RadialGrid& grid) {
  const int n = grid.n_cells;
  const double dr = grid.dr();
  Geometry geo;
  geo.cp.assign(n, 0.0);
  geo.cm.assign(n, 0.0);
  geo.volume_scaled.assign(n, 0.0);
  std::vector<double> logV(n);
  for (int i = 0; i < n; ++i) {
    const double a = grid.face(i);
    const double b = grid.face(i + 1);
    const double shift = log_face_weight(pr, b);
    const double integral = quad::gl_fixed<16>(
        [&](double r) { return r > 0.0 ? std::exp(log_face_weight(pr, r) - shift) : 0.0; }, a, b);
    logV[i] = std::log(integral) + shift;
  }
  geo.vol_shift = *std::max_element(logV.begin(), logV.end());
  for (int i = 0; i < n; ++i) {
    geo.volume_scaled[i] = std::exp(logV[i] - geo.vol_shift);
    if (i + 1 < n) geo.cp[i] = std::exp(log_face_weight(pr, grid.face(i + 1)) - logV[i]);
    if (i > 0) geo.cm[i] = std::exp(log_face_weight(pr, grid.face(i)) - logV[i]);
  }
  return geo;
}

}  // namespace detail

/// Weighted mass sum_i V_i U_i, with V_i the exact cell integral of r^{N-1} e^{g}.
inline double weighted_mass(const ProblemSpec& pr, const RadialGrid& grid, const std::vector<double>& U) {
  const auto geo = detail::build_geometry(pr, grid);
  double m = 0.0;
  for (std::size_t i = 0; i < U.size(); ++i) m += geo.volume_scaled[i] * U[i];
  return m * std::exp(geo.vol_shift);
}

inline RadialSolution simulate(const ProblemSpec& pr, const RadialProfile& u0, const RadialGrid& grid, double t_end,
                               double cfl, const SimulationOptions& opt = {}) {
  if (grid.n_cells < 2 || !(grid.r_max > 0.0)) throw ConfigError("simulate: grid needs r_max > 0 and >= 2 cells");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("simulate: t_end must be finite and >= 0");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("simulate: cfl must lie in (0, 1]");

  const int n = grid.n_cells;
  const double dr = grid.dr();
  const double p = pr.p;
  const double m = pr.m;
  const detail::Geometry geo = detail::build_geometry(pr, grid);
  const detail::FastPow pow_m1(m - 1.0);
  const detail::FastPow pow_m2(m - 2.0);
  const detail::FastPow pow_p2(p - 2.0);

  RadialSolution sol;
  sol.problem = pr;
  sol.grid = grid;

  std::vector<double> U(n);
  double sup0 = 0.0;
  for (int i = 0; i < n; ++i) {
    U[i] = u0(grid.center(i));
    if (!(U[i] >= 0.0) || !std::isfinite(U[i])) throw DomainError("simulate: u0 must be finite and nonnegative");
    sup0 = std::max(sup0, U[i]);
  }
  const bool full_support_start = U[n - 1] > 0.0;
  sol.theta_supp = 1e-12 * sup0;

  auto support_radius = [&](const std::vector<double>& V) {
    for (int i = n - 1; i >= 0; --i)
      if (V[i] > sol.theta_supp) return grid.face(i + 1);
    return 0.0;
  };
  auto mass = [&](const std::vector<double>& V) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += geo.volume_scaled[i] * V[i];
    return s * std::exp(geo.vol_shift);
  };
  auto record = [&](double t) {
    sol.times.push_back(t);
    sol.supnorm_history.push_back(*std::max_element(U.begin(), U.end()));
    sol.support_history.push_back(support_radius(U));
    sol.mass_history.push_back(mass(U));
    if (opt.store_fields) sol.fields.push_back(U);
  };
  sol.initial_support = support_radius(U);

  std::vector<double> checkpoints;
  if (t_end > 0.0) {
    const double first = std::min(opt.first_checkpoint, t_end);
    const int k = std::max(1, opt.n_checkpoints);
    if (first < t_end && k > 1) {
      for (int j = 0; j < k; ++j) checkpoints.push_back(first * std::pow(t_end / first, static_cast<double>(j) / (k - 1)));
      checkpoints.back() = t_end;
    } else {
      checkpoints.push_back(t_end);
    }
  }
  record(0.0);
  if (sup0 == 0.0) {
    for (double tc : checkpoints) record(tc);
    return sol;
  }

  int hi = 0;  // last cell with U > 0
  for (int i = 0; i < n; ++i)
    if (U[i] > 0.0) hi = i;

  std::vector<double> flux(n + 1, 0.0);
  std::vector<double> rate(n, 0.0);
  double t = 0.0;
  std::size_t next_cp = 0;
  const double slope_floor = p < 2.0 ? 1e-3 * sup0 / grid.r_max : 0.0;

  while (next_cp < checkpoints.size()) {
    const int top = std::min(hi + 1, n - 1);
    // Fluxes on interior faces 1..top and the diagonal rate that bounds the step.
    std::fill(rate.begin(), rate.begin() + top + 1, 0.0);
    for (int f = 1; f <= top; ++f) {
      const double ul = U[f - 1];
      const double ur = U[f];
      const double uf = std::max(0.5 * (ul + ur), 0.0);
      const double s = (ur - ul) / dr;
      const double as = std::abs(s);
      if (uf == 0.0) {
        flux[f] = 0.0;
        continue;
      }
      const double D = pow_m1(uf);
      const double sp2 = pow_p2(std::max(as, slope_floor));
      flux[f] = D * (p == 2.0 ? s : std::pow(as, p - 1.0) * (s < 0.0 ? -1.0 : 1.0));
      const double stiff = D * (p - 1.0) * sp2 / dr + 0.5 * std::abs(m - 1.0) * pow_m2(uf) * sp2 * as;
      rate[f - 1] += geo.cp[f - 1] * stiff;
      rate[f] += geo.cm[f] * stiff;
    }
    double rmax = 0.0;
    for (int i = 0; i <= top; ++i) rmax = std::max(rmax, rate[i]);
    double dt;
    if (opt.fixed_dt > 0.0) {
      dt = opt.fixed_dt;
      if (dt * rmax > 1.0 + 1e-12) throw NumericError("simulate: fixed_dt violates the stability bound");
    } else {
      dt = cfl / (rmax + 1e-30);
    }
    const double target = checkpoints[next_cp];
    bool hit = false;
    if (t + dt >= target) {
      dt = target - t;
      hit = true;
    }
    int new_hi = hi;
    for (int i = 0; i <= top; ++i) {
      const double right = i + 1 <= top ? flux[i + 1] : 0.0;
      const double left = i >= 1 ? flux[i] : 0.0;
      U[i] += dt * (geo.cp[i] * right - geo.cm[i] * left);
      if (U[i] < -1e-12)
        throw NumericError("simulate: negative value " + std::to_string(U[i]) + " at r = " +
                           std::to_string(grid.center(i)) + ", t = " + std::to_string(t));
      if (U[i] > 0.0) new_hi = std::max(new_hi, i);
    }
    hi = new_hi;
    if (!full_support_start && U[n - 1] > 0.0)
      throw GridTooSmall("simulate: support reached r_max = " + std::to_string(grid.r_max) + " at t = " +
                         std::to_string(t));
    t = hit ? target : t + dt;
    ++sol.steps;
    if (hit) {
      record(t);
      ++next_cp;
    }
  }
  return sol;
}

/// Grid whose r_max is 1.1 times the support radius, at t_end, of the supersolution
/// fitted above data bounded by sup_u0 on [0, support0].
inline RadialGrid auto_grid(const EnvelopeCalculus& calc, double sup_u0, double support0, double t_end, int n_cells,
                            double r_max_hint = 0.0) {
  const BarrierParams sup = fit_super_above(calc.problem(), calc, sup_u0, support0);
  const double predicted = barrier_support_radius(sup, calc, t_end);
  return {std::max({1.1 * predicted, 1.1 * support0, r_max_hint}), n_cells};
}

struct RatioWindow {
  std::vector<double> t;
  std::vector<double> ratio;
  double window_lo = 0.0;
  double window_min = 0.0;
  double window_max = 0.0;
  double band = std::numeric_limits<double>::infinity();
};

struct DecayReport {
  RatioWindow series;
  double fitted_exponent = 0.0;  // slope of log ||U|| vs log t over the last decade
};

struct SupportReport {
  RatioWindow series;
  double initial_radius = 0.0;
  bool monotone = true;
};

namespace detail {

inline void require_horizon(const RadialSolution& sol) {
  double first = 0.0;
  for (double t : sol.times)
    if (t > 0.0) {
      first = t;
      break;
    }
  const double last = sol.times.empty() ? 0.0 : sol.times.back();
  if (!(first > 0.0) || last < 1e3 * first || last < 100.0 * std::exp(1.0))
    throw DomainError("measurement: horizon too short (need 3 decades and t_end > 100 e)");
}

inline void finish_window(RatioWindow& w, double t_last) {
  w.window_lo = t_last / 100.0;
  bool any = false;
  for (std::size_t k = 0; k < w.t.size(); ++k) {
    if (w.t[k] < w.window_lo) continue;
    if (!any) {
      w.window_min = w.window_max = w.ratio[k];
      any = true;
    }
    w.window_min = std::min(w.window_min, w.ratio[k]);
    w.window_max = std::max(w.window_max, w.ratio[k]);
  }
  w.band = w.window_min > 0.0 ? w.window_max / w.window_min : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// ||U(t)|| / [g^{-1}(log t)^p / (t log t)]^{1/q} for t > e, with its band over the last two decades.
inline DecayReport measure_decay(const RadialSolution& sol, const EnvelopeCalculus& calc) {
  detail::require_horizon(sol);
  const ProblemSpec& pr = sol.problem;
  DecayReport rep;
  std::vector<double> lt, lu;
  const double t_last = sol.times.back();
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    const double t = sol.times[k];
    if (t <= std::exp(1.0)) continue;
    const double L = std::log(t);
    const double env = std::pow(std::pow(calc.weight().g_inverse(L), pr.p) / (t * L), 1.0 / pr.q());
    rep.series.t.push_back(t);
    rep.series.ratio.push_back(sol.supnorm_history[k] / env);
    if (t >= t_last / 10.0 && sol.supnorm_history[k] > 0.0) {
      lt.push_back(L);
      lu.push_back(std::log(sol.supnorm_history[k]));
    }
  }
  detail::finish_window(rep.series, t_last);
  if (lt.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lt.size(); ++i) {
      mx += lt[i];
      my += lu[i];
    }
    mx /= lt.size();
    my /= lt.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lt.size(); ++i) {
      sxy += (lt[i] - mx) * (lu[i] - my);
      sxx += (lt[i] - mx) * (lt[i] - mx);
    }
    rep.fitted_exponent = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return rep;
}

/// Support radius R(t) (largest face with U > theta_supp) against g^{-1}(log t).
inline SupportReport measure_support(const RadialSolution& sol, const EnvelopeCalculus& calc) {
  detail::require_horizon(sol);
  SupportReport rep;
  rep.initial_radius = sol.support_history.front();
  for (std::size_t k = 1; k < sol.support_history.size(); ++k)
    if (sol.support_history[k] < sol.support_history[k - 1]) rep.monotone = false;
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    const double t = sol.times[k];
    if (t <= std::exp(1.0)) continue;
    rep.series.t.push_back(t);
    rep.series.ratio.push_back(sol.support_history[k] / calc.weight().g_inverse(std::log(t)));
  }
  detail::finish_window(rep.series, sol.times.back());
  return rep;
}

struct ComparisonReport {
  BarrierKind kind = BarrierKind::Super;
  double tol_constant = 0.1;
  double worst_excess = -std::numeric_limits<double>::infinity();  // max of U - u (Super) or u - U (Sub)
  double worst_tol = 0.0;
  double worst_r = 0.0;
  double worst_t = 0.0;
  double worst_ratio = -std::numeric_limits<double>::infinity();  // max of excess / tol_cmp
  std::size_t n_checked = 0;
  bool pass = true;
};

/// Nodewise ordering against a barrier at every stored checkpoint, within
/// tol_cmp = C sqrt(dr) sup_r U(t_k).
inline ComparisonReport compare_to_barrier(const RadialSolution& sol, const BarrierParams& bp,
                                           const EnvelopeCalculus& calc, double tol_constant = 0.1) {
  if (sol.fields.size() != sol.times.size()) throw ConfigError("compare_to_barrier: solution has no stored fields");
  ComparisonReport rep;
  rep.kind = bp.kind;
  rep.tol_constant = tol_constant;
  const BarrierEvaluator ev(bp, calc);
  const double sign = bp.kind == BarrierKind::Super ? 1.0 : -1.0;
  const double root_dr = std::sqrt(sol.grid.dr());
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    const BarrierSlice s = ev.slice(sol.times[k]);
    const auto& U = sol.fields[k];
    const double tol = tol_constant * root_dr * sol.supnorm_history[k];
    for (int i = 0; i < sol.grid.n_cells; ++i) {
      const double r = sol.grid.center(i);
      // Beyond the barrier support the barrier is 0; for the Super case U must vanish there too.
      if (bp.kind == BarrierKind::Sub && r >= s.support_radius) continue;
      const double excess = sign * (U[i] - ev.value(s, r));
      ++rep.n_checked;
      const double ratio = tol > 0.0 ? excess / tol : (excess > 0.0 ? std::numeric_limits<double>::infinity() : -1.0);
      if (excess > rep.worst_excess) {
        rep.worst_excess = excess;
        rep.worst_tol = tol;
        rep.worst_r = r;
        rep.worst_t = sol.times[k];
      }
      rep.worst_ratio = std::max(rep.worst_ratio, ratio);
      if (excess > tol) rep.pass = false;
    }
  }
  return rep;
}

}  // namespace ddw
