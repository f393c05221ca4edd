#pragma once

// Pointwise certification of the barrier inequality for the radial equation
//
//   u_t - d/dr F - ((N-1)/r + g'(r)) F,    F = u^{m-1} |u_r|^{p-2} u_r,
//
// which must be >= 0 for a supersolution and <= 0 for a subsolution inside the
// positivity set. The flux and its radial derivative come from closed-form
// expressions in G, J, J', J'' (outer zone r > r0) and in I (inner zone r < r0).

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ddw/barriers.hpp"
#include "ddw/envelope.hpp"
#include "ddw/errors.hpp"
#include "ddw/parallel.hpp"

namespace ddw {

enum class Zone { Inner, Outer, Outside };

struct TimeDerivative {
  double value = 0.0;
  double dE_root_dt = 0.0;  // d/dt E(tau)^{1/(p-1)}
  double lower = 0.0;
  double upper = 0.0;
  bool sandwich_ok = true;
};

/// All terms of the residual at one (r, t), in raw and reduced (dimensionless) form.
struct PointTerms {
  Zone zone = Zone::Outside;
  double X = 0.0;
  double u_t = 0.0;
  double flux = 0.0;
  double dflux = 0.0;
  double lower_order = 0.0;
  double residual = 0.0;
  double scale = 0.0;
  double reduced = 0.0;
  double reduced_scale = 0.0;
  TimeDerivative td;
};

class ResidualEvaluator {
 public:
  ResidualEvaluator(const BarrierParams& params, const EnvelopeCalculus& calc) : ev_(params, calc) {}

  const BarrierEvaluator& barrier() const noexcept { return ev_; }

  BarrierSlice slice(double t) const { return ev_.slice(t); }

  /// Slice at a prescribed L = log(t + t0); t is reported as +inf when it overflows.
  BarrierSlice slice_at_log_shift(double L) const {
    const BarrierParams& bp = ev_.params();
    const ProblemSpec& pr = ev_.calc().problem();
    BarrierSlice s;
    s.log_shift = L;
    s.t = L - bp.log_t0 > 700.0 || bp.log_t0 > 700.0 ? std::numeric_limits<double>::infinity()
                                                     : std::exp(bp.log_t0) * std::expm1(L - bp.log_t0);
    s.tau = bp.Gamma * L;
    s.E_root = std::pow(ev_.calc().big_E(s.tau), 1.0 / (pr.p - 1.0));
    s.amplitude = bp.C_star * std::exp(-L / pr.q());
    s.support_radius = ev_.calc().big_G_inverse(s.tau);
    return s;
  }

  Zone zone(const BarrierSlice& s, double r) const {
    if (ev_.bracket(s, r) <= 0.0) return Zone::Outside;
    return r >= ev_.params().r0 ? Zone::Outer : Zone::Inner;
  }

  double flux(const BarrierSlice& s, double r) const {
    const double X = ev_.bracket(s, r);
    if (X <= 0.0) return 0.0;
    return r >= ev_.params().r0 ? flux_outer(s, r, X) : flux_inner(s, r, X);
  }

  double dflux(const BarrierSlice& s, double r) const {
    const double X = ev_.bracket(s, r);
    if (X <= 0.0) return 0.0;
    return r >= ev_.params().r0 ? dflux_outer(s, r, X) : dflux_inner(s, r, X);
  }

  TimeDerivative time_derivative(const BarrierSlice& s, double r) const {
    const ProblemSpec& pr = ev_.calc().problem();
    const BarrierParams& bp = ev_.params();
    const double p = pr.p;
    const double q = pr.q();
    TimeDerivative td;
    const double inv_shift = std::exp(-s.log_shift);
    const double y = s.support_radius;
    const double common = bp.Gamma * inv_shift / s.tau * s.E_root;
    td.dE_root_dt = common / (p - 1.0) * (p * s.tau / ev_.calc().weight().g(y) - 1.0);
    const double a1 = pr.alpha1();
    const double a2 = pr.alpha2();
    td.lower = (p - a2) / (a2 * (p - 1.0)) * common;
    td.upper = (p - a1) / (a1 * (p - 1.0)) * common;
    td.sandwich_ok = sandwich_violation(td.lower, td.dE_root_dt, td.upper) <= 1e-10;
    const double X = ev_.bracket(s, r);
    if (X <= 0.0) return td;
    const double inv_q1 = std::exp(-s.log_shift * (q + 1.0) / q);
    td.value = -bp.C_star / q * std::pow(X, (p - 1.0) / q) * inv_q1 +
               (p - 1.0) / q * bp.C_star * std::pow(X, (2.0 - pr.m) / q) * std::exp(-s.log_shift / q) * td.dE_root_dt;
    return td;
  }

  PointTerms terms(const BarrierSlice& s, double r) const {
    PointTerms pt;
    pt.X = ev_.bracket(s, r);
    pt.td = time_derivative(s, r);
    if (pt.X <= 0.0) return pt;
    const ProblemSpec& pr = ev_.calc().problem();
    const double coef = (pr.N - 1.0) / r + ev_.calc().weight().g_prime(r);
    const bool outer = r >= ev_.params().r0;
    pt.zone = outer ? Zone::Outer : Zone::Inner;
    pt.u_t = pt.td.value;
    pt.flux = outer ? flux_outer(s, r, pt.X) : flux_inner(s, r, pt.X);
    pt.dflux = outer ? dflux_outer(s, r, pt.X) : dflux_inner(s, r, pt.X);
    pt.lower_order = coef * pt.flux;
    pt.residual = pt.u_t - pt.dflux - pt.lower_order;
    pt.scale = std::max({std::abs(pt.u_t), std::abs(pt.dflux), std::abs(pt.lower_order)});
    reduced(s, r, pt);
    return pt;
  }

  // Zone formulas with the bracket X supplied by the caller.
  double flux_outer(const BarrierSlice& s, double r, double X) const {
    const ProblemSpec& pr = ev_.calc().problem();
    const double p = pr.p;
    const double q = pr.q();
    const double J = ev_.calc().big_J(r);
    const double Jp = ev_.calc().big_J_prime(r);
    return -std::pow(ev_.params().C_star, q + 1.0) / std::pow(q, p - 1.0) * std::pow(X, (p - 1.0) / q) *
           std::exp(-s.log_shift * (q + 1.0) / q) * std::pow(J, 2.0 - p) * std::pow(Jp, p - 1.0);
  }

  double I3(double r, double X) const {
    const ProblemSpec& pr = ev_.calc().problem();
    const double p = pr.p;
    const double q = pr.q();
    const double J = ev_.calc().big_J(r);
    const double Jp = ev_.calc().big_J_prime(r);
    const double Jpp = ev_.calc().big_J_second(r);
    return -1.0 / q * std::pow(J, -p * (p - 2.0) / (p - 1.0)) * std::pow(Jp, p) +
           X * ((2.0 - p) * std::pow(J, 1.0 - p) * std::pow(Jp, p) +
                (p - 1.0) * std::pow(J, 2.0 - p) * std::pow(Jp, p - 2.0) * Jpp);
  }

  double dflux_outer(const BarrierSlice& s, double r, double X) const {
    const ProblemSpec& pr = ev_.calc().problem();
    const double p = pr.p;
    const double q = pr.q();
    return -std::pow(ev_.params().C_star, q + 1.0) / std::pow(q, p - 1.0) * std::exp(-s.log_shift * (q + 1.0) / q) *
           std::pow(X, (p - 1.0) / q - 1.0) * I3(r, X);
  }

  double flux_inner(const BarrierSlice& s, double r, double X) const {
    const ProblemSpec& pr = ev_.calc().problem();
    const BarrierParams& bp = ev_.params();
    const double p = pr.p;
    const double q = pr.q();
    return -std::pow(bp.C_star, q + 1.0) * std::pow(bp.nu0 * p, p - 1.0) / std::pow(q, p - 1.0) *
           std::pow(X, (p - 1.0) / q) * std::exp(-s.log_shift * (q + 1.0) / q) * r / ev_.G0();
  }

  double dflux_inner(const BarrierSlice& s, double r, double X) const {
    const ProblemSpec& pr = ev_.calc().problem();
    const BarrierParams& bp = ev_.params();
    const double p = pr.p;
    const double q = pr.q();
    const double G0 = ev_.G0();
    const double inner = p * bp.nu0 / q * std::pow(r, p / (p - 1.0)) / std::pow(G0, 1.0 / (p - 1.0)) - X;
    return std::pow(bp.C_star, q + 1.0) * std::pow(bp.nu0 * p, p - 1.0) / std::pow(q, p - 1.0) *
           std::pow(X, (p - 1.0) / q - 1.0) * std::exp(-s.log_shift * (q + 1.0) / q) / G0 * inner;
  }

 private:
  // Residual divided by the positive factor C* X^{(p-1)/q - 1} (t+t0)^{-(q+1)/q} / q:
  //   outer: K0 - K1 - X - K2,   inner: K0 - K3.
  void reduced(const BarrierSlice& s, double r, PointTerms& pt) const {
    const ProblemSpec& pr = ev_.calc().problem();
    const BarrierParams& bp = ev_.params();
    const double p = pr.p;
    const double q = pr.q();
    const double X = pt.X;
    const double Cq = std::pow(bp.C_star, q);
    const double qp2 = std::pow(q, p - 2.0);
    const double coef = (pr.N - 1.0) / r + ev_.calc().weight().g_prime(r);
    const double K0 = (p - 1.0) * std::exp(s.log_shift) * pt.td.dE_root_dt;
    if (pt.zone == Zone::Outer) {
      const double J = ev_.calc().big_J(r);
      const double Jp = ev_.calc().big_J_prime(r);
      const double K1 = -Cq * X * std::pow(J, 2.0 - p) * std::pow(Jp, p - 1.0) * coef / qp2;
      const double K2 = -Cq * I3(r, X) / qp2;
      pt.reduced = K0 - K1 - X - K2;
      pt.reduced_scale = std::max({std::abs(K0), std::abs(K1), std::abs(X), std::abs(K2)});
    } else {
      const double G0 = ev_.G0();
      const double np = std::pow(bp.nu0 * p, p - 1.0);
      const double a = Cq * np / (qp2 * G0) * (p * bp.nu0 / q * std::pow(r, p / (p - 1.0)) / std::pow(G0, 1.0 / (p - 1.0)) - X);
      const double b = -coef * Cq * np * X * r / (qp2 * G0);
      const double K3 = X + a + b;
      pt.reduced = K0 - K3;
      pt.reduced_scale = std::max({std::abs(K0), std::abs(X), std::abs(a), std::abs(b)});
    }
  }

  BarrierEvaluator ev_;
};

inline double analytic_flux_outer(const BarrierParams& bp, const EnvelopeCalculus& calc, double r, double t) {
  if (r < bp.r0) throw DomainError("analytic_flux_outer: r must be >= r0");
  ResidualEvaluator re(bp, calc);
  return re.flux(re.slice(t), r);
}

inline double analytic_flux_inner(const BarrierParams& bp, const EnvelopeCalculus& calc, double r, double t) {
  if (!(r >= 0.0) || r > bp.r0) throw DomainError("analytic_flux_inner: r must lie in [0, r0]");
  ResidualEvaluator re(bp, calc);
  const BarrierSlice s = re.slice(t);
  const double X = s.E_root - re.barrier().inner_I(r);
  return X > 0.0 ? re.flux_inner(s, r, X) : 0.0;
}

inline double analytic_dflux(const BarrierParams& bp, const EnvelopeCalculus& calc, double r, double t) {
  ResidualEvaluator re(bp, calc);
  return re.dflux(re.slice(t), r);
}

inline TimeDerivative time_derivative(const BarrierParams& bp, const EnvelopeCalculus& calc, double r, double t) {
  ResidualEvaluator re(bp, calc);
  return re.time_derivative(re.slice(t), r);
}

struct ResidualGrid {
  int n_radii = 400;       // per zone
  int n_times = 40;
  double t_span = 1e6;     // times cover t + t0 in [t0, (1 + t_span) t0], geometric
  double delta = 1e-3;     // relative half-width of excluded bands
  double r_min_factor = 1e-4;
  double tol = 1e-8;
  bool keep_samples = false;
};

struct ExcludedBand {
  double t = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
};

struct ResidualSample {
  double r = 0.0;
  double t = 0.0;
  double value = 0.0;
};

struct ResidualReport {
  BarrierKind kind = BarrierKind::Super;
  double tol = 1e-8;
  std::size_t n_points = 0;
  int n_radii = 0;
  int n_times = 0;
  double t_max = 0.0;
  double worst_value = std::numeric_limits<double>::infinity();
  double worst_r = 0.0;
  double worst_t = 0.0;
  std::vector<ExcludedBand> excluded_bands;
  std::size_t sign_disagreements = 0;
  std::size_t sandwich_failures = 0;
  std::vector<ResidualSample> samples;
  bool pass = false;
};

/// Evaluates the sign-normalised residual (>= 0 expected) on the zone grids at every
/// time and reports the worst point. Bands of relative half-width delta around r0 and
/// the support edge are excluded, since the barrier is only C^1 there.
inline ResidualReport verify(const BarrierParams& bp, const EnvelopeCalculus& calc, const ResidualGrid& grid = {}) {
  if (grid.n_radii < 2 || grid.n_times < 1) throw ConfigError("verify: empty residual grid");
  if (!(grid.delta >= 0.0) || !(grid.delta < 1.0)) throw ConfigError("verify: band half-width must lie in [0, 1)");
  if (!(grid.t_span > 0.0) || !(grid.r_min_factor > 0.0) || !(grid.r_min_factor < 1.0))
    throw ConfigError("verify: invalid time span or inner radius factor");

  const ResidualEvaluator re(bp, calc);
  const double sign = bp.kind == BarrierKind::Super ? 1.0 : -1.0;
  const double span = std::log1p(grid.t_span);
  const int nt = grid.n_times;

  struct SliceResult {
    std::size_t n = 0;
    double worst = std::numeric_limits<double>::infinity();
    double worst_r = 0.0;
    std::size_t disagree = 0;
    std::size_t sandwich = 0;
    std::vector<ExcludedBand> bands;
    std::vector<ResidualSample> samples;
    double t = 0.0;
  };
  std::vector<SliceResult> results(static_cast<std::size_t>(nt));

  parallel_for(results.size(), [&](std::size_t k) {
    const double frac = nt == 1 ? 0.0 : static_cast<double>(k) / (nt - 1);
    const BarrierSlice s = re.slice_at_log_shift(bp.log_t0 + frac * span);
    SliceResult& out = results[k];
    out.t = s.t;
    const double r0 = bp.r0;
    const double edge = s.support_radius;
    out.bands.push_back({s.t, r0 * (1.0 - grid.delta), r0 * (1.0 + grid.delta)});
    out.bands.push_back({s.t, edge * (1.0 - grid.delta), edge * (1.0 + grid.delta)});

    auto sample_zone = [&](double lo, double hi) {
      if (!(hi > lo)) return;
      for (double r : log_grid(lo, hi, static_cast<std::size_t>(grid.n_radii))) {
        const PointTerms pt = re.terms(s, r);
        if (pt.zone == Zone::Outside) continue;
        ++out.n;
        if (!pt.td.sandwich_ok) ++out.sandwich;
        const double v = pt.scale > 0.0 ? sign * pt.residual / pt.scale : 0.0;
        const double vr = pt.reduced_scale > 0.0 ? pt.reduced / pt.reduced_scale : 0.0;
        if (std::abs(v) > 1e-9 && std::abs(vr) > 1e-9 && (v > 0.0) != (sign * vr > 0.0)) ++out.disagree;
        if (v < out.worst) {
          out.worst = v;
          out.worst_r = r;
        }
        if (grid.keep_samples) out.samples.push_back({r, s.t, v});
      }
    };
    sample_zone(grid.r_min_factor * r0, r0 * (1.0 - grid.delta));
    sample_zone(r0 * (1.0 + grid.delta), std::min(edge * (1.0 - grid.delta), edge));
  });

  ResidualReport rep;
  rep.kind = bp.kind;
  rep.tol = grid.tol;
  rep.n_radii = grid.n_radii;
  rep.n_times = grid.n_times;
  for (const auto& res : results) {
    rep.n_points += res.n;
    rep.sign_disagreements += res.disagree;
    rep.sandwich_failures += res.sandwich;
    rep.excluded_bands.insert(rep.excluded_bands.end(), res.bands.begin(), res.bands.end());
    rep.samples.insert(rep.samples.end(), res.samples.begin(), res.samples.end());
    rep.t_max = std::max(rep.t_max, res.t);
    if (res.worst < rep.worst_value) {
      rep.worst_value = res.worst;
      rep.worst_r = res.worst_r;
      rep.worst_t = res.t;
    }
  }
  if (rep.n_points == 0) throw ConfigError("verify: excluded bands cover the whole support");
  rep.pass = rep.worst_value >= -rep.tol;
  return rep;
}

}  // namespace ddw
