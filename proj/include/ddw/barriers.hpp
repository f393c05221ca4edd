#pragma once

// Explicit radial barriers
//
//   u(r,t) = C* (t+t0)^{-1/q} [E(tau)^{1/(p-1)} - J(r)^{1/(p-1)}]_+^{(p-1)/q},  r >= r0,
//   u(r,t) = C* (t+t0)^{-1/q} [E(tau)^{1/(p-1)} - I(r)]_+^{(p-1)/q},          r <  r0,
//
// with q = p + m - 3 and tau = Gamma log(t + t0), and the recipes that select
// (C*, Gamma, t0, r0, nu0) so that u is a supersolution or a subsolution.
//
// t0 can be astronomically large (log t0 of several hundred is legitimate), so the
// parameters carry log t0 and every evaluation works with log(t + t0).

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "ddw/envelope.hpp"
#include "ddw/errors.hpp"
#include "ddw/roots.hpp"
#include "ddw/weights.hpp"

namespace ddw {

enum class BarrierKind { Super, Sub };

inline const char* to_string(BarrierKind k) { return k == BarrierKind::Super ? "super" : "sub"; }

struct SuperConstants {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double d = 0.0;
};

struct SubConstants {
  double mu1t = 0.0;
  double mu2t = 0.0;
  double mu3t = 0.0;
  double mu4t = 0.0;
  double dt = 0.0;
};

/// Multipliers applied to "large enough" / "small enough" selections.
struct SlackFactors {
  double enlarge = 1.05;
  double shrink = 0.95;
};

struct BarrierParams {
  BarrierKind kind = BarrierKind::Super;
  double C_star = 1.0;
  double Gamma = 1.0;
  double log_t0 = 1.0;
  double r0 = 1.0;
  double nu0 = 0.5;
  std::variant<SuperConstants, SubConstants> mus = SuperConstants{};
  double lambda = 0.0;  // Sub only
  SlackFactors slack;

  double t0() const { return std::exp(log_t0); }

  /// log(t + t0) without forming t0.
  double log_shifted_time(double t) const {
    if (!(t >= 0.0)) throw DomainError("barrier: t must be nonnegative");
    if (t == 0.0) return log_t0;
    const double lt = std::log(t);
    const double hi = std::max(lt, log_t0);
    const double lo = std::min(lt, log_t0);
    return hi + std::log1p(std::exp(lo - hi));
  }
};

inline SuperConstants super_mu_constants(const ProblemSpec& pr) {
  const double p = pr.p;
  const double q = pr.q();
  const double a1 = pr.alpha1();
  const double a2 = pr.alpha2();
  const double c1 = j_second_constants(p, a1, a2).first;
  const double ai = p >= 2.0 ? a1 : a2;
  SuperConstants k;
  k.mu1 = std::pow(p - a2, p - 1.0) / std::pow(q, p - 2.0);
  k.mu2 = std::pow(p - a1, p) / std::pow(q, p - 1.0);
  k.d = neg_part(c1) * (p - 1.0) * std::pow(p - ai, p - 2.0);
  k.mu3 = (pos_part(p - 2.0) * std::pow(p - a1, p) + k.d) / std::pow(q, p - 2.0);
  return k;
}

inline SubConstants sub_mu_constants(const ProblemSpec& pr) {
  const double p = pr.p;
  const double q = pr.q();
  const double a1 = pr.alpha1();
  const double a2 = pr.alpha2();
  const double c2 = j_second_constants(p, a1, a2).second;
  const double ai = p >= 2.0 ? a1 : a2;
  SubConstants k;
  k.mu1t = std::pow(p - a1, p - 1.0) / std::pow(q, p - 2.0);
  k.mu2t = std::pow(p - a2, p) / std::pow(q, p - 1.0);
  k.dt = pos_part(c2) * (p - 1.0) * std::pow(p - ai, p - 2.0);
  k.mu3t = (neg_part(p - 2.0) * std::pow(p - a1, p) + k.dt) / std::pow(q, p - 2.0);
  k.mu4t = std::pow(2.0, -a2 * (p - 1.0) / (p - a2)) * k.mu2t * a1 / (p - a1);
  return k;
}

/// Per-time quantities shared by every radius: log(t+t0), tau, E(tau)^{1/(p-1)} and
/// the amplitude C* (t+t0)^{-1/q}.
struct BarrierSlice {
  double t = 0.0;
  double log_shift = 0.0;
  double tau = 0.0;
  double E_root = 0.0;
  double amplitude = 0.0;
  double support_radius = 0.0;
};

class BarrierEvaluator {
 public:
  BarrierEvaluator(const BarrierParams& params, const EnvelopeCalculus& calc) : params_(params), calc_(calc) {
    const double p = calc.problem().p;
    G0_ = calc.big_G(params.r0);
    J0_root_ = std::pow(calc.big_J(params.r0), 1.0 / (p - 1.0));
  }

  BarrierSlice slice(double t) const {
    const double p = calc_.problem().p;
    BarrierSlice s;
    s.t = t;
    s.log_shift = params_.log_shifted_time(t);
    s.tau = params_.Gamma * s.log_shift;
    s.E_root = std::pow(calc_.big_E(s.tau), 1.0 / (p - 1.0));
    s.amplitude = params_.C_star * std::exp(-s.log_shift / calc_.problem().q());
    s.support_radius = calc_.big_G_inverse(s.tau);
    return s;
  }

  /// E(tau)^{1/(p-1)} - J(r)^{1/(p-1)} for r >= r0, E(tau)^{1/(p-1)} - I(r) below;
  /// may be negative outside the support.
  double bracket(const BarrierSlice& s, double r) const {
    const double p = calc_.problem().p;
    if (r >= params_.r0) {
      if (r >= s.support_radius) return std::min(0.0, s.E_root - std::pow(calc_.big_J(r), 1.0 / (p - 1.0)));
      return s.E_root - std::pow(calc_.big_J(r), 1.0 / (p - 1.0));
    }
    return s.E_root - inner_I(r);
  }

  double value(const BarrierSlice& s, double r) const {
    const double X = bracket(s, r);
    if (X <= 0.0) return 0.0;
    const ProblemSpec& pr = calc_.problem();
    return s.amplitude * std::pow(X, (pr.p - 1.0) / pr.q());
  }

  double inner_I(double r) const {
    const double p = calc_.problem().p;
    return params_.nu0 * std::pow(std::pow(r, p) / G0_, 1.0 / (p - 1.0)) + (1.0 - params_.nu0) * J0_root_;
  }

  const BarrierParams& params() const noexcept { return params_; }
  const EnvelopeCalculus& calc() const noexcept { return calc_; }
  double G0() const noexcept { return G0_; }
  double J0_root() const noexcept { return J0_root_; }

 private:
  BarrierParams params_;
  const EnvelopeCalculus& calc_;
  double G0_ = 0.0;
  double J0_root_ = 0.0;
};

inline double eval_barrier(const BarrierParams& params, const EnvelopeCalculus& calc, double r, double t) {
  if (!(r >= 0.0)) throw DomainError("eval_barrier: r must be nonnegative");
  BarrierEvaluator ev(params, calc);
  return ev.value(ev.slice(t), r);
}

/// Radius of the support at time t: G^{-1}(Gamma log(t + t0)).
inline double barrier_support_radius(const BarrierParams& params, const EnvelopeCalculus& calc, double t) {
  return calc.big_G_inverse(params.Gamma * params.log_shifted_time(t));
}

/// Constants gamma1 <= gamma2 with gamma1 g^{-1}(log t) <= support radius <= gamma2 g^{-1}(log t)
/// for every t > t0 (derived from g/alpha2 <= G <= g/alpha1 and the scaling of g^{-1}).
struct RadiusBounds {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

inline RadiusBounds support_radius_bounds(const BarrierParams& params, const EnvelopeCalculus& calc) {
  const double a1 = calc.problem().alpha1();
  const double a2 = calc.problem().alpha2();
  // g^{-1}(lambda y) / g^{-1}(y) lies in [lambda^{1/a2}, lambda^{1/a1}] for lambda >= 1
  // and in [lambda^{1/a1}, lambda^{1/a2}] for lambda <= 1.
  auto lower_scale = [&](double lambda) { return lambda >= 1.0 ? std::pow(lambda, 1.0 / a2) : std::pow(lambda, 1.0 / a1); };
  auto upper_scale = [&](double lambda) { return lambda >= 1.0 ? std::pow(lambda, 1.0 / a1) : std::pow(lambda, 1.0 / a2); };
  // For t > t0 > 1: log t < log(t + t0) <= log t + log 2 <= kappa log t.
  const double kappa = 1.0 + std::log(2.0) / params.log_t0;
  return {lower_scale(a1 * params.Gamma), upper_scale(a2 * params.Gamma * kappa)};
}

namespace detail {

struct SuperCore {
  SuperConstants mus;
  double G0 = 0.0;
  double r0 = 0.0;
  double C_star = 0.0;
  double nu0 = 0.0;
  double Gamma = 0.0;
  double log_t0 = 0.0;
};

// G(r0) thresholds that make the outer-zone inequality close.
inline double super_r0_threshold(const ProblemSpec& pr, const SuperConstants& k) {
  const double p = pr.p;
  const double a1 = pr.alpha1();
  const double a2 = pr.alpha2();
  const double t1 = 4.0 * k.mu3 / (k.mu1 * a1 * a1);
  const double t2 = 2.0 * k.mu2 * p * pos_part(a2 - 1.0) / (k.mu1 * a1 * a1 * (p - a2));
  return std::max(t1, t2);
}

// Left-hand side of the inner-zone condition on t0:
//   (p nu0 / q) r0^{p/(p-1)} / G(r0)^{1/(p-1)} + I(r0)  <=  E(log t0)^{1/(p-1)}.
inline double super_t0_lhs(const ProblemSpec& pr, double r0, double G0, double J0, double nu0) {
  const double p = pr.p;
  const double e = 1.0 / (p - 1.0);
  return p * nu0 / pr.q() * std::pow(r0, p * e) / std::pow(G0, e) + std::pow(J0, e);
}

inline SuperCore select_super_core(const ProblemSpec& pr, const EnvelopeCalculus& calc, double G0_floor,
                                   const SlackFactors& slack) {
  SuperCore c;
  c.mus = super_mu_constants(pr);
  const double p = pr.p;
  const double q = pr.q();
  const double a1 = pr.alpha1();
  const double a2 = pr.alpha2();

  const double threshold = super_r0_threshold(pr, c.mus);
  double G0 = threshold > 0.0 ? slack.enlarge * threshold : 1.0;
  G0 = std::max(G0, G0_floor);
  c.r0 = calc.big_G_inverse(G0);
  c.G0 = calc.big_G(c.r0);

  const double bound = std::min(c.mus.mu1 * a1 * a1 / 4.0,
                                (pr.N - 1.0) * std::pow(p - a2, p - 1.0) / (std::pow(q, p - 2.0) * c.G0));
  c.C_star = slack.enlarge * std::pow(bound, -1.0 / q);
  c.nu0 = 1.0 - calc.weight().g(c.r0) / (p * c.G0);
  c.Gamma = slack.enlarge * std::max(c.mus.mu2 * a2 * std::pow(c.C_star, q) / (p - a2), 1.0);

  const double lhs = super_t0_lhs(pr, c.r0, c.G0, calc.big_J(c.r0), c.nu0);
  auto excess = [&](double L) { return std::pow(calc.big_E(L), 1.0 / (p - 1.0)) - lhs; };
  const double lo = c.G0 + 1e-6;
  double L = lo;
  if (excess(lo) < 0.0) {
    const double hi = expand_upper(excess, 1e3, 10.0, 1e300);
    L = bisect_increasing(excess, lo, hi);
  }
  c.log_t0 = slack.enlarge * L;
  return c;
}

inline BarrierParams to_params(const SuperCore& c, const SlackFactors& slack) {
  BarrierParams bp;
  bp.kind = BarrierKind::Super;
  bp.C_star = c.C_star;
  bp.Gamma = c.Gamma;
  bp.log_t0 = c.log_t0;
  bp.r0 = c.r0;
  bp.nu0 = c.nu0;
  bp.mus = c.mus;
  bp.slack = slack;
  return bp;
}

}  // namespace detail

struct ConstraintCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
};

struct BarrierValidation {
  std::vector<ConstraintCheck> checks;
  bool pass = true;
};

/// Re-derives every defining inequality of a parameter set from first principles
/// (constants recomputed here, not taken from the selector) and reports each one.
inline BarrierValidation validate_barrier(const BarrierParams& bp, const EnvelopeCalculus& calc) {
  const ProblemSpec& pr = calc.problem();
  const double p = pr.p;
  const double q = pr.q();
  const double N = pr.N;
  const double a1 = pr.alpha1();
  const double a2 = pr.alpha2();
  const double e = 1.0 / (p - 1.0);
  const double G0 = calc.big_G(bp.r0);
  const double J0 = calc.big_J(bp.r0);
  const double Cq = std::pow(bp.C_star, q);
  constexpr double rel = 1e-10;

  BarrierValidation out;
  auto le = [&](std::string name, double lhs, double rhs) {
    const bool ok = lhs <= rhs + rel * std::max(std::abs(lhs), std::abs(rhs));
    out.checks.push_back({std::move(name), lhs, rhs, ok});
  };
  auto lt = [&](std::string name, double lhs, double rhs) { out.checks.push_back({std::move(name), lhs, rhs, lhs < rhs}); };
  auto eq = [&](std::string name, double lhs, double rhs) {
    const bool ok = std::abs(lhs - rhs) <= rel * std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    out.checks.push_back({std::move(name), lhs, rhs, ok});
  };

  le("nu0 >= 1 - alpha2/p", 1.0 - a2 / p, bp.nu0);
  le("nu0 <= 1 - alpha1/p", bp.nu0, 1.0 - a1 / p);
  // C^1 matching: I'(r0) equals d/dr J^{1/(p-1)} at r0.
  const double dI = bp.nu0 * p * e * std::pow(bp.r0, e) / std::pow(G0, e);
  const double dJroot = e * std::pow(J0, e - 1.0) * J0 / bp.r0 * (p - calc.weight().g(bp.r0) / G0);
  eq("I'(r0) = (J^{1/(p-1)})'(r0)", dI, dJroot);
  lt("t0 > 1", 0.0, bp.log_t0);

  if (bp.kind == BarrierKind::Super) {
    const double c1 = a2 >= 1.0 ? p * (p - 1.0 - 2.0 * a2) + 2.0 * a1 * a1 - a2 * (a2 - 1.0)
                                : p * (p - 1.0 - 2.0 * a2) + 2.0 * a1 * a1 - a1 * (a2 - 1.0);
    const double mu1 = std::pow(p - a2, p - 1.0) / std::pow(q, p - 2.0);
    const double mu2 = std::pow(p - a1, p) / std::pow(q, p - 1.0);
    const double d = (c1 < 0.0 ? -c1 : 0.0) * (p - 1.0) * std::pow(p - (p >= 2.0 ? a1 : a2), p - 2.0);
    const double mu3 = ((p > 2.0 ? p - 2.0 : 0.0) * std::pow(p - a1, p) + d) / std::pow(q, p - 2.0);

    le("Gamma >= 1", 1.0, bp.Gamma);
    lt("G(r0) < log t0", G0, bp.log_t0);
    le("G(r0) >= 4 mu3 / (mu1 alpha1^2)", 4.0 * mu3 / (mu1 * a1 * a1), G0);
    le("G(r0) >= 2 mu2 p (alpha2-1)_+ / (mu1 alpha1^2 (p-alpha2))",
       2.0 * mu2 * p * std::max(a2 - 1.0, 0.0) / (mu1 * a1 * a1 * (p - a2)), G0);
    le("C*^-q <= mu1 alpha1^2 / 4", 1.0 / Cq, mu1 * a1 * a1 / 4.0);
    le("C*^-q <= (N-1)(p-alpha2)^{p-1} / (q^{p-2} G(r0))", 1.0 / Cq,
       (N - 1.0) * std::pow(p - a2, p - 1.0) / (std::pow(q, p - 2.0) * G0));
    le("Gamma >= mu2 alpha2 C*^q / (p-alpha2)", mu2 * a2 * Cq / (p - a2), bp.Gamma);
    le("inner-zone t0 condition",
       p * bp.nu0 / q * std::pow(bp.r0, p * e) / std::pow(G0, e) + std::pow(J0, e),
       std::pow(calc.big_E(bp.log_t0), e));
  } else {
    const double c2 = a1 >= 1.0 ? p * (p - 1.0 - 2.0 * a1) + 2.0 * a2 * a2 - a1 * (a1 - 1.0)
                                : p * (p - 1.0 - 2.0 * a1) + 2.0 * a2 * a2 - a2 * (a1 - 1.0);
    const double m1 = std::pow(p - a1, p - 1.0) / std::pow(q, p - 2.0);
    const double m2 = std::pow(p - a2, p) / std::pow(q, p - 1.0);
    const double dt = (c2 > 0.0 ? c2 : 0.0) * (p - 1.0) * std::pow(p - (p >= 2.0 ? a1 : a2), p - 2.0);
    const double m3 = ((p < 2.0 ? 2.0 - p : 0.0) * std::pow(p - a1, p) + dt) / std::pow(q, p - 2.0);
    const double two_pow = std::pow(2.0, a2 * (p - 1.0) / (p - a2));
    const double m4 = m2 * a1 / (p - a1) / two_pow;
    const double np = std::pow(bp.nu0 * p, p - 1.0);
    const double lam_q = std::pow(bp.lambda, q);

    le("log t0 >= 4 (p-alpha1)/alpha1", 4.0 * (p - a1) / a1, bp.log_t0);
    le("log t0 >= 1/mu4", 1.0 / m4, bp.log_t0);
    le("log t0 >= (2 mu1 (N-1) + mu3 + 2 mu1 alpha2^2)/mu4", (2.0 * m1 * (N - 1.0) + m3 + 2.0 * m1 * a2 * a2) / m4,
       bp.log_t0);
    le("log t0 >= 2 (nu0 p)^{p-1} (N + alpha2^2) / (mu4 q^{p-2})",
       2.0 * np * (N + a2 * a2) / (m4 * std::pow(q, p - 2.0)), bp.log_t0);
    lt("G(r0) < 1", G0, 1.0);
    lt("G(r0) < lambda^q", G0, lam_q);
    lt("G(r0) < mu4 C*^q log t0", G0, m4 * Cq * bp.log_t0);
    const double cmax = std::max({1.0 / lam_q, 2.0 * (m1 * (N - 1.0) + m3) / G0 + 2.0 * m1 * a2 * a2,
                                  2.0 * np / std::pow(q, p - 2.0) / G0 * (N + a2 * a2 * G0)});
    eq("C*^-q = three-term max", 1.0 / Cq, cmax);
    eq("Gamma = 2^{alpha2(p-1)/(p-alpha2)} G(r0) / log t0", bp.Gamma, two_pow * G0 / bp.log_t0);
    le("Gamma (p-alpha1)/alpha1 <= mu2 C*^q", bp.Gamma * (p - a1) / a1, m2 * Cq);
    le("E(Gamma log t0) >= 2^{p-1} J(r0)", std::pow(2.0, p - 1.0) * J0, calc.big_E(bp.Gamma * bp.log_t0));
  }
  for (const auto& c : out.checks) out.pass = out.pass && c.holds;
  return out;
}

inline BarrierParams select_super(const ProblemSpec& pr, const EnvelopeCalculus& calc, const SlackFactors& slack = {}) {
  return detail::to_params(detail::select_super_core(pr, calc, 0.0, slack), slack);
}

inline BarrierParams select_sub(const ProblemSpec& pr, const EnvelopeCalculus& calc, double lambda = 1.0,
                                const SlackFactors& slack = {}) {
  if (!(lambda > 0.0)) throw DomainError("select_sub: lambda must be positive");
  const SubConstants k = sub_mu_constants(pr);
  const double p = pr.p;
  const double q = pr.q();
  const double N = pr.N;
  const double a1 = pr.alpha1();
  const double a2 = pr.alpha2();
  const double lam_q = std::pow(lambda, q);
  if (!(lam_q > 1e-300) || !std::isfinite(lam_q)) throw ConstructionError("select_sub: lambda^q under/overflows");

  // nu0 depends on r0, which is chosen after t0; its upper bound 1 - alpha1/p is used
  // here (exact for power weights).
  const double nu_cap = 1.0 - a1 / p;
  const double np_cap = std::pow(nu_cap * p, p - 1.0);
  const double log_t0 =
      slack.enlarge * std::max({4.0 * (p - a1) / a1, 1.0 / k.mu4t,
                                (2.0 * k.mu1t * (N - 1.0) + k.mu3t + 2.0 * k.mu1t * a2 * a2) / k.mu4t,
                                2.0 * np_cap * (N + a2 * a2) / (k.mu4t * std::pow(q, p - 2.0))});

  double G0 = slack.shrink * std::min(1.0, lam_q);
  double r0 = 0.0;
  double nu0 = 0.0;
  double Cinv = 0.0;
  bool found = false;
  for (int it = 0; it < 200; ++it) {
    r0 = calc.big_G_inverse(G0);
    G0 = calc.big_G(r0);
    nu0 = 1.0 - calc.weight().g(r0) / (p * G0);
    const double np = std::pow(nu0 * p, p - 1.0);
    Cinv = std::max({1.0 / lam_q, 2.0 * (k.mu1t * (N - 1.0) + k.mu3t) / G0 + 2.0 * k.mu1t * a2 * a2,
                     2.0 * np / std::pow(q, p - 2.0) / G0 * (N + a2 * a2 * G0)});
    if (G0 * Cinv < k.mu4t * log_t0) {
      found = true;
      break;
    }
    G0 *= 0.5;
  }
  if (!found) throw ConstructionError("select_sub: r0/C* fixed-point sweep did not terminate");

  BarrierParams bp;
  bp.kind = BarrierKind::Sub;
  bp.C_star = std::pow(Cinv, -1.0 / q);
  bp.log_t0 = log_t0;
  bp.r0 = r0;
  bp.nu0 = nu0;
  bp.Gamma = std::pow(2.0, a2 * (p - 1.0) / (p - a2)) * G0 / log_t0;
  bp.mus = k;
  bp.lambda = lambda;
  bp.slack = slack;
  if (!(G0 * std::pow(bp.C_star, -q) < k.mu4t * log_t0))
    throw ConstructionError("select_sub: compatibility G(r0) C*^-q < mu4 log t0 violated");
  return bp;
}

/// Supersolution with u(x, 0) >= M on |x| <= L: r0 >= L, and Gamma enlarged until
/// E(Gamma log t0)^{1/(p-1)} >= (M t0^{1/q} / C*)^{q/(p-1)} + J(r0)^{1/(p-1)}.
inline BarrierParams fit_super_above(const ProblemSpec& pr, const EnvelopeCalculus& calc, double M, double L,
                                     const SlackFactors& slack = {}) {
  if (!(M > 0.0) || !(L > 0.0)) throw DomainError("fit_super_above: M and L must be positive");
  detail::SuperCore c = detail::select_super_core(pr, calc, calc.big_G(L), slack);
  const double p = pr.p;
  const double q = pr.q();
  const double e = 1.0 / (p - 1.0);
  const double target = std::exp(q * e * (std::log(M / c.C_star) + c.log_t0 / q)) + std::pow(calc.big_J(c.r0), e);
  auto excess = [&](double tau) { return std::pow(calc.big_E(tau), e) - target; };
  double lo = 1e-12;
  double tau_M = lo;
  if (excess(lo) < 0.0) {
    const double hi = expand_upper(excess, std::max(1.0, c.log_t0), 2.0, 1e300);
    tau_M = bisect_increasing_log(excess, lo, hi);
  }
  c.Gamma = std::max(c.Gamma, slack.enlarge * tau_M / c.log_t0);
  return detail::to_params(c, slack);
}

/// Support radius of the barrier at t = 0.
inline double initial_support_radius(const BarrierParams& bp, const EnvelopeCalculus& calc) {
  return calc.big_G_inverse(bp.Gamma * bp.log_t0);
}

/// Subsolution with supp u(., 0) inside |x| <= ell and max u(., 0) = u(0, 0) <= eps,
/// obtained by shrinking lambda (largest admissible lambda <= 1 to bisection accuracy).
inline BarrierParams fit_sub_below(const ProblemSpec& pr, const EnvelopeCalculus& calc, double eps, double ell,
                                   const SlackFactors& slack = {}) {
  if (!(eps > 0.0) || !(ell > 0.0)) throw DomainError("fit_sub_below: eps and ell must be positive");
  auto admissible = [&](double lambda, BarrierParams* out) {
    BarrierParams bp = select_sub(pr, calc, lambda, slack);
    const bool ok = initial_support_radius(bp, calc) <= ell && eval_barrier(bp, calc, 0.0, 0.0) <= eps;
    if (out) *out = bp;
    return ok;
  };
  BarrierParams best;
  double hi = 1.0;
  if (admissible(hi, &best)) return best;
  double lo = hi;
  for (;;) {
    lo *= 0.5;
    if (lo < 1e-300) throw ConstructionError("fit_sub_below: lambda underflow");
    if (admissible(lo, &best)) break;
    hi = lo;
  }
  for (int it = 0; it < 40; ++it) {
    const double mid = std::sqrt(lo * hi);
    BarrierParams cand;
    if (admissible(mid, &cand)) {
      lo = mid;
      best = cand;
    } else {
      hi = mid;
    }
  }
  return best;
}

}  // namespace ddw
