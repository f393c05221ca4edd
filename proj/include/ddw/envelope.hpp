#pragma once

// Derived calculus of the weight exponent:
//   G(r) = int_0^r g(s)/s ds,   J(r) = r^p / G(r),   E(tau) = J(G^{-1}(tau)),
//   I(r) = nu0 (r^p/G(r0))^{1/(p-1)} + (1 - nu0) J(r0)^{1/(p-1)},
// together with the explicit sandwich constants (eta1, eta2) for r^2 G'' / G and
// (c1, c2) for r^2 J'' / J, and a report checking every sandwich on a grid.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ddw/errors.hpp"
#include "ddw/quadrature.hpp"
#include "ddw/weights.hpp"

namespace ddw {

/// (x)_+ and the magnitude of the negative part (x)_-.
inline double pos_part(double x) noexcept { return x > 0.0 ? x : 0.0; }
inline double neg_part(double x) noexcept { return x < 0.0 ? -x : 0.0; }

/// Constants bounding r^2 G''(r) / G(r) from below and above.
inline std::pair<double, double> eta_constants(double a1, double a2) {
  const double eta1 = a1 < 1.0 ? (a1 - 1.0) * a2 : (a1 - 1.0) * a1;
  const double eta2 = a2 < 1.0 ? (a2 - 1.0) * a1 : (a2 - 1.0) * a2;
  return {eta1, eta2};
}

/// Constants bounding r^2 J''(r) / J(r) from below and above.
inline std::pair<double, double> j_second_constants(double p, double a1, double a2) {
  const double c1 = a2 >= 1.0 ? p * (p - 1.0 - 2.0 * a2) + 2.0 * a1 * a1 - a2 * (a2 - 1.0)
                              : p * (p - 1.0 - 2.0 * a2) + 2.0 * a1 * a1 - a1 * (a2 - 1.0);
  const double c2 = a1 >= 1.0 ? p * (p - 1.0 - 2.0 * a1) + 2.0 * a2 * a2 - a1 * (a1 - 1.0)
                              : p * (p - 1.0 - 2.0 * a1) + 2.0 * a2 * a2 - a2 * (a1 - 1.0);
  return {c1, c2};
}

class EnvelopeCalculus {
 public:
  explicit EnvelopeCalculus(ProblemSpec problem) : problem_(std::move(problem)) {
    std::tie(eta1_, eta2_) = eta_constants(problem_.alpha1(), problem_.alpha2());
    std::tie(c1_, c2_) = j_second_constants(problem_.p, problem_.alpha1(), problem_.alpha2());
    if (!problem_.weight.is_power()) build_cache();
  }

  const ProblemSpec& problem() const noexcept { return problem_; }
  const WeightSpec& weight() const noexcept { return problem_.weight; }
  double eta1() const noexcept { return eta1_; }
  double eta2() const noexcept { return eta2_; }
  double c1() const noexcept { return c1_; }
  double c2() const noexcept { return c2_; }

  double big_G(double r) const {
    if (!(r > 0.0)) throw DomainError("G: r must be positive");
    if (const auto* pw = std::get_if<PowerWeight>(&weight().kind())) return std::pow(r, pw->alpha) / pw->alpha;
    if (r >= cache_r_.front() && r <= cache_r_.back()) {
      const std::size_t k = cache_index(r);
      return cache_G_[k] + increment(cache_r_[k], r);
    }
    return integral_from_zero(r);
  }

  /// G'(r) = g(r)/r.
  double big_G_prime(double r) const {
    if (!(r > 0.0)) throw DomainError("G': r must be positive");
    return weight().g(r) / r;
  }

  /// G''(r) = (r g'(r) - g(r)) / r^2.
  double big_G_second(double r) const {
    if (!(r > 0.0)) throw DomainError("G'': r must be positive");
    return weight().g(r) * (weight().log_slope(r) - 1.0) / (r * r);
  }

  double big_G_inverse(double tau) const {
    if (!(tau > 0.0)) throw DomainError("G^-1: tau must be positive");
    if (const auto* pw = std::get_if<PowerWeight>(&weight().kind()))
      return std::pow(pw->alpha * tau, 1.0 / pw->alpha);
    double lo;
    double hi;
    if (tau >= cache_G_.front() && tau <= cache_G_.back()) {
      auto it = std::upper_bound(cache_G_.begin(), cache_G_.end(), tau);
      const std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cache_G_.begin(), 1)) - 1;
      lo = cache_r_[k];
      hi = cache_r_[std::min(k + 1, cache_r_.size() - 1)];
    } else {
      // Seed from the power-law surrogate and bracket geometrically.
      const double a1 = problem_.alpha1();
      lo = hi = std::pow(a1 * tau, 1.0 / a1);
      while (big_G(lo) > tau) lo *= 0.5;
      while (big_G(hi) < tau) hi *= 2.0;
    }
    for (int k = 0; k < 80; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (big_G(mid) < tau ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  double big_J(double r) const {
    if (!(r > 0.0)) throw DomainError("J: r must be positive");
    return std::pow(r, problem_.p) / big_G(r);
  }

  /// J' = (J/r) [p - r G'/G].
  double big_J_prime(double r) const {
    const double J = big_J(r);
    return J / r * (problem_.p - g_over_G(r));
  }

  /// J'' = (J/r^2) [p(p-1) - 2p rG'/G - r^2 G''/G + 2 (rG'/G)^2].
  double big_J_second(double r) const {
    const double p = problem_.p;
    const double J = big_J(r);
    const double G = big_G(r);
    const double gv = weight().g(r);
    const double rho1 = gv / G;
    const double rho2 = gv * (weight().log_slope(r) - 1.0) / G;
    return J / (r * r) * (p * (p - 1.0) - 2.0 * p * rho1 - rho2 + 2.0 * rho1 * rho1);
  }

  double big_E(double tau) const {
    const double y = big_G_inverse(tau);
    return std::pow(y, problem_.p) / tau;
  }

  double cap_I(double r, double r0, double nu0) const {
    if (!(r >= 0.0) || !(r0 > 0.0)) throw DomainError("I: need r >= 0 and r0 > 0");
    if (!(nu0 > 0.0 && nu0 < 1.0)) throw DomainError("I: nu0 must lie in (0, 1)");
    const double e = 1.0 / (problem_.p - 1.0);
    return nu0 * std::pow(std::pow(r, problem_.p) / big_G(r0), e) + (1.0 - nu0) * std::pow(big_J(r0), e);
  }

  double cap_I_prime(double r, double r0, double nu0) const {
    const double p = problem_.p;
    return nu0 * p / (p - 1.0) * std::pow(r, 1.0 / (p - 1.0)) / std::pow(big_G(r0), 1.0 / (p - 1.0));
  }

  /// phi_J(r) = J(r)^{1/(p-1)} (delta1 + delta2 / G(r)).
  double phi_J(double r, double delta1, double delta2) const {
    return std::pow(big_J(r), 1.0 / (problem_.p - 1.0)) * (delta1 + delta2 / big_G(r));
  }

  /// Radius beyond which phi_J is nondecreasing; 0 when alpha2 <= 1.
  double phi_monotone_radius(double delta1, double delta2) const {
    if (!(delta1 > 0.0) || !(delta2 > 0.0)) throw DomainError("phi_monotone_radius: deltas must be positive");
    const double p = problem_.p;
    const double a2 = problem_.alpha2();
    const double target = delta2 / delta1 * p * pos_part(a2 - 1.0) / (p - a2);
    if (target <= 0.0) return 0.0;
    return big_G_inverse(target);
  }

  /// r G'(r) / G(r) = g(r) / G(r).
  double g_over_G(double r) const {
    if (const auto* pw = std::get_if<PowerWeight>(&weight().kind())) return pw->alpha;
    return weight().g(r) / big_G(r);
  }

 private:
  static constexpr double kCacheLo = 1e-10;
  static constexpr double kCacheHi = 1e10;
  static constexpr int kPerDecade = 100;

  // G(r) = int_0^inf g(r e^{-u}) du on dyadic panels; the endpoint singularity of
  // g(s)/s at 0 becomes an exponentially decaying tail in u.
  double integral_from_zero(double r) const {
    const double decay = std::get<ZygmundWeight>(weight().kind()).alpha;
    const double u_end = 42.0 / decay;
    auto integrand = [&](double u) { return weight().g(r * std::exp(-u)); };
    double sum = quad::gl_fixed<64>(integrand, 0.0, 1.0);
    for (double a = 1.0; a < u_end; a *= 2.0) sum += quad::gl_fixed<64>(integrand, a, 2.0 * a);
    return sum;
  }

  double increment(double a, double b) const {
    if (b == a) return 0.0;
    return quad::gl_fixed<16>([&](double s) { return weight().g(s) / s; }, a, b);
  }

  std::size_t cache_index(double r) const {
    auto it = std::upper_bound(cache_r_.begin(), cache_r_.end(), r);
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cache_r_.begin(), 1)) - 1;
  }

  void build_cache() {
    const std::size_t n = 20 * kPerDecade + 1;
    cache_r_ = log_grid(kCacheLo, kCacheHi, n);
    cache_G_.resize(n);
    cache_G_[0] = integral_from_zero(cache_r_[0]);
    for (std::size_t k = 1; k < n; ++k) cache_G_[k] = cache_G_[k - 1] + increment(cache_r_[k - 1], cache_r_[k]);
  }

  ProblemSpec problem_;
  double eta1_ = 0.0;
  double eta2_ = 0.0;
  double c1_ = 0.0;
  double c2_ = 0.0;
  std::vector<double> cache_r_;
  std::vector<double> cache_G_;
};

struct InequalityRecord {
  std::string name;
  double max_violation = 0.0;
  double argmax_r = 0.0;
  bool pass = true;
};

struct LemmaReport {
  double tol = 1e-8;
  std::vector<InequalityRecord> records;
  bool pass = true;

  const InequalityRecord* find(const std::string& name) const {
    for (const auto& r : records)
      if (r.name == name) return &r;
    return nullptr;
  }
};

namespace detail {

struct Tracker {
  InequalityRecord rec;
  void update(double v, double r) {
    if (v > rec.max_violation) {
      rec.max_violation = v;
      rec.argmax_r = r;
    }
  }
};

}  // namespace detail

/// Default tolerance: 1e-8 for closed-form weights, 1e-6 when G comes from quadrature.
inline double default_lemma_tolerance(const ProblemSpec& pr) { return pr.weight.is_power() ? 1e-8 : 1e-6; }

/// Evaluates every sandwich inequality of the envelope calculus on `grid` (and the
/// G^{-1} scaling bound on a coarser sub-grid) and reports the worst relative
/// violation of each family.
inline LemmaReport lemma_suite(const EnvelopeCalculus& calc, std::span<const double> grid, double tol = -1.0) {
  if (grid.empty() || grid.back() / grid.front() < 1e6 * (1.0 - 1e-12))
    throw DomainError("lemma_suite: grid must span at least 6 decades");
  const ProblemSpec& pr = calc.problem();
  const WeightSpec& w = pr.weight;
  const double p = pr.p;
  const double a1 = pr.alpha1();
  const double a2 = pr.alpha2();

  LemmaReport rep;
  rep.tol = tol > 0.0 ? tol : default_lemma_tolerance(pr);

  detail::Tracker excf_n{{"G_vs_g"}};
  detail::Tracker excf_nn{{"G_prime_vs_G"}};
  detail::Tracker excf2_n{{"G_second_vs_G"}};
  detail::Tracker rat_n{{"J_prime_vs_J"}};
  detail::Tracker rat_nn{{"J_second_vs_J"}};
  detail::Tracker powerlike{{"g_prime_vs_g"}};
  detail::Tracker scaling{{"g_scaling"}};
  detail::Tracker inv_scaling{{"G_inverse_scaling"}};

  std::vector<double> gv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    const double g = w.g(r);
    gv[i] = g;
    const double G = calc.big_G(r);
    const double Gp = calc.big_G_prime(r);
    const double r2Gpp = r * r * calc.big_G_second(r);
    const double J = calc.big_J(r);
    const double Jp = calc.big_J_prime(r);
    const double Jpp = calc.big_J_second(r);

    powerlike.update(sandwich_violation(a1 * g / r, w.g_prime(r), a2 * g / r), r);
    excf_n.update(sandwich_violation(g / a2, G, g / a1), r);
    excf_nn.update(sandwich_violation(a1 * G / r, Gp, a2 * G / r), r);
    excf2_n.update(sandwich_violation(calc.eta1() * G, r2Gpp, calc.eta2() * G, G), r);
    rat_n.update(sandwich_violation((p - a2) * J / r, Jp, (p - a1) * J / r), r);
    rat_nn.update(sandwich_violation(calc.c1() * J / (r * r), Jpp, calc.c2() * J / (r * r), J / (r * r)), r);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      const double lambda = grid[j] / grid[i];
      scaling.update(sandwich_violation(std::pow(lambda, a1) * gv[i], gv[j], std::pow(lambda, a2) * gv[i]), grid[i]);
    }
  }
  // G^{-1} is the expensive query; probe it on every fifth grid point.
  const double lambdas[] = {1.0, 1.5, 2.0, 10.0, 100.0, 1000.0};
  for (std::size_t i = 0; i < grid.size(); i += 5) {
    const double tau = grid[i];
    const double base = calc.big_G_inverse(tau);
    for (double lambda : lambdas) {
      const double v = calc.big_G_inverse(lambda * tau);
      inv_scaling.update(
          sandwich_violation(std::pow(lambda, 1.0 / a2) * base, v, std::pow(lambda, 1.0 / a1) * base), tau);
    }
  }

  for (auto* t : {&excf_n, &excf_nn, &excf2_n, &rat_n, &rat_nn, &powerlike, &scaling, &inv_scaling}) {
    t->rec.pass = t->rec.max_violation <= rep.tol;
    rep.pass = rep.pass && t->rec.pass;
    rep.records.push_back(t->rec);
  }
  return rep;
}

}  // namespace ddw
