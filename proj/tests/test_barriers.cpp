#include <gtest/gtest.h>

#include <cmath>

#include "ddw/barriers.hpp"

using namespace ddw;

namespace {

ProblemSpec base() { return make_problem(3, 2.0, 2.0, WeightSpec::power(1.0)); }

BarrierParams hand_super() {
  BarrierParams bp;
  bp.kind = BarrierKind::Super;
  bp.C_star = 4.0;
  bp.Gamma = 4.0;
  bp.log_t0 = 2.0;
  bp.r0 = 1.0;
  bp.nu0 = 0.5;
  return bp;
}

void expect_valid(const BarrierParams& bp, const EnvelopeCalculus& calc) {
  const auto v = validate_barrier(bp, calc);
  for (const auto& c : v.checks) EXPECT_TRUE(c.holds) << c.name << " lhs=" << c.lhs << " rhs=" << c.rhs;
  EXPECT_TRUE(v.pass);
}

}  // namespace

TEST(Barriers, SuperMuConstants) {
  const auto k = super_mu_constants(base());
  EXPECT_DOUBLE_EQ(k.mu1, 1.0);
  EXPECT_DOUBLE_EQ(k.mu2, 1.0);
  EXPECT_DOUBLE_EQ(k.mu3, 0.0);
  EXPECT_DOUBLE_EQ(k.d, 0.0);
  const auto k15 = super_mu_constants(make_problem(3, 2.0, 2.0, WeightSpec::power(1.5)));
  EXPECT_DOUBLE_EQ(k15.mu1, 0.5);
  EXPECT_DOUBLE_EQ(k15.mu2, 0.25);
  // p = 2.5, m = 1.5 (q = 1): J'' >= 0 so d = 0 and mu3 = (p-2)(p-alpha1)^p.
  const auto k25 = super_mu_constants(make_problem(3, 2.5, 1.5, WeightSpec::power(1.0)));
  EXPECT_NEAR(k25.mu3, 0.5 * std::pow(1.5, 2.5), 1e-14);
  EXPECT_NEAR(k25.mu1, std::pow(1.5, 1.5), 1e-14);
  EXPECT_NEAR(k25.mu2, std::pow(1.5, 2.5), 1e-14);
}

TEST(Barriers, SubMuConstants) {
  const auto k = sub_mu_constants(base());
  EXPECT_DOUBLE_EQ(k.mu1t, 1.0);
  EXPECT_DOUBLE_EQ(k.mu2t, 1.0);
  EXPECT_DOUBLE_EQ(k.mu3t, 0.0);
  EXPECT_DOUBLE_EQ(k.dt, 0.0);
  EXPECT_DOUBLE_EQ(k.mu4t, 0.5);
  // p = 1.5 < 2: the (p-2)_- (p - alpha1)^p term enters mu3t.
  const auto pr = make_problem(3, 1.5, 2.0, WeightSpec::power(1.0));
  const auto k15 = sub_mu_constants(pr);
  const double q = pr.q();
  EXPECT_GE(k15.mu3t, 0.5 * std::pow(0.5, 1.5) / std::pow(q, -0.5) * (1 - 1e-14));
  EXPECT_GT(k15.mu4t, 0.0);
}

TEST(Barriers, SelectSuperHandValues) {
  const auto pr = base();
  EnvelopeCalculus calc(pr);
  const auto bp = select_super(pr, calc);
  EXPECT_NEAR(bp.r0, 1.0, 1e-14);
  EXPECT_NEAR(bp.nu0, 0.5, 1e-14);
  EXPECT_NEAR(bp.C_star, 4.0 * 1.05, 1e-12);
  // Gamma = slack * mu2 alpha2 C*^q / (p - alpha2) with C* already enlarged.
  EXPECT_NEAR(bp.Gamma, 4.0 * 1.05 * 1.05, 1e-12);
  EXPECT_NEAR(bp.log_t0, 2.0 * 1.05, 1e-9);
  EXPECT_GE(bp.Gamma / 4.0, 1.05 - 1e-12);
  EXPECT_LE(bp.Gamma / 4.0, 1.05 * 1.05 + 1e-12);
  expect_valid(bp, calc);
}

TEST(Barriers, SelectSuperPower15Threshold) {
  const auto pr = make_problem(3, 2.0, 2.0, WeightSpec::power(1.5));
  EnvelopeCalculus calc(pr);
  const auto bp = select_super(pr, calc);
  EXPECT_NEAR(calc.big_G(bp.r0), 1.05 * 8.0 / 9.0, 1e-12);
  expect_valid(bp, calc);
}

TEST(Barriers, SelectSubHandValues) {
  const auto pr = base();
  EnvelopeCalculus calc(pr);
  const auto bp = select_sub(pr, calc, 1.0);
  EXPECT_NEAR(bp.log_t0, 16.0 * 1.05, 1e-12);
  EXPECT_LT(calc.big_G(bp.r0), 1.0);
  EXPECT_NEAR(bp.Gamma, 2.0 * calc.big_G(bp.r0) / bp.log_t0, 1e-14);
  EXPECT_LT(bp.Gamma, 1.0 / 8.0);
  // Independent arithmetic: G(r0) = 0.95, C*^{-1} = 2 (3 + G0) / G0.
  EXPECT_NEAR(bp.r0, 0.95, 1e-14);
  EXPECT_NEAR(1.0 / bp.C_star, 2.0 * 3.95 / 0.95, 1e-12);
  EXPECT_NEAR(bp.lambda, 1.0, 0.0);
  expect_valid(bp, calc);
  EXPECT_THROW(select_sub(pr, calc, 0.0), DomainError);
}

TEST(Barriers, SelectionValidatesAcrossProblems) {
  const ProblemSpec problems[] = {
      make_problem(3, 2.0, 2.0, WeightSpec::power(1.5)),         make_problem(3, 2.0, 2.0, WeightSpec::zygmund(0.5, 0.5, 2.0)),
      make_problem(3, 2.5, 1.5, WeightSpec::power(1.0)),         make_problem(4, 1.5, 2.0, WeightSpec::power(1.0)),
      make_problem(3, 2.0, 3.0, WeightSpec::power(0.5)),
  };
  for (const auto& pr : problems) {
    EnvelopeCalculus calc(pr);
    SCOPED_TRACE("p=" + std::to_string(pr.p) + " m=" + std::to_string(pr.m) + " a2=" + std::to_string(pr.alpha2()));
    const auto sup = select_super(pr, calc);
    expect_valid(sup, calc);
    EXPECT_GE(sup.nu0, 1.0 - pr.alpha2() / pr.p - 1e-12);
    EXPECT_LE(sup.nu0, 1.0 - pr.alpha1() / pr.p + 1e-12);
    const auto sub = select_sub(pr, calc, 1.0);
    expect_valid(sub, calc);
  }
}

TEST(Barriers, HandParamsValue) {
  EnvelopeCalculus calc(base());
  const auto bp = hand_super();
  // 4 e^{-2} (E(8) - I(0)) = 4 e^{-2} (8 - 1/2)
  EXPECT_NEAR(eval_barrier(bp, calc, 0.0, 0.0), 30.0 * std::exp(-2.0), 1e-13);
  EXPECT_NEAR(eval_barrier(bp, calc, 0.0, 0.0), 4.0601, 1e-4);
  EXPECT_NEAR(barrier_support_radius(bp, calc, 5.0), 4.0 * std::log(5.0 + std::exp(2.0)), 1e-12);
  EXPECT_EQ(eval_barrier(bp, calc, barrier_support_radius(bp, calc, 5.0), 5.0), 0.0);
  EXPECT_THROW(eval_barrier(bp, calc, -1.0, 0.0), DomainError);
  EXPECT_THROW(bp.log_shifted_time(-1.0), DomainError);
}

TEST(Barriers, LogShiftedTimeStable) {
  BarrierParams bp = hand_super();
  bp.log_t0 = 800.0;  // t0 overflows a double
  EXPECT_DOUBLE_EQ(bp.log_shifted_time(0.0), 800.0);
  EXPECT_DOUBLE_EQ(bp.log_shifted_time(1e10), 800.0);
  bp.log_t0 = 2.0;
  EXPECT_NEAR(bp.log_shifted_time(3.0), std::log(3.0 + std::exp(2.0)), 1e-15);
}

TEST(Barriers, ContinuityAndC1AtMatchingRadius) {
  const auto pr = make_problem(3, 2.0, 2.0, WeightSpec::zygmund(0.5, 0.5, 2.0));
  EnvelopeCalculus calc(pr);
  for (const auto& bp : {select_super(pr, calc), select_sub(pr, calc, 1.0)}) {
    BarrierEvaluator ev(bp, calc);
    const auto s = ev.slice(3.0);
    const double r0 = bp.r0;
    const double h = 1e-6 * r0;
    EXPECT_NEAR(ev.inner_I(r0), ev.J0_root(), 1e-13 * ev.J0_root());
    const double left = (ev.value(s, r0) - ev.value(s, r0 - h)) / h;
    const double right = (ev.value(s, r0 + h) - ev.value(s, r0)) / h;
    EXPECT_NEAR(left / right, 1.0, 1e-5);
  }
}

TEST(Barriers, NonincreasingInRadiusAndSupDecays) {
  const auto pr = base();
  EnvelopeCalculus calc(pr);
  const auto bp = select_super(pr, calc);
  BarrierEvaluator ev(bp, calc);
  double prev_sup = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    const double t = k == 0 ? 0.0 : std::pow(10.0, -2.0 + 8.0 * k / 99.0);
    const auto s = ev.slice(t);
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) {
      const double r = 1.05 * s.support_radius * i / 1000.0;
      const double v = ev.value(s, r);
      EXPECT_LE(v - prev, 1e-12);
      prev = v;
    }
    const double sup = ev.value(s, 0.0);
    EXPECT_LE(sup, prev_sup * (1 + 1e-12));
    prev_sup = sup;
  }
}

TEST(Barriers, SupportRadiusBounds) {
  const auto pr = make_problem(3, 2.0, 2.0, WeightSpec::zygmund(0.5, 0.5, 2.0));
  EnvelopeCalculus calc(pr);
  const auto bp = select_super(pr, calc);
  const auto b = support_radius_bounds(bp, calc);
  EXPECT_LT(b.gamma1, b.gamma2);
  const double t0 = bp.t0();
  for (int k = 0; k <= 60; ++k) {
    const double t = t0 * t0 * std::pow(10.0, 0.1 * k);
    const double ratio = barrier_support_radius(bp, calc, t) / calc.weight().g_inverse(std::log(t));
    EXPECT_GE(ratio, b.gamma1 * (1 - 1e-9));
    EXPECT_LE(ratio, b.gamma2 * (1 + 1e-9));
  }
  EXPECT_GE(barrier_support_radius(bp, calc, 0.0), bp.r0);
}

TEST(Barriers, FitSuperAbove) {
  const auto pr = base();
  EnvelopeCalculus calc(pr);
  const auto plain = select_super(pr, calc);
  const auto tiny = fit_super_above(pr, calc, 1e-12, 1e-3);
  EXPECT_DOUBLE_EQ(tiny.Gamma, plain.Gamma);
  EXPECT_DOUBLE_EQ(tiny.C_star, plain.C_star);
  for (auto [M, L] : {std::pair{1.0, 1.0}, std::pair{50.0, 3.0}, std::pair{0.2, 10.0}}) {
    const auto bp = fit_super_above(pr, calc, M, L);
    EXPECT_GE(bp.r0, L * (1 - 1e-12));
    expect_valid(bp, calc);
    BarrierEvaluator ev(bp, calc);
    const auto s = ev.slice(0.0);
    for (int i = 0; i <= 1000; ++i) EXPECT_GE(ev.value(s, L * i / 1000.0), M) << M << " " << L;
  }
  const auto one = fit_super_above(pr, calc, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(one.Gamma, plain.Gamma);  // Gamma >= (e^2/4 + 1)/2 is slack here
  EXPECT_THROW(fit_super_above(pr, calc, 0.0, 1.0), DomainError);
}

TEST(Barriers, FitSubBelow) {
  const auto pr = base();
  EnvelopeCalculus calc(pr);
  for (auto [eps, ell] : {std::pair{0.75, 0.5}, std::pair{1e-3, 2.0}, std::pair{10.0, 0.05}}) {
    const auto bp = fit_sub_below(pr, calc, eps, ell);
    expect_valid(bp, calc);
    const double r1 = initial_support_radius(bp, calc);
    EXPECT_LE(r1, ell);
    EXPECT_NEAR(calc.big_G(r1), bp.Gamma * bp.log_t0, 1e-12 * calc.big_G(r1));
    EXPECT_LE(r1, 2.0 * bp.r0 * (1 + 1e-12));
    BarrierEvaluator ev(bp, calc);
    const auto s = ev.slice(0.0);
    double mx = 0.0;
    for (int i = 0; i <= 1000; ++i) mx = std::max(mx, ev.value(s, 1.2 * ell * i / 1000.0));
    EXPECT_LE(mx, eps);
    EXPECT_DOUBLE_EQ(mx, ev.value(s, 0.0));
    EXPECT_EQ(ev.value(s, ell * 1.0000001), 0.0);
  }
  EXPECT_THROW(fit_sub_below(pr, calc, -1.0, 1.0), DomainError);
}

TEST(Barriers, ValidatorRejectsCorruptedParams) {
  const auto pr = base();
  EnvelopeCalculus calc(pr);
  auto bp = select_super(pr, calc);
  bp.C_star *= 1e-2;
  EXPECT_FALSE(validate_barrier(bp, calc).pass);
  auto sub = select_sub(pr, calc, 1.0);
  sub.log_t0 = 2.0;
  EXPECT_FALSE(validate_barrier(sub, calc).pass);
  auto nu = select_super(pr, calc);
  nu.nu0 = 0.9;
  EXPECT_FALSE(validate_barrier(nu, calc).pass);
}

TEST(Barriers, SlackFactorsRespected) {
  const auto pr = base();
  EnvelopeCalculus calc(pr);
  const auto bp = select_super(pr, calc, SlackFactors{1.2, 0.8});
  EXPECT_NEAR(bp.C_star, 4.8, 1e-12);
  EXPECT_NEAR(bp.log_t0, 2.4, 1e-9);
  expect_valid(bp, calc);
}
