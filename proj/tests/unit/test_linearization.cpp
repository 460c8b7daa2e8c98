#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "entry/errors.hpp"
#include "fixtures.hpp"

namespace entry {
namespace {

using test::pinned;
using test::pinned_reference;
using test::velocity_scale;

PlantModel exponential_plant() {
  PlantModel m;
  m.atmosphere = AtmosphereModel::nominal(m.env);
  m.atmosphere.with_constant_sound_speed(300.0);
  return m;
}

ReferencePoint glide_point(double sigma = 0.7) {
  return make_reference_point(exponential_plant().env.to_radius(55000.0), 0.75, -0.002, sigma, 40.0,
                              exponential_plant());
}

// Largest entry-wise relative mismatch, each entry normalised by the larger of the two values.
double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

TEST(Jacobians, FullMatchesFiniteDifferences) {
  const auto m = exponential_plant();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> h(35000.0, 80000.0), v(0.25, 1.05), g(-0.08, 0.02), s(0.1, 1.3),
      a(20.0, 45.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double r = m.env.to_radius(h(rng));
    const double vv = v(rng);
    const double gam = g(rng);
    const double sig = s(rng);
    const double alpha = a(rng);
    const auto p = make_reference_point(r, vv, gam, sig, alpha, m);
    const auto j = full_jacobians(p);
    auto f = [&](double rr, double gg, double aa) { return eom_velocity_domain(rr, gg, vv, {aa, sig}, m); };
    // Fourth-order central differences.
    auto d5 = [](auto&& g, double x, double h) {
      const auto p1 = g(x + h), m1 = g(x - h), p2 = g(x + 2 * h), m2 = g(x - 2 * h);
      return Eigen::Vector2d((8 * (p1.dr_dv - m1.dr_dv) - (p2.dr_dv - m2.dr_dv)) / (12 * h),
                             (8 * (p1.dgamma_dv - m1.dgamma_dv) - (p2.dgamma_dv - m2.dgamma_dv)) / (12 * h));
    };
    const Eigen::Vector2d col_r = d5([&](double x) { return f(x, gam, alpha); }, r, 1e-6 * r);
    const Eigen::Vector2d col_g = d5([&](double x) { return f(r, x, alpha); }, gam, 1e-5);
    const Eigen::Vector2d fb = d5([&](double x) { return f(r, gam, x); }, alpha, 1e-3);
    Eigen::Matrix2d fd;
    fd << col_r, col_g;
    for (int k = 0; k < 4; ++k) worst = std::max(worst, rel(j.a(k / 2, k % 2), fd(k / 2, k % 2)));
    for (int k = 0; k < 2; ++k) worst = std::max(worst, rel(j.b(k), fb(k)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Jacobians, LevelFlightZerosTheSinGammaEntries) {
  const auto m = exponential_plant();
  const auto p = make_reference_point(m.env.to_radius(60000.0), 0.8, 0.0, 0.6, 40.0, m);
  const auto full = full_jacobians(p);
  const auto simp = simplified_jacobians(p);
  EXPECT_EQ(full.a(0, 0), 0.0);
  EXPECT_EQ(full.b(0), 0.0);
  EXPECT_EQ(simp.a(0, 0), 0.0);
}

TEST(Jacobians, CircularSpeedZerosSimplifiedGammaR) {
  const auto m = exponential_plant();
  const auto p = make_reference_point(m.env.to_radius(70000.0), 1.0, -0.01, 0.6, 40.0, m);
  EXPECT_EQ(simplified_jacobians(p).a(1, 0), 0.0);
}

TEST(Jacobians, SimplifiedEntriesAsPrinted) {
  const auto p = glide_point();
  const auto j = simplified_jacobians(p);
  const double d = p.drag;
  EXPECT_DOUBLE_EQ(j.a(0, 0), p.v * p.drag_r * std::sin(p.gamma) / (d * d));
  EXPECT_DOUBLE_EQ(j.a(0, 1), -p.v / d);
  EXPECT_DOUBLE_EQ(j.a(1, 1), (p.v * p.v - 1.0 + p.lift * std::cos(p.sigma)) / (p.v * d * d));
}

TEST(Jacobians, VanishingDenominatorIsSingular) {
  auto p = glide_point();
  p.gamma = std::asin(-p.drag * p.r * p.r);
  EXPECT_THROW((void)full_jacobians(p), SingularityError);
  EXPECT_THROW((void)simplified_jacobians(p), SingularityError);
}

TEST(Linearize, OutputMatrixAndChi) {
  const auto p = glide_point();
  const auto lin = linearize(p);
  EXPECT_EQ(lin.c(0), p.drag_r);
  EXPECT_EQ(lin.c(1), 0.0);
  EXPECT_EQ(lin.chi, p.drag_alpha);
  auto q = p;
  q.drag_alpha = 0.0;
  EXPECT_THROW((void)linearize(q), SingularityError);
}

TEST(Assumptions, UnitRadiusAndDoubleCircularSpeed) {
  const auto m = exponential_plant();
  auto p = make_reference_point(1.0, std::sqrt(2.0), -0.01, 0.5, 40.0, m);
  const auto res = assumption_residuals(p);
  EXPECT_EQ(res.radius, 0.0);
  EXPECT_NEAR(res.equilibrium, 0.0, 1e-15 * p.drag);
  EXPECT_NEAR(res.flight_path, 0.01, 1e-4);
}

TEST(Assumptions, RadiusSensitivityCancelsOnExponentialAtmosphere) {
  Scenario s = pinned();
  const auto plant = exponential_plant();
  double worst = 0.0;
  for (double v = 7000.0; v >= 2000.0; v -= 250.0) {
    const double vn = v / plant.env.velocity_scale();
    const auto node = pinned_reference()->lookup(vn);
    const auto p = make_reference_point(node.r, node.v, node.gamma, node.sigma, node.alpha_deg, plant);
    worst = std::max(worst, assumption_residuals(p).radius_sensitivity);
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(ExtendedSystem, DriftVanishesAtOrigin) {
  const auto lin = linearize(glide_point());
  const auto d = extended_drift(lin, Eigen::Vector4d::Zero());
  EXPECT_EQ(d.f, Eigen::Vector4d::Zero());
  EXPECT_EQ(d.g, Eigen::Vector4d(0.0, lin.chi, 0.0, 1.0));
}

TEST(ExtendedSystem, ChainStructure) {
  const auto lin = linearize(glide_point());
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n;
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector4d z(n(rng), n(rng), n(rng), n(rng));
    const auto d = extended_drift(lin, z);
    EXPECT_EQ(d.f(0), z(1));
    EXPECT_EQ(d.f(2), z(3));
  }
}

TEST(ExtendedSystem, RelativeDegreeTwo) {
  // Probe the input sensitivity of y' and y'' with two input values.
  const auto lin = linearize(glide_point());
  std::mt19937_64 rng(29);
  std::normal_distribution<double> n;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector4d z(n(rng), n(rng), n(rng), n(rng));
    const auto d = extended_drift(lin, z);
    const Eigen::Vector4d z1 = d.f + d.g * 0.0;
    const Eigen::Vector4d z2 = d.f + d.g * 1.5;
    EXPECT_EQ(z2(0) - z1(0), 0.0);
    EXPECT_NEAR((z2(1) - z1(1)) / 1.5, lin.chi, 1e-14 * std::max(std::abs(d.f(1)), std::abs(lin.chi)));
  }
}

TEST(ExtendedSystem, MatchesStateSpaceSimulation) {
  // y = C e + chi du with e' = A e + B du, so y'' from the raw model equals the extended drift.
  const auto lin = linearize(glide_point());
  const Eigen::Matrix2d& a = lin.simplified.a;
  const Eigen::Vector2d& b = lin.simplified.b;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d e(n(rng), n(rng));
    const double du = n(rng), du1 = n(rng), du2 = n(rng);
    const double y = lin.c.dot(e) + lin.chi * du;
    const Eigen::Vector2d e1 = a * e + b * du;
    const double y1 = lin.c.dot(e1) + lin.chi * du1;
    const Eigen::Vector2d e2 = a * e1 + b * du1;
    const double y2 = lin.c.dot(e2) + lin.chi * du2;
    const auto d = extended_drift(lin, Eigen::Vector4d(y, y1, du, du1));
    EXPECT_NEAR(d.f(1) + d.g(1) * du2, y2, 1e-9 * std::max(1.0, std::abs(y2)));
  }
}

TEST(NormalForm, Examples) {
  const double chi = 0.37;
  auto s = to_normal_form(Eigen::Vector4d(0.3, 0.0, -1.2, 0.8), chi);
  EXPECT_EQ(s.eta(1), 0.8);
  s = to_normal_form(Eigen::Vector4d(1.0, chi, 0.0, 1.0), chi);
  EXPECT_EQ(s.eta(1), 0.0);
  EXPECT_EQ(s.xi(0), 1.0);
  EXPECT_THROW((void)to_normal_form(Eigen::Vector4d::Ones(), 0.0), SingularityError);
  EXPECT_THROW((void)from_normal_form(s, 0.0), SingularityError);
}

TEST(NormalForm, RoundTrip) {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> c(0.01, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector4d z(n(rng), n(rng), n(rng), n(rng));
    const double chi = c(rng);
    worst = std::max(worst, (from_normal_form(to_normal_form(z, chi), chi) - z).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(ZeroDynamics, FortyDegreeBracket) {
  const auto p = glide_point();
  // Independent evaluation of the aerodynamic cubic fits at 40 deg.
  EXPECT_NEAR(p.dcl_dalpha / p.cl - p.dcd_dalpha / p.cd, -0.02992414238343917, 1e-12);
  const auto zc = zero_dynamics_coeffs(p, exponential_plant().env);
  EXPECT_LT(zc.gamma1, 0.0);
}

TEST(ZeroDynamics, Gamma2VanishesAtCircularSpeedWithZeroVerticalLift) {
  const auto m = exponential_plant();
  const auto p = make_reference_point(m.env.to_radius(70000.0), 1.0, -0.01, kPi / 2.0, 40.0, m);
  EXPECT_NEAR(zero_dynamics_coeffs(p, m.env).gamma2, 0.0, 1e-12);
}

TEST(ZeroDynamics, MissingAlphaSensitivityIsSingular) {
  auto p = glide_point();
  p.drag_alpha = 0.0;
  EXPECT_THROW((void)zero_dynamics_coeffs(p, exponential_plant().env), SingularityError);
}

TEST(ZeroDynamics, ClosedFormMatchesNormalFormRoute) {
  const auto ref = pinned_reference();
  const auto& env = pinned().env;
  const std::size_t stride = ref->size() / 50;
  int checked = 0;
  for (std::size_t i = 0; i < ref->size() && checked < 50; i += stride) {
    const auto& p = ref->points()[i];
    const auto closed = zero_dynamics_coeffs(p, env);
    const auto routed = zero_dynamics_from_normal_form(linearize(p));
    EXPECT_LT(rel(closed.gamma1, routed.gamma1), 1e-9) << "V = " << p.v * velocity_scale();
    EXPECT_LT(rel(closed.gamma2, routed.gamma2), 1e-9) << "V = " << p.v * velocity_scale();
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}

TEST(Classifier, Examples) {
  auto rep = classify_flight_condition(-4.0, -2.0);
  EXPECT_EQ(rep.condition, FlightCondition::UnstableOscillatory);
  EXPECT_NEAR(rep.eigenvalues[0].real(), -1.0, 1e-15);
  EXPECT_NEAR(rep.eigenvalues[0].imag(), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(rep.eigenvalues[1].imag(), -std::sqrt(3.0), 1e-15);
  EXPECT_EQ(to_string(rep.condition), "FC1-unstable-oscillatory");

  rep = classify_flight_condition(3.0, 0.0);
  EXPECT_EQ(rep.condition, FlightCondition::UnstableSaddle);
  EXPECT_NEAR(rep.eigenvalues[0].real(), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(rep.eigenvalues[1].real(), -std::sqrt(3.0), 1e-15);
  EXPECT_EQ(to_string(rep.condition), "FC2-unstable-saddle");

  rep = classify_flight_condition(-4.0, 2.0);
  EXPECT_EQ(rep.condition, FlightCondition::Stable);
  EXPECT_NEAR(rep.eigenvalues[0].real(), 1.0, 1e-15);
  EXPECT_EQ(to_string(rep.condition), "stable");
}

TEST(Classifier, MatchesNumericEigensolve) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const double g1 = u(rng);
    const double g2 = u(rng);
    const auto rep = classify_flight_condition(g1, g2);
    Eigen::Matrix2d m;
    m << 0.0, 1.0, g1, g2;
    auto ev = Eigen::EigenSolver<Eigen::Matrix2d>(m).eigenvalues();
    std::array<std::complex<double>, 2> num{ev(0), ev(1)};
    std::sort(num.begin(), num.end(), [](auto a, auto b) {
      return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    for (int k = 0; k < 2; ++k) {
      ASSERT_NEAR(rep.eigenvalues[k].real(), num[k].real(), 1e-10) << g1 << " " << g2;
      ASSERT_NEAR(rep.eigenvalues[k].imag(), num[k].imag(), 1e-10) << g1 << " " << g2;
    }
    const bool lhp_pair = num[0].imag() != 0.0 && num[0].real() < 0.0;
    const bool saddle = num[0].imag() == 0.0 && num[0].real() > 0.0 && num[1].real() < 0.0;
    if (rep.condition == FlightCondition::UnstableOscillatory && g2 * g2 + 4 * g1 < 0.0) ASSERT_TRUE(lhp_pair);
    if (rep.condition == FlightCondition::UnstableSaddle) ASSERT_TRUE(saddle);
  }
}

TEST(Classifier, GlideRegionIsNeverStable) {
  const auto ref = pinned_reference();
  const auto& env = pinned().env;
  const double switch_v = ref->metadata().segment_switch_mps / velocity_scale();
  int checked = 0;
  for (const auto& p : ref->points()) {
    if (p.alpha_deg != 40.0 || p.v > switch_v || std::cos(p.sigma) <= 0.0) continue;
    const auto rep = analyze_zero_dynamics(p, env);
    if (std::abs(rep.gamma2) <= 1e-9) continue;
    ASSERT_NE(rep.condition, FlightCondition::Stable) << "V = " << p.v * velocity_scale();
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(Classifier, IndicatorTerms) {
  const auto p = glide_point();
  const auto rep = analyze_zero_dynamics(p, exponential_plant().env);
  EXPECT_DOUBLE_EQ(rep.drag_polar_slope_minus_lod, p.dcl_dalpha / p.dcd_dalpha - p.cl / p.cd);
  const double rate = p.v * p.v - 1.0 + p.lift * std::cos(p.sigma);
  EXPECT_EQ(rep.fpa_rate_sign, rate > 0.0 ? 1 : -1);
}

}  // namespace
}  // namespace entry
