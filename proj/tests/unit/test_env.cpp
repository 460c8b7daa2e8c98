#include <cmath>

#include <gtest/gtest.h>

#include "entry/env.hpp"
#include "entry/errors.hpp"

namespace entry {
namespace {

const EnvironmentConstants kEnv{};

TEST(Environment, ScalesAreExact) {
  EXPECT_DOUBLE_EQ(kEnv.velocity_scale() * kEnv.velocity_scale(), kEnv.g0_mps2 * kEnv.earth_radius_m);
  EXPECT_DOUBLE_EQ(kEnv.time_scale() * kEnv.time_scale(), kEnv.earth_radius_m / kEnv.g0_mps2);
  EXPECT_NO_THROW(kEnv.validate());
  EnvironmentConstants bad;
  bad.scale_height_m = 0.0;
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Atmosphere, ExponentialAnchors) {
  const auto atm = AtmosphereModel::nominal(kEnv);
  EXPECT_DOUBLE_EQ(atm.density(0.0), 1.225);
  EXPECT_NEAR(atm.density(7200.0), 0.4506523154350169, 1e-15);
}

TEST(Atmosphere, LogDensitySlopeIsMinusOneOverH) {
  const auto atm = AtmosphereModel::nominal(kEnv);
  for (double h = 0.0; h < 140000.0; h += 9700.0) {
    const double slope = (std::log(atm.density(h + 1000.0)) - std::log(atm.density(h))) / 1000.0;
    EXPECT_NEAR(slope * 7200.0, -1.0, 1e-9);
    EXPECT_LT(atm.density(h + 1000.0), atm.density(h));
  }
}

TEST(Atmosphere, DispersedBiasScalesNominal) {
  AtmosphereDispersion d;
  d.bias = 0.1;
  const auto atm = AtmosphereModel::dispersed(kEnv, d);
  EXPECT_NEAR(atm.density(30000.0), 0.020891442724665053, 1e-15);
}

TEST(Atmosphere, DispersedRatioIsClamped) {
  AtmosphereDispersion d;
  d.bias = 0.9;
  const auto high = AtmosphereModel::dispersed(kEnv, d);
  const auto nominal = AtmosphereModel::nominal(kEnv);
  EXPECT_NEAR(high.density(40000.0) / nominal.density(40000.0), 1.5, 1e-12);
  d.bias = -0.2;
  d.wave_amplitude = 0.6;
  const auto wavy = AtmosphereModel::dispersed(kEnv, d);
  for (double h = 0.0; h <= 150000.0; h += 250.0) {
    const double ratio = wavy.density(h) / nominal.density(h);
    EXPECT_GE(ratio, 0.5 - 1e-12);
    EXPECT_LE(ratio, 1.5 + 1e-12);
  }
}

TEST(Atmosphere, AltitudeOutsideRangeThrows) {
  const auto atm = AtmosphereModel::nominal(kEnv);
  EXPECT_THROW((void)atm.density(-1.0), DomainError);
  EXPECT_THROW((void)atm.density(150001.0), DomainError);
}

TEST(Atmosphere, StandardTableMatchesPublishedValues) {
  const auto table = StandardAtmosphereTable::bundled();
  EXPECT_NEAR(table->density(0.0), 1.2250, 1e-4);
  // Geometric-altitude entries of the published tables.
  EXPECT_NEAR(table->density(11000.0) / 3.6480e-1, 1.0, 1e-3);
  EXPECT_NEAR(table->density(30000.0) / 1.8410e-2, 1.0, 1e-3);
  EXPECT_NEAR(table->speed_of_sound(0.0), 340.294, 1e-2);
  const auto atm = AtmosphereModel::standard(kEnv, table);
  for (double h = 0.0; h <= 150000.0; h += 500.0) EXPECT_GT(atm.density(h), 0.0);
}

TEST(Atmosphere, MachWithConstantSoundSpeed) {
  auto atm = AtmosphereModel::nominal(kEnv);
  atm.with_constant_sound_speed(300.0);
  EXPECT_EQ(atm.mach(0.0, 50000.0), 0.0);
  EXPECT_DOUBLE_EQ(atm.mach(3600.0, 50000.0), 12.0);
  EXPECT_DOUBLE_EQ(atm.mach(900.0, 10000.0), 3.0);
}

TEST(Aerodynamics, ConstantTermsAtZeroAlpha) {
  const auto a = aero_coefficients(0.0, VehicleModel{});
  EXPECT_DOUBLE_EQ(a.cl, 0.12457);
  EXPECT_DOUBLE_EQ(a.cd, 0.32083);
}

TEST(Aerodynamics, FortyDegreeValues) {
  // Independent evaluation of the cubic fits and their derivatives at 40 deg.
  const auto a = aero_coefficients(40.0, VehicleModel{});
  EXPECT_NEAR(a.cl, 1.7512228000000003, 1e-12);
  EXPECT_NEAR(a.cd, 1.6005100639999998, 1e-12);
  EXPECT_NEAR(a.dcl_dalpha, 0.04713895999999995, 1e-12);
  EXPECT_NEAR(a.dcd_dalpha, 0.0909760048, 1e-12);
  EXPECT_NEAR(a.cl / a.cd, 1.0941654409990642, 1e-12);
}

TEST(Aerodynamics, DerivativesMatchFiniteDifferences) {
  const VehicleModel v;
  for (int i = 0; i < 20; ++i) {
    const double alpha = 1.0 + 48.0 * i / 19.0;
    const double h = 1e-4;
    const auto a = aero_coefficients(alpha, v);
    const auto p = aero_coefficients(alpha + h, v);
    const auto m = aero_coefficients(alpha - h, v);
    EXPECT_NEAR((p.cl - m.cl) / (2 * h), a.dcl_dalpha, 1e-8 * std::max(1.0, std::abs(a.dcl_dalpha)));
    EXPECT_NEAR((p.cd - m.cd) / (2 * h), a.dcd_dalpha, 1e-8 * std::max(1.0, std::abs(a.dcd_dalpha)));
  }
}

TEST(Aerodynamics, DragPositiveOverAdmissibleRange) {
  for (double alpha = 0.0; alpha <= 50.0; alpha += 0.5) EXPECT_GT(aero_coefficients(alpha, VehicleModel{}).cd, 0.0);
}

TEST(Aerodynamics, OutsideRangeThrows) {
  EXPECT_THROW((void)aero_coefficients(-0.1, VehicleModel{}), DomainError);
  EXPECT_THROW((void)aero_coefficients(50.1, VehicleModel{}), DomainError);
}

TEST(LiftDrag, ZeroAboveAtmosphere) {
  const auto atm = AtmosphereModel::nominal(kEnv);
  const auto ld = lift_drag_accels(kEnv.to_radius(160000.0), 1.0, 40.0, kEnv, VehicleModel{}, atm);
  EXPECT_EQ(ld.lift, 0.0);
  EXPECT_EQ(ld.drag, 0.0);
  const auto vac = lift_drag_accels(kEnv.to_radius(60000.0), 1.0, 40.0, kEnv, VehicleModel{}, AtmosphereModel::vacuum(kEnv));
  EXPECT_EQ(vac.drag, 0.0);
}

TEST(LiftDrag, LinearInDensity) {
  const auto aero = aero_coefficients(35.0, VehicleModel{});
  const auto one = lift_drag_from_density(1e-4, 0.8, aero, kEnv, VehicleModel{});
  const auto two = lift_drag_from_density(2e-4, 0.8, aero, kEnv, VehicleModel{});
  EXPECT_DOUBLE_EQ(two.lift, 2.0 * one.lift);
  EXPECT_DOUBLE_EQ(two.drag, 2.0 * one.drag);
}

TEST(LiftDrag, RatioEqualsCoefficientRatio) {
  const auto atm = AtmosphereModel::nominal(kEnv);
  for (double alpha : {5.0, 20.0, 40.0, 48.0}) {
    const auto ld = lift_drag_accels(kEnv.to_radius(55000.0), 0.9, alpha, kEnv, VehicleModel{}, atm);
    const auto a = aero_coefficients(alpha, VehicleModel{});
    EXPECT_NEAR(ld.lift / ld.drag, a.cl / a.cd, 1e-14);
  }
}

TEST(LiftDrag, HomogeneousOfDegreeTwoInVelocity) {
  const auto atm = AtmosphereModel::nominal(kEnv);
  const double r = kEnv.to_radius(60000.0);
  const auto base = lift_drag_accels(r, 0.5, 40.0, kEnv, VehicleModel{}, atm);
  const auto scaled = lift_drag_accels(r, 0.5 * 1.7, 40.0, kEnv, VehicleModel{}, atm);
  EXPECT_NEAR(scaled.lift / base.lift, 1.7 * 1.7, 1e-12);
  EXPECT_NEAR(scaled.drag / base.drag, 1.7 * 1.7, 1e-12);
}

TEST(LiftDrag, MatchesDimensionalFormula) {
  // D = rho V^2 S C_D / (2 m g0) with V in m/s.
  const auto atm = AtmosphereModel::nominal(kEnv);
  const double h = 50000.0;
  const double v = 0.7;
  const auto ld = lift_drag_accels(kEnv.to_radius(h), v, 40.0, kEnv, VehicleModel{}, atm);
  const double vd = v * std::sqrt(9.80665 * 6.378137e6);
  const double rho = 1.225 * std::exp(-h / 7200.0);
  EXPECT_NEAR(ld.drag, rho * vd * vd * 5.0 * 1.6005100639999998 / (2.0 * 1000.0 * 9.80665),
              1e-12 * ld.drag);
}

}  // namespace
}  // namespace entry
