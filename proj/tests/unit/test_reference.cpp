#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "entry/errors.hpp"
#include "fixtures.hpp"

namespace entry {
namespace {

using test::pinned;
using test::pinned_reference;
using test::velocity_scale;

TEST(AlphaProfile, Branches) {
  EXPECT_EQ(alpha_profile(15.0), 40.0);
  EXPECT_EQ(alpha_profile(12.0), 40.0);
  EXPECT_NEAR(alpha_profile(3.0), 14.999600000000001, 1e-12);
  EXPECT_NEAR(alpha_profile(std::nextafter(12.0, 0.0)), 39.99350000000001, 1e-9);
  EXPECT_THROW((void)alpha_profile(2.99), DomainError);
}

TEST(Reference, GridIsOrderedAndFine) {
  const auto& pts = pinned_reference()->points();
  ASSERT_GT(pts.size(), 100u);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    ASSERT_LT(pts[i].v, pts[i - 1].v);
    ASSERT_LE((pts[i - 1].v - pts[i].v) * velocity_scale(), 10.0 + 1e-9);
  }
}

TEST(Reference, NodeInvariants) {
  for (const auto& p : pinned_reference()->points()) {
    ASSERT_GT(p.drag, 0.0);
    ASSERT_GT(p.drag_alpha, 0.0);
    ASSERT_LT(p.drag_r, 0.0);
    ASSERT_GE(p.sigma, 0.0);
    ASSERT_LE(p.sigma, 80.0 * kDegToRad + 1e-12);
  }
}

TEST(Reference, AlphaColumnFollowsProfile) {
  const auto plant = nominal_plant(pinned());
  for (const auto& p : pinned_reference()->points()) {
    const double mach = plant.atmosphere.mach(p.v * velocity_scale(), p.altitude_m);
    ASSERT_NEAR(p.alpha_deg, alpha_profile(mach), 1e-9);
  }
}

TEST(Reference, ConsistencyResidualBelowTolerance) {
  EXPECT_LT(reference_consistency_residual(*pinned_reference(), nominal_plant(pinned())), 1e-4);
}

TEST(Reference, RefiningTheGridShrinksTheResidual) {
  Scenario coarse = pinned();
  coarse.planner.grid_spacing_mps = 2.0 * pinned().planner.grid_spacing_mps;
  const auto plant = nominal_plant(pinned());
  const double r_coarse = reference_consistency_residual(build_reference(coarse), plant);
  const double r_fine = reference_consistency_residual(*pinned_reference(), plant);
  EXPECT_GE(r_coarse / r_fine, 3.0);
}

TEST(Reference, ConstantStateIsInconsistent) {
  const auto plant = nominal_plant(pinned());
  const double vs = velocity_scale();
  std::vector<ReferencePoint> pts;
  for (double v = 6000.0; v >= 5000.0; v -= 5.0) {
    pts.push_back(make_reference_point(plant.env.to_radius(50000.0), v / vs, -0.05, 0.7, 40.0, plant));
  }
  ReferenceMetadata meta;
  const ReferenceTrajectory ref(pts, meta);
  EXPECT_GT(reference_consistency_residual(ref, plant), 1e-2);
}

TEST(Reference, ExponentialDragGradient) {
  PlantModel plant;
  plant.atmosphere = AtmosphereModel::nominal(plant.env);
  plant.atmosphere.with_constant_sound_speed(300.0);
  const auto p = make_reference_point(plant.env.to_radius(60000.0), 0.7, -0.001, 0.6, 40.0, plant);
  EXPECT_NEAR(p.drag_r, -(plant.env.earth_radius_m / plant.env.scale_height_m) * p.drag, 1e-6 * std::abs(p.drag_r));
}

TEST(Reference, LookupOnNodeIsExact) {
  const auto ref = pinned_reference();
  for (std::size_t i = 0; i < ref->size(); i += 37) {
    const auto& node = ref->points()[i];
    const auto p = ref->lookup(node.v);
    EXPECT_EQ(p.drag, node.drag);
    EXPECT_EQ(p.r, node.r);
    EXPECT_EQ(p.gamma, node.gamma);
    EXPECT_EQ(p.sigma, node.sigma);
    EXPECT_EQ(p.drag_alpha, node.drag_alpha);
  }
}

TEST(Reference, LookupOutsideGridThrows) {
  const auto ref = pinned_reference();
  EXPECT_THROW((void)ref->lookup(ref->v_max() * 1.001), RangeError);
  EXPECT_THROW((void)ref->lookup(ref->v_min() * 0.999), RangeError);
}

TEST(Reference, LookupDoesNotOvershootDrag) {
  const auto& pts = pinned_reference()->points();
  for (std::size_t i = 0; i + 1 < pts.size(); i += 3) {
    const double lo = std::min(pts[i].drag, pts[i + 1].drag);
    const double hi = std::max(pts[i].drag, pts[i + 1].drag);
    for (double w : {0.25, 0.5, 0.75}) {
      const double d = pinned_reference()->lookup(pts[i].v + w * (pts[i + 1].v - pts[i].v)).drag;
      ASSERT_GE(d, lo - 1e-15);
      ASSERT_LE(d, hi + 1e-15);
    }
  }
}

TEST(Reference, HalfSpacingRegridAgrees) {
  const auto ref = pinned_reference();
  const auto& pts = ref->points();
  std::vector<ReferencePoint> dense;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    dense.push_back(pts[i]);
    dense.push_back(ref->lookup(0.5 * (pts[i].v + pts[i + 1].v)));
  }
  dense.push_back(pts.back());
  const ReferenceTrajectory regrid(dense, ref->metadata());
  // The alpha schedule steps at its branch switch, so nothing converges across it.
  const double guard = 2.0 * ref->metadata().grid_spacing_mps / velocity_scale();
  auto near_breakpoint = [&](double x) {
    for (double b : ref->metadata().breakpoints) {
      if (std::abs(x - b) < guard) return true;
    }
    return false;
  };
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(ref->v_min(), ref->v_max());
  for (int i = 0; i < 1000; ++i) {
    const double x = v(rng);
    if (near_breakpoint(x)) continue;
    const auto a = ref->lookup(x);
    const auto b = regrid.lookup(x);
    ASSERT_NEAR(a.drag, b.drag, 1e-6 * a.drag);
    ASSERT_NEAR(a.r, b.r, 1e-6 * a.r);
    ASSERT_NEAR(a.sigma, b.sigma, 1e-6 * std::max(1e-3, a.sigma));
  }
}

TEST(Reference, CsvRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "entry_reference_roundtrip.csv";
  pinned_reference()->save_csv(path);
  const auto loaded = ReferenceTrajectory::load_csv(path);
  std::filesystem::remove(path);
  ASSERT_EQ(loaded.size(), pinned_reference()->size());
  for (std::size_t i = 0; i < loaded.size(); i += 11) {
    EXPECT_EQ(loaded.points()[i].drag, pinned_reference()->points()[i].drag);
    EXPECT_EQ(loaded.points()[i].lift_alpha, pinned_reference()->points()[i].lift_alpha);
  }
  EXPECT_EQ(loaded.metadata().breakpoints, pinned_reference()->metadata().breakpoints);
}

TEST(Reference, MissingCsvIsADependencyError) {
  EXPECT_THROW((void)ReferenceTrajectory::load_csv("/nonexistent/reference.csv"), DependencyError);
}

TEST(Reference, OpenLoopReplayTracksAltitude) {
  // Replay the recorded controls from a node and compare r after 500 m/s of travel.
  const auto ref = pinned_reference();
  const auto plant = nominal_plant(pinned());
  const double vs = velocity_scale();
  const double dtau = 0.05 / plant.env.time_scale();
  for (double v0 = ref->v_max() * vs; v0 - 500.0 >= ref->v_min() * vs; v0 -= 500.0) {
    const auto start = ref->lookup(v0 / vs);
    LongitudinalState s{start.r, start.v, start.gamma};
    const double v_end = (v0 - 500.0) / vs;
    double worst = 0.0;
    while (s.v > v_end) {
      const auto p = ref->lookup(s.v);
      s = rk4_step(s, {p.alpha_deg, p.sigma}, plant, dtau);
      if (s.v > ref->v_min()) worst = std::max(worst, std::abs(s.r - ref->lookup(s.v).r) * plant.env.earth_radius_m);
    }
    EXPECT_LT(worst, 100.0) << "window starting at " << v0 << " m/s";
  }
}

TEST(Reference, PseudoEquilibriumFlightPathRate) {
  // Flight-path-angle rate on the glide segment, deg/s.
  const auto ref = pinned_reference();
  const auto plant = nominal_plant(pinned());
  const double switch_v = ref->metadata().segment_switch_mps / velocity_scale();
  double worst = 0.0;
  double worst_v = 0.0;
  for (const auto& p : ref->points()) {
    if (p.v > switch_v) continue;
    const auto rate = eom_time_domain({p.r, p.v, p.gamma}, {p.alpha_deg, p.sigma}, plant);
    const double dgdt = std::abs(rate.dgamma) / plant.env.time_scale() * kRadToDeg;
    if (dgdt > worst) {
      worst = dgdt;
      worst_v = p.v * velocity_scale();
    }
  }
  EXPECT_LE(worst, 0.01) << "at V = " << worst_v << " m/s";
}

}  // namespace
}  // namespace entry
