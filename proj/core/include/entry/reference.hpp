#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "entry/dynamics.hpp"
#include "entry/env.hpp"
#include "entry/interpolation.hpp"

namespace entry {

/// One node of the reference trajectory. Accelerations in g0 units, partials
/// per nondimensional radius or per deg.
struct ReferencePoint {
  double v = 0.0;          ///< nondimensional
  double r = 1.0;          ///< nondimensional
  double gamma = 0.0;      ///< rad
  double sigma = 0.0;      ///< bank magnitude, rad
  double alpha_deg = 0.0;
  double drag = 0.0;
  double lift = 0.0;
  double drag_r = 0.0;
  double lift_r = 0.0;
  double drag_alpha = 0.0;
  double lift_alpha = 0.0;
  double cl = 0.0;
  double cd = 0.0;
  double dcl_dalpha = 0.0;
  double dcd_dalpha = 0.0;
  double altitude_m = 0.0;
  double mach = 0.0;
};

struct ReferenceMetadata {
  double heat_rate_constant = 0.0;    ///< k_q, SI
  double heat_rate_limit = 0.0;       ///< W/m^2
  double segment_switch_mps = 0.0;    ///< heat-rate / equilibrium-glide crossing
  double planning_bank_deg = 0.0;
  double grid_spacing_mps = 5.0;
  /// Nondimensional velocities where the profile is not smooth (alpha branch switch).
  std::vector<double> breakpoints;
};

/// Velocity-gridded reference, ordered by decreasing V.
class ReferenceTrajectory {
 public:
  ReferenceTrajectory() = default;
  ReferenceTrajectory(std::vector<ReferencePoint> points, ReferenceMetadata metadata);

  [[nodiscard]] const std::vector<ReferencePoint>& points() const { return points_; }
  [[nodiscard]] const ReferenceMetadata& metadata() const { return metadata_; }
  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] double v_max() const { return points_.front().v; }
  [[nodiscard]] double v_min() const { return points_.back().v; }

  /// Monotone cubic interpolation of every field at V. Throws RangeError outside the grid.
  [[nodiscard]] ReferencePoint lookup(double v) const;

  void save_csv(const std::filesystem::path& path) const;
  static ReferenceTrajectory load_csv(const std::filesystem::path& path);

 private:
  std::vector<ReferencePoint> points_;
  ReferenceMetadata metadata_;
  std::vector<MonotoneCubic> fields_;
};

/// Nominal angle-of-attack schedule in Mach. Throws DomainError for M < 3.
[[nodiscard]] double alpha_profile(double mach);

struct EntryConditions {
  double altitude_m = 80000.0;
  double velocity_mps = 7450.0;
  double fpa_deg = -1.0;
};

struct PlannerConfig {
  EntryConditions entry{};
  double heat_rate_constant = 1.74153e-4;
  /// W/m^2; when <= 0 it is derived so the segments touch at `segment_switch_mps`.
  double heat_rate_limit = 0.0;
  double segment_switch_mps = 6500.0;
  double planning_bank_deg = 40.0;
  double terminal_velocity_mps = 1300.0;
  double grid_spacing_mps = 5.0;
  double tracker_freq_radps = 0.02;
  double tracker_damping = 0.9;
  /// Half width of the smooth hand-over between the two segments.
  double blend_half_width_mps = 150.0;
  /// Velocity scale over which the target decays from the entry altitude onto the plan.
  double capture_scale_mps = 600.0;
  /// Bank flown open loop through the entry pull-up.
  double entry_bank_deg = 60.0;
  /// Velocity scale of the Gaussian hand-over from the entry bank to the tracker.
  double hold_scale_mps = 400.0;
};

/// Flies the nominal plant on the two-segment plan and records the grid.
/// Throws PlanningError when the segments do not cross or the bank is infeasible.
[[nodiscard]] ReferenceTrajectory generate_reference(const PlannerConfig& config, const PlantModel& model);

/// Analytic reference partials at (r, V, alpha) for a given plant model.
[[nodiscard]] ReferencePoint make_reference_point(double r, double v, double gamma, double sigma, double alpha_deg,
                                                  const PlantModel& model);

/// Max over interior nodes of |central-difference x' - f(x, V, u)|. Nodes whose
/// stencil straddles a metadata breakpoint are skipped.
[[nodiscard]] double reference_consistency_residual(const ReferenceTrajectory& ref, const PlantModel& model);

/// Heat rate k_q sqrt(rho) V^3, W/m^2.
[[nodiscard]] double heat_rate(double density, double v_mps, double k_q);

}  // namespace entry
