#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "entry/env.hpp"

namespace entry {

/// Nondimensional longitudinal state: r in Earth radii, V in sqrt(g0 Re), gamma in rad.
struct LongitudinalState {
  double r = 1.0;
  double v = 1.0;
  double gamma = 0.0;
};

struct ControlInput {
  double alpha_deg = 40.0;
  double sigma_rad = 0.0;
};

struct StateRate {
  double dr = 0.0;
  double dv = 0.0;
  double dgamma = 0.0;
};

/// Constant latitude/azimuth used when the rotation terms are switched on.
struct RotationTerms {
  bool enabled = false;
  double latitude_rad = 0.0;
  double azimuth_rad = 0.0;
};

/// Everything the equations of motion need about the world and the vehicle.
struct PlantModel {
  EnvironmentConstants env{};
  VehicleModel vehicle{};
  AtmosphereModel atmosphere = AtmosphereModel::nominal(EnvironmentConstants{});
  RotationTerms rotation{};

  /// Below this nondimensional speed the flight-path equation is abandoned.
  double min_velocity = 0.01;
};

/// Time-domain rates (d/dtau). Throws TerminationError when V is below the model threshold.
[[nodiscard]] StateRate eom_time_domain(const LongitudinalState& state, const ControlInput& u,
                                        const PlantModel& model);

/// Same, with the aerodynamic accelerations already known.
[[nodiscard]] StateRate eom_time_domain(const LongitudinalState& state, const ControlInput& u, const LiftDrag& aero,
                                        const PlantModel& model);

struct VelocityDomainRate {
  double dr_dv = 0.0;
  double dgamma_dv = 0.0;
};

/// x' = dx/dV = (dx/dtau) / (dV/dtau). Throws SingularityError when |dV/dtau| < threshold.
[[nodiscard]] VelocityDomainRate eom_velocity_domain(double r, double gamma, double v, const ControlInput& u,
                                                     const PlantModel& model, double threshold = 1e-12);

// ---------------------------------------------------------------------------

struct ActuatorLimits {
  double min_value_deg = -80.0;
  double max_value_deg = 80.0;
  double max_rate_degps = 5.0;
  double max_accel_degps2 = 1.7;
  double damping = 0.7;
  double natural_freq_radps = 2.0;

  static ActuatorLimits bank() { return {}; }
  static ActuatorLimits angle_of_attack() { return {0.0, 50.0, 3.0, 1.5, 0.7, 2.0}; }
};

struct ActuatorState {
  double value_deg = 0.0;
  double rate_degps = 0.0;
  double accel_degps2 = 0.0;  ///< realised over the last step
};

/// One step of the second-order response followed by the constraint logic: the
/// rate change is limited to max_accel*dt, the rate to +/-max_rate and the value
/// to its range (the clamped derivative is zeroed).
[[nodiscard]] ActuatorState actuator_step(const ActuatorState& act, const ActuatorLimits& limits, double command_deg,
                                          double dt_s);

// ---------------------------------------------------------------------------

/// What the guidance sees each cycle (navigation solution).
struct NavigationData {
  double t_s = 0.0;
  LongitudinalState state{};
  double lift = 0.0;
  double drag = 0.0;
  double alpha_deg = 0.0;  ///< navigated, includes the estimate bias
  double sigma_rad = 0.0;
  double sigma_rate_degps = 0.0;
};

/// Guidance internals recorded alongside the trajectory.
struct GuidanceTelemetry {
  double drag_ref = 0.0;
  double xi1 = 0.0;
  double xi2_hat = 0.0;
  double eta1 = 0.0;
  double eta2_hat = 0.0;
  double dz_hat = 0.0;
  double delta_alpha_deg = 0.0;
  double alpha_ref_deg = 0.0;
  double sigma_ref_rad = 0.0;
  double bank_increment_rad = 0.0;
  std::string mode = "INACTIVE";
};

struct GuidanceOutput {
  ControlInput command{};
  GuidanceTelemetry telemetry{};
};

using GuidanceFunction = std::function<GuidanceOutput(const NavigationData&)>;

struct PropagationConfig {
  double dt_s = 0.05;
  double guidance_rate_hz = 1.0;
  double terminal_velocity_mps = 1500.0;
  double max_time_s = 5000.0;
  double min_altitude_m = 0.0;
  double alpha_estimate_bias_deg = 0.0;
  /// Actuator positions at t = 0.
  ControlInput initial_control{40.0, 0.0};
  ActuatorLimits bank_actuator = ActuatorLimits::bank();
  ActuatorLimits alpha_actuator = ActuatorLimits::angle_of_attack();
  /// Record the actuator state at every plant step (for constraint audits).
  bool record_actuator_history = false;
};

struct TrajectorySample {
  double t_s = 0.0;
  LongitudinalState state{};
  double alpha_deg = 0.0;  ///< true
  double sigma_rad = 0.0;  ///< true
  double alpha_cmd_deg = 0.0;
  double sigma_cmd_rad = 0.0;
  double lift = 0.0;
  double drag = 0.0;
  GuidanceTelemetry guidance{};
};

struct ActuatorRecord {
  double t_s = 0.0;
  ActuatorState bank{};
  ActuatorState alpha{};
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<ActuatorRecord> actuator_history;
  LongitudinalState final_state{};
  double final_time_s = 0.0;
  bool failed = false;
  std::string failure_reason;
};

/// Fixed-step RK4 in time with a multi-rate guidance loop and actuator models
/// between command and plant. Stops at the terminal velocity or on an invalid state.
[[nodiscard]] Trajectory propagate(const LongitudinalState& initial, const GuidanceFunction& guidance,
                                   const PlantModel& model, const PropagationConfig& config);

/// Plain RK4 in nondimensional time with a constant control, no actuators. Used
/// by the order and energy checks.
[[nodiscard]] LongitudinalState rk4_step(const LongitudinalState& s, const ControlInput& u, const PlantModel& model,
                                         double dtau);

}  // namespace entry
