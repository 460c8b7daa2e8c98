#include "entry/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "entry/errors.hpp"

namespace entry {

StateRate eom_time_domain(const LongitudinalState& s, const ControlInput& u, const LiftDrag& aero,
                          const PlantModel& model) {
  if (!(s.v > model.min_velocity)) {
    throw TerminationError("velocity " + std::to_string(s.v) + " below propagation threshold");
  }
  const double sg = std::sin(s.gamma);
  const double cg = std::cos(s.gamma);
  StateRate rate;
  rate.dr = s.v * sg;
  rate.dv = -aero.drag - sg / (s.r * s.r);
  double v_gamma_dot = aero.lift * std::cos(u.sigma_rad) + (s.v * s.v - 1.0 / s.r) * cg / s.r;
  if (model.rotation.enabled) {
    const double omega = model.env.earth_rate_radps * model.env.time_scale();
    const double cp = std::cos(model.rotation.latitude_rad);
    const double sp = std::sin(model.rotation.latitude_rad);
    const double cpsi = std::cos(model.rotation.azimuth_rad);
    const double spsi = std::sin(model.rotation.azimuth_rad);
    rate.dv += omega * omega * s.r * cp * (sg * cp - cg * sp * cpsi);
    v_gamma_dot += 2.0 * omega * s.v * cp * spsi + omega * omega * s.r * cp * (cg * cp + sg * cpsi * sp);
  }
  rate.dgamma = v_gamma_dot / s.v;
  return rate;
}

StateRate eom_time_domain(const LongitudinalState& s, const ControlInput& u, const PlantModel& model) {
  const auto aero = lift_drag_accels(s.r, s.v, u.alpha_deg, model.env, model.vehicle, model.atmosphere);
  return eom_time_domain(s, u, aero, model);
}

VelocityDomainRate eom_velocity_domain(double r, double gamma, double v, const ControlInput& u,
                                       const PlantModel& model, double threshold) {
  const auto rate = eom_time_domain({r, v, gamma}, u, model);
  if (std::abs(rate.dv) < threshold) {
    throw SingularityError("dV/dtau vanishes; velocity is not monotone at this state");
  }
  return {rate.dr / rate.dv, rate.dgamma / rate.dv};
}

// ---------------------------------------------------------------------------

ActuatorState actuator_step(const ActuatorState& act, const ActuatorLimits& lim, double command_deg, double dt) {
  const double wn = lim.natural_freq_radps;
  const double z = lim.damping;
  auto accel = [&](double x, double xd) { return -2.0 * z * wn * xd - wn * wn * x + wn * wn * command_deg; };

  const double x0 = act.value_deg;
  const double v0 = act.rate_degps;
  const double k1x = v0;
  const double k1v = accel(x0, v0);
  const double k2x = v0 + 0.5 * dt * k1v;
  const double k2v = accel(x0 + 0.5 * dt * k1x, k2x);
  const double k3x = v0 + 0.5 * dt * k2v;
  const double k3v = accel(x0 + 0.5 * dt * k2x, k3x);
  const double k4x = v0 + dt * k3v;
  const double k4v = accel(x0 + dt * k3x, k4x);
  double x = x0 + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  double v = v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

  bool clamped = false;
  const double max_dv = lim.max_accel_degps2 * dt;
  if (std::abs(v - v0) > max_dv) {
    v = v0 + std::copysign(max_dv, v - v0);
    clamped = true;
  }
  if (std::abs(v) > lim.max_rate_degps) {
    v = std::copysign(lim.max_rate_degps, v);
    clamped = true;
  }
  if (clamped) x = x0 + 0.5 * (v0 + v) * dt;
  if (x > lim.max_value_deg) {
    x = lim.max_value_deg;
    v = std::min(v, 0.0);
  } else if (x < lim.min_value_deg) {
    x = lim.min_value_deg;
    v = std::max(v, 0.0);
  }
  // zeroing the rate at a bound may not exceed the acceleration budget either
  if (std::abs(v - v0) > max_dv) v = v0 + std::copysign(max_dv, v - v0);
  return {x, v, (v - v0) / dt};
}

// ---------------------------------------------------------------------------

LongitudinalState rk4_step(const LongitudinalState& s, const ControlInput& u, const PlantModel& model, double h) {
  auto add = [](const LongitudinalState& a, const StateRate& k, double w) {
    return LongitudinalState{a.r + w * k.dr, a.v + w * k.dv, a.gamma + w * k.dgamma};
  };
  const auto k1 = eom_time_domain(s, u, model);
  const auto k2 = eom_time_domain(add(s, k1, 0.5 * h), u, model);
  const auto k3 = eom_time_domain(add(s, k2, 0.5 * h), u, model);
  const auto k4 = eom_time_domain(add(s, k3, h), u, model);
  return {s.r + h / 6.0 * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr),
          s.v + h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv),
          s.gamma + h / 6.0 * (k1.dgamma + 2.0 * k2.dgamma + 2.0 * k3.dgamma + k4.dgamma)};
}

namespace {

std::optional<std::string> invariant_violation(const LongitudinalState& s, const PlantModel& model,
                                               const PropagationConfig& cfg) {
  if (!std::isfinite(s.r) || !std::isfinite(s.v) || !std::isfinite(s.gamma)) return "non-finite state";
  if (model.env.to_altitude(s.r) < cfg.min_altitude_m) return "altitude below minimum";
  if (model.env.to_altitude(s.r) > AtmosphereModel::kMaxAltitudeM) return "altitude above atmosphere model";
  if (!(s.v > model.min_velocity)) return "velocity below propagation threshold";
  if (!(std::abs(s.gamma) < 0.5 * kPi)) return "flight-path angle reached +/-90 deg";
  return std::nullopt;
}

}  // namespace

Trajectory propagate(const LongitudinalState& initial, const GuidanceFunction& guidance, const PlantModel& model,
                     const PropagationConfig& cfg) {
  if (!(cfg.dt_s > 0.0) || !(cfg.guidance_rate_hz > 0.0)) throw DomainError("propagation step and rate must be > 0");
  const double t_scale = model.env.time_scale();
  const double v_scale = model.env.velocity_scale();
  const double dtau = cfg.dt_s / t_scale;
  const auto steps_per_cycle =
      std::max<long>(1, std::lround(1.0 / (cfg.guidance_rate_hz * cfg.dt_s)));
  const double v_terminal = cfg.terminal_velocity_mps / v_scale;

  Trajectory traj;
  LongitudinalState s = initial;
  if (auto bad = invariant_violation(s, model, cfg)) {
    traj.failed = true;
    traj.failure_reason = "initial state invalid: " + *bad;
    traj.final_state = s;
    return traj;
  }

  ActuatorState bank{cfg.initial_control.sigma_rad * kRadToDeg, 0.0, 0.0};
  ActuatorState alpha{cfg.initial_control.alpha_deg - cfg.alpha_estimate_bias_deg, 0.0, 0.0};
  GuidanceOutput out{};
  double t = 0.0;

  auto fail = [&](std::string reason) {
    traj.failed = true;
    traj.failure_reason = std::move(reason);
  };

  for (long k = 0;; ++k) {
    if (k % steps_per_cycle == 0) {
      LiftDrag aero{};
      try {
        aero = lift_drag_accels(s.r, s.v, alpha.value_deg, model.env, model.vehicle, model.atmosphere);
        const NavigationData nav{t, s, aero.lift, aero.drag, alpha.value_deg + cfg.alpha_estimate_bias_deg,
                                 bank.value_deg * kDegToRad, bank.rate_degps};
        out = guidance(nav);
      } catch (const std::exception& e) {
        fail(std::string("guidance cycle: ") + e.what());
        break;
      }
      traj.samples.push_back({t, s, alpha.value_deg, bank.value_deg * kDegToRad, out.command.alpha_deg,
                              out.command.sigma_rad, aero.lift, aero.drag, out.telemetry});
    }

    if (s.v <= v_terminal) break;
    if (t >= cfg.max_time_s) {
      fail("maximum flight time reached");
      break;
    }

    // Attitude control closes on the navigated angle of attack.
    bank = actuator_step(bank, cfg.bank_actuator, out.command.sigma_rad * kRadToDeg, cfg.dt_s);
    alpha = actuator_step(alpha, cfg.alpha_actuator, out.command.alpha_deg - cfg.alpha_estimate_bias_deg, cfg.dt_s);
    if (cfg.record_actuator_history) traj.actuator_history.push_back({t + cfg.dt_s, bank, alpha});

    const ControlInput u{alpha.value_deg, bank.value_deg * kDegToRad};
    try {
      s = rk4_step(s, u, model, dtau);
    } catch (const std::exception& e) {
      fail(e.what());
      break;
    }
    t += cfg.dt_s;
    if (auto bad = invariant_violation(s, model, cfg)) {
      fail(*bad);
      break;
    }
  }
  traj.final_state = s;
  traj.final_time_s = t;
  return traj;
}

}  // namespace entry
