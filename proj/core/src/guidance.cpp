#include "entry/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "entry/errors.hpp"

namespace entry {

namespace {

const double kMaxBankRad = 80.0 * kDegToRad;

double clamp_abs(double x, double limit) { return std::clamp(x, -limit, limit); }

}  // namespace

std::string_view to_string(SupervisorMode mode) {
  switch (mode) {
    case SupervisorMode::Inactive:
      return "INACTIVE";
    case SupervisorMode::Track:
      return "TRACK";
    case SupervisorMode::ReversalAoa:
      return "REVERSAL_AOA";
    case SupervisorMode::PostReversalStabilize:
      return "POST_REVERSAL_STABILIZE";
  }
  return "INACTIVE";
}

std::string_view to_string(ControllerKind kind) { return kind == ControllerKind::Proposed ? "proposed" : "shuttle"; }

ControllerKind controller_from_string(std::string_view name) {
  if (name == "proposed") return ControllerKind::Proposed;
  if (name == "shuttle") return ControllerKind::Shuttle;
  throw ConfigError("unknown controller '" + std::string(name) + "' (expected proposed or shuttle)");
}

void ControllerGains::validate() const {
  if (!(damping > 0.0 && damping <= 2.0)) throw ConfigError("guidance.gains.damping must lie in (0, 2]");
  if (!(natural_freq > 0.0)) throw ConfigError("guidance.gains.natural_freq must be positive");
  if (!(observer_freq > 0.0)) throw ConfigError("guidance.gains.observer_freq must be positive");
  if (!(observer_damping > 0.0)) throw ConfigError("guidance.gains.observer_damping must be positive");
  if (!(delta_alpha_max_deg > 0.0 && delta_alpha_max_deg <= 20.0)) {
    throw ConfigError("guidance.gains.delta_alpha_max_deg must lie in (0, 20]");
  }
  if (!(inactive_decay >= 0.0)) throw ConfigError("guidance.gains.inactive_decay must be non-negative");
  if (!(bank_drag_gain > 0.0)) throw ConfigError("guidance.gains.bank_drag_gain must be positive");
  if (!(bank_damping > 0.0)) throw ConfigError("guidance.gains.bank_damping must be positive");
  if (!(shuttle_k_alpha >= 0.0)) throw ConfigError("guidance.gains.shuttle_k_alpha must be non-negative");
  if (!(shuttle_window_mps >= 0.0)) throw ConfigError("guidance.gains.shuttle_window_mps must be non-negative");
  if (!(shuttle_washout_s > 0.0)) throw ConfigError("guidance.gains.shuttle_washout_s must be positive");
  if (!(stabilizer_freq > 0.0)) throw ConfigError("guidance.gains.stabilizer_freq must be positive");
  if (!(stabilizer_damping > 0.0)) throw ConfigError("guidance.gains.stabilizer_damping must be positive");
  if (!(stabilizer_max_increment_deg > 0.0 && stabilizer_max_increment_deg <= 160.0)) {
    throw ConfigError("guidance.gains.stabilizer_max_increment_deg must lie in (0, 160]");
  }
  if (!std::isfinite(shuttle_alpha_coupling)) throw ConfigError("guidance.gains.shuttle_alpha_coupling must be finite");
}

void SupervisorConfig::validate() const {
  if (!(activation_mps > 0.0)) throw ConfigError("guidance.supervisor.activation_mps must be positive");
  for (std::size_t i = 1; i < reversal_mps.size(); ++i) {
    if (!(reversal_mps[i] < reversal_mps[i - 1])) {
      throw ConfigError("guidance.supervisor.reversal_mps must be strictly decreasing");
    }
  }
  if (!(reversal_complete_deg > 0.0)) throw ConfigError("guidance.supervisor.reversal_complete_deg must be positive");
  if (!(eta1_threshold_deg > 0.0)) throw ConfigError("guidance.supervisor.eta1_threshold_deg must be positive");
  if (!(eta2_threshold > 0.0)) throw ConfigError("guidance.supervisor.eta2_threshold must be positive");
  if (!(drag_rate_threshold > 0.0)) throw ConfigError("guidance.supervisor.drag_rate_threshold must be positive");
}

int bank_reversal_sign(double v_mps, const std::vector<double>& schedule) {
  int sign = 1;
  for (double trigger : schedule) {
    if (v_mps <= trigger) sign = -sign;
  }
  return sign;
}

namespace {

int crossed_reversals(double v_mps, const std::vector<double>& schedule) {
  return static_cast<int>(std::count_if(schedule.begin(), schedule.end(), [v_mps](double t) { return v_mps <= t; }));
}

}  // namespace

SupervisorState supervisor_step(const SupervisorState& state, const SupervisorInput& in,
                                const SupervisorConfig& config) {
  SupervisorState next = state;
  next.bank_sign = bank_reversal_sign(in.v_mps, config.reversal_mps);
  const int crossed = crossed_reversals(in.v_mps, config.reversal_mps);

  if (next.mode == SupervisorMode::Inactive) {
    if (in.v_mps > config.activation_mps) {
      next.reversals = crossed;
      return next;
    }
    next.mode = SupervisorMode::Track;
  }

  if (crossed > next.reversals) {
    next.reversals = crossed;
    next.mode = SupervisorMode::ReversalAoa;
    return next;
  }

  switch (next.mode) {
    case SupervisorMode::ReversalAoa: {
      const bool settled = std::abs(in.sigma_deg - in.sigma_cmd_deg) < config.reversal_complete_deg;
      const bool same_sign = (in.sigma_deg >= 0.0 ? 1 : -1) == (in.sigma_cmd_deg >= 0.0 ? 1 : -1);
      if (settled && same_sign) next.mode = SupervisorMode::PostReversalStabilize;
      break;
    }
    case SupervisorMode::PostReversalStabilize:
      if (std::abs(in.eta1_deg) < config.eta1_threshold_deg && std::abs(in.eta2_hat) < config.eta2_threshold) {
        next.mode = SupervisorMode::Track;
      }
      break;
    case SupervisorMode::Track:
      if (config.drag_rate_trigger && std::abs(in.xi2_hat) > config.drag_rate_threshold) {
        next.mode = SupervisorMode::ReversalAoa;
      }
      break;
    case SupervisorMode::Inactive:
      break;
  }
  return next;
}

// ---------------------------------------------------------------------------

NuModel nu_model(const LinearizedSystem& lin) {
  NuModel m;
  m.a11 = -lin.simplified.a(0, 0);
  m.a12 = -lin.simplified.a(0, 1);
  m.a21 = -lin.simplified.a(1, 0);
  m.a22 = -lin.simplified.a(1, 1);
  m.b1 = -lin.simplified.b(0);
  m.b2 = -lin.simplified.b(1);
  m.c = lin.c(0);
  m.chi = lin.chi;
  return m;
}

double feedback_linearization_input(const Eigen::Vector2d& xi, const Eigen::Vector2d& eta, const NuModel& m,
                                    const ControllerGains& gains) {
  if (!(std::abs(m.chi) > 0.0)) throw SingularityError("chi vanishes");
  const double cancel = -(m.a11 * xi(1) + (m.a12 * m.a21 - m.a11 * m.a22) * xi(0) + m.eta1_coupling() * eta(0) -
                          m.a22 * m.chi * eta(1));
  const double w = gains.natural_freq;
  const double shaping = -2.0 * gains.damping * w * xi(1) - w * w * xi(0);
  return (cancel + shaping) / m.chi;
}

ObserverGains observer_gains(const NuModel& m, const ControllerGains& gains) {
  ObserverGains g;
  g.tau2 = gains.observer_freq * gains.observer_freq;
  g.tau1 = m.a11 + m.a22 + 2.0 * gains.observer_damping * gains.observer_freq;
  if (!(g.tau1 - m.a11 - m.a22 > 0.0) || !(g.tau2 > 0.0)) {
    throw ConfigError("observer gains give a non-decaying error polynomial");
  }
  return g;
}

ObserverState observer_step(const ObserverState& s, const ObserverInputs& in, const NuModel& m,
                            const ObserverGains& g, double dnu) {
  if (!(dnu > 0.0)) return s;
  const double t1 = g.tau1;
  const double t2 = g.tau2;
  const double decay = m.a11 + m.a22 - t1;
  const double xi1_gain = m.a12 * m.a21 - m.a11 * m.a22 + m.a11 * t1 + m.a22 * t1 - t1 * t1 + t2;
  const double coupling = m.eta1_coupling();
  const double slope = (in.xi1_end - in.xi1) / dnu;

  auto rhs = [&](double t, double xb, double db) {
    const double xi1 = in.xi1 + slope * t;
    const double du = in.du + in.du_rate * t + 0.5 * in.du_v * t * t;
    const double du_rate = in.du_rate + in.du_v * t;
    const double dxb = decay * xb + db + m.chi * in.du_v + xi1_gain * xi1 + coupling * du - m.a22 * m.chi * du_rate;
    const double ddb = -t2 * xb - t1 * t2 * xi1;
    return std::pair{dxb, ddb};
  };

  const auto [k1x, k1d] = rhs(0.0, s.xi2_bar, s.dz_bar);
  const auto [k2x, k2d] = rhs(0.5 * dnu, s.xi2_bar + 0.5 * dnu * k1x, s.dz_bar + 0.5 * dnu * k1d);
  const auto [k3x, k3d] = rhs(0.5 * dnu, s.xi2_bar + 0.5 * dnu * k2x, s.dz_bar + 0.5 * dnu * k2d);
  const auto [k4x, k4d] = rhs(dnu, s.xi2_bar + dnu * k3x, s.dz_bar + dnu * k3d);
  return {s.xi2_bar + dnu / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
          s.dz_bar + dnu / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)};
}

AoaState aoa_command(const AoaState& s, double du_v, double dnu, const ControllerGains& gains, bool enabled) {
  if (!(dnu > 0.0)) return s;
  if (!enabled) return {s.du * std::exp(-gains.inactive_decay * dnu), 0.0};
  AoaState next{s.du + s.du_rate * dnu + 0.5 * du_v * dnu * dnu, s.du_rate + du_v * dnu};
  const double lim = gains.delta_alpha_max_deg;
  if (std::abs(next.du) > lim) {
    next.du = std::copysign(lim, next.du);
    next.du_rate = 0.0;
  }
  return next;
}

double internal_stabilizer(double eta1, double eta2_hat, const StabilizerGains& gains) {
  return gains.k1 * eta1 + gains.k2 * eta2_hat;
}

StabilizerGains design_stabilizer_gains(const ReferencePoint& p, const EnvironmentConstants& env, double omega,
                                        double zeta) {
  const auto zc = zero_dynamics_coeffs(p, env);
  const double bank_sensitivity = -p.drag_r * p.lift * std::sin(p.sigma) / (p.drag * p.drag);
  if (!(std::abs(bank_sensitivity) > 0.0)) throw SingularityError("bank has no authority on drag at this node");
  const double k1 = p.drag_alpha * (zc.gamma1 + omega * omega) / bank_sensitivity;
  const double k2 = p.drag_alpha * (-zc.gamma2 + 2.0 * zeta * omega) / bank_sensitivity;
  return {k1, k2};
}

// ---------------------------------------------------------------------------

double vertical_lift_to_drag(const BankLawInput& in, const ControllerGains& gains, const EnvironmentConstants& env) {
  const auto& ref = *in.ref;
  const double c1 = gains.bank_drag_gain / ref.drag;
  const double omega = std::sqrt(c1 * ref.drag * ref.drag * env.g0_mps2 / env.scale_height_m);
  const double c2 = -2.0 * gains.bank_damping * omega / (ref.drag * env.g0_mps2);
  return ref.lift * std::cos(ref.sigma) / ref.drag + c1 * (in.drag - ref.drag) + c2 * (in.hdot_mps - in.hdot_ref_mps);
}

double bank_from_vertical_lift(double lod_v, double drag, double lift) {
  if (!(lift > 0.0)) return kMaxBankRad;
  const double c = std::clamp(lod_v * drag / lift, std::cos(kMaxBankRad), 1.0);
  return std::acos(c);
}

double shuttle_alpha_offset(double drag_error, const ReferencePoint& ref, const ControllerGains& gains) {
  if (!(std::abs(ref.drag_alpha) > 0.0)) throw SingularityError("D_alpha vanishes");
  return clamp_abs(-gains.shuttle_k_alpha * drag_error / ref.drag_alpha, gains.delta_alpha_max_deg);
}

ShuttleCommand shuttle_baseline_command(const BankLawInput& in, double delta_alpha_nav, double delta_alpha_cmd,
                                        int sign, const ControllerGains& gains, const EnvironmentConstants& env) {
  const double lod = vertical_lift_to_drag(in, gains, env) + gains.shuttle_alpha_coupling * delta_alpha_nav;
  return {sign * bank_from_vertical_lift(lod, in.drag, in.lift), in.ref->alpha_deg + delta_alpha_cmd};
}

// ---------------------------------------------------------------------------

EntryGuidance::EntryGuidance(std::shared_ptr<const ReferenceTrajectory> reference, EnvironmentConstants env,
                             GuidanceConfig config)
    : reference_(std::move(reference)), env_(env), config_(std::move(config)) {
  if (!reference_ || reference_->size() < 3) throw DependencyError("guidance needs a reference trajectory");
  config_.gains.validate();
  config_.supervisor.validate();
}

GuidanceOutput EntryGuidance::operator()(const NavigationData& nav) {
  const double v = std::clamp(nav.state.v, reference_->v_min(), reference_->v_max());
  const ReferencePoint ref = reference_->lookup(v);
  const double v_mps = nav.state.v * env_.velocity_scale();
  auto out = config_.controller == ControllerKind::Proposed ? step_proposed(nav, ref, v_mps)
                                                             : step_shuttle(nav, ref, v_mps);
  last_time_s_ = nav.t_s;
  state_.sigma_cmd_rad = out.command.sigma_rad;
  out.telemetry.drag_ref = ref.drag;
  out.telemetry.alpha_ref_deg = ref.alpha_deg;
  out.telemetry.sigma_ref_rad = ref.sigma;
  out.telemetry.xi1 = nav.drag - ref.drag;
  out.telemetry.mode = std::string(to_string(state_.supervisor.mode));
  return out;
}

namespace {

BankLawInput bank_input(const NavigationData& nav, const ReferencePoint& ref, const EnvironmentConstants& env) {
  const double vs = env.velocity_scale();
  return {&ref, nav.drag, nav.lift, nav.state.v * vs * std::sin(nav.state.gamma), ref.v * vs * std::sin(ref.gamma)};
}

}  // namespace

GuidanceOutput EntryGuidance::step_proposed(const NavigationData& nav, const ReferencePoint& ref, double v_mps) {
  const auto& gains = config_.gains;
  auto& st = state_;
  const NuModel m = nu_model(linearize(ref));
  const double xi1 = nav.drag - ref.drag;
  const double nu = reference_->v_max() - nav.state.v;

  if (st.active) {
    const double dnu = nu - st.nu;
    const bool modulating = st.supervisor.mode != SupervisorMode::Track || config_.modulation_in_track;
    st.observer = observer_step(st.observer, {st.xi1, xi1, st.aoa.du, st.aoa.du_rate, st.du_v}, st.model,
                                st.observer_gains, dnu);
    st.aoa = aoa_command(st.aoa, st.du_v, dnu, gains, modulating);
  }
  st.nu = nu;
  st.xi1 = xi1;
  st.model = m;

  const bool was_active = st.active;
  st.supervisor = supervisor_step(st.supervisor,
                                  {v_mps, nav.sigma_rad * kRadToDeg, st.sigma_cmd_rad * kRadToDeg, st.aoa.du,
                                   st.eta2_hat, st.xi2_hat},
                                  config_.supervisor);
  if (!was_active && st.supervisor.mode != SupervisorMode::Inactive) {
    st.active = true;
    st.observer_gains = observer_gains(m, gains);
    st.observer = {-st.observer_gains.tau1 * xi1, -st.observer_gains.tau2 * xi1};
    st.aoa = {};
    st.du_v = 0.0;
  }

  GuidanceOutput out;
  double increment = 0.0;
  if (st.active) {
    st.xi2_hat = st.observer.xi2_bar + st.observer_gains.tau1 * xi1;
    st.dz_hat = st.observer.dz_bar + st.observer_gains.tau2 * xi1;
    st.eta2_hat = st.aoa.du_rate - st.xi2_hat / m.chi;
    const bool modulating = st.supervisor.mode != SupervisorMode::Track || config_.modulation_in_track;
    if (modulating) {
      const double u_fl = feedback_linearization_input({xi1, st.xi2_hat}, {st.aoa.du, st.eta2_hat}, m, gains);
      st.du_v = u_fl - st.dz_hat / m.chi;
      const bool at_limit = std::abs(st.aoa.du) >= gains.delta_alpha_max_deg && st.aoa.du_rate == 0.0;
      if (at_limit && st.du_v * st.aoa.du > 0.0) st.du_v = 0.0;
    } else {
      st.du_v = 0.0;
    }
    if (config_.stabilizer_enabled && st.supervisor.mode == SupervisorMode::PostReversalStabilize) {
      const auto k = design_stabilizer_gains(ref, env_, gains.stabilizer_freq, gains.stabilizer_damping);
      const double lim = gains.stabilizer_max_increment_deg * kDegToRad;
      increment = std::clamp(internal_stabilizer(st.aoa.du, st.eta2_hat, k), -lim, lim);
    }
  }

  const double lod = vertical_lift_to_drag(bank_input(nav, ref, env_), gains, env_);
  const double magnitude = std::clamp(bank_from_vertical_lift(lod, nav.drag, nav.lift) + increment, 0.0, kMaxBankRad);
  out.command.sigma_rad = st.supervisor.bank_sign * magnitude;
  out.command.alpha_deg = ref.alpha_deg + st.aoa.du;

  auto& tel = out.telemetry;
  tel.xi2_hat = st.xi2_hat;
  tel.eta1 = st.aoa.du;
  tel.eta2_hat = st.eta2_hat;
  tel.dz_hat = st.dz_hat;
  tel.delta_alpha_deg = st.aoa.du;
  tel.bank_increment_rad = increment;
  return out;
}

GuidanceOutput EntryGuidance::step_shuttle(const NavigationData& nav, const ReferencePoint& ref, double v_mps) {
  const auto& gains = config_.gains;
  auto& st = state_;
  const int before = st.supervisor.reversals;
  st.supervisor = supervisor_step(st.supervisor, {v_mps, nav.sigma_rad * kRadToDeg, st.sigma_cmd_rad * kRadToDeg},
                                  config_.supervisor);
  st.active = st.supervisor.mode != SupervisorMode::Inactive;
  if (st.active && st.supervisor.reversals > before) window_end_mps_ = v_mps - gains.shuttle_window_mps;

  const double xi1 = nav.drag - ref.drag;
  const double dt = std::max(nav.t_s - last_time_s_, 0.0);
  if (st.active && v_mps > window_end_mps_) {
    shuttle_offset_deg_ = shuttle_alpha_offset(xi1, ref, gains);
  } else {
    shuttle_offset_deg_ *= std::exp(-dt / gains.shuttle_washout_s);
  }
  st.aoa.du = shuttle_offset_deg_;
  st.xi1 = xi1;

  const double delta_alpha_nav = st.active ? nav.alpha_deg - ref.alpha_deg : 0.0;
  const auto cmd = shuttle_baseline_command(bank_input(nav, ref, env_), delta_alpha_nav, shuttle_offset_deg_,
                                            st.supervisor.bank_sign, gains, env_);
  GuidanceOutput out;
  out.command = {cmd.alpha_deg, cmd.sigma_rad};
  out.telemetry.eta1 = shuttle_offset_deg_;
  out.telemetry.delta_alpha_deg = shuttle_offset_deg_;
  return out;
}

GuidanceFunction make_guidance(std::shared_ptr<const ReferenceTrajectory> reference, const EnvironmentConstants& env,
                               const GuidanceConfig& config) {
  auto guidance = std::make_shared<EntryGuidance>(std::move(reference), env, config);
  return [guidance](const NavigationData& nav) { return (*guidance)(nav); };
}

}  // namespace entry
