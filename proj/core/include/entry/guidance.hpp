#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "entry/dynamics.hpp"
#include "entry/linearization.hpp"
#include "entry/reference.hpp"

namespace entry {

enum class SupervisorMode { Inactive, Track, ReversalAoa, PostReversalStabilize };

[[nodiscard]] std::string_view to_string(SupervisorMode mode);

/// Gains of both controllers. Angle-of-attack loop quantities are per unit
/// nondimensional velocity travelled (nu = V0 - V).
struct ControllerGains {
  double damping = 0.8;
  double natural_freq = 130.0;
  double observer_damping = 1.0;
  double observer_freq = 390.0;
  /// Internal stabilizer: k1, k2 are refreshed at every node to place the eta-loop here.
  double stabilizer_freq = 65.0;
  double stabilizer_damping = 0.7;
  /// Bound on the bank increment so the stabilizer cannot drive the bank rail to rail.
  double stabilizer_max_increment_deg = 20.0;
  double delta_alpha_max_deg = 5.0;
  /// Decay rate of the angle-of-attack offset while modulation is off, per unit nu.
  double inactive_decay = 50.0;

  /// Bank law: c1 = bank_drag_gain / D_ref, c2 from bank_damping.
  double bank_drag_gain = 4.0;
  double bank_damping = 0.7;

  /// Shuttle baseline.
  double shuttle_alpha_coupling = -0.05;  ///< c3, per deg
  double shuttle_k_alpha = 1.0;
  double shuttle_window_mps = 1000.0;
  double shuttle_washout_s = 20.0;

  void validate() const;
};

struct SupervisorConfig {
  double activation_mps = 7200.0;
  std::vector<double> reversal_mps{7000.0, 6000.0, 5000.0, 4000.0, 3000.0, 2000.0};
  double reversal_complete_deg = 2.0;
  double eta1_threshold_deg = 0.1;
  double eta2_threshold = 5.0;  ///< deg per unit nu
  /// Optional entry into the modulation mode on a fast drag-error rate (g per unit nu).
  bool drag_rate_trigger = false;
  double drag_rate_threshold = 1.0;

  void validate() const;
};

/// Bank sign: +1 before the first scheduled reversal, flipped at every crossed entry.
[[nodiscard]] int bank_reversal_sign(double v_mps, const std::vector<double>& schedule);

struct SupervisorState {
  SupervisorMode mode = SupervisorMode::Inactive;
  int reversals = 0;
  int bank_sign = 1;
};

struct SupervisorInput {
  double v_mps = 0.0;
  double sigma_deg = 0.0;      ///< actual, signed
  double sigma_cmd_deg = 0.0;  ///< last command, signed
  double eta1_deg = 0.0;
  double eta2_hat = 0.0;
  double xi2_hat = 0.0;
};

[[nodiscard]] SupervisorState supervisor_step(const SupervisorState& state, const SupervisorInput& in,
                                              const SupervisorConfig& config);

// ---------------------------------------------------------------------------

/// Simplified model mapped to nu = V0 - V (A and B change sign, C and chi do not).
struct NuModel {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
  double b1 = 0.0, b2 = 0.0;
  double c = 0.0;
  double chi = 0.0;

  /// a12 (c b2 - a21 chi), the eta1 coefficient of the external dynamics.
  [[nodiscard]] double eta1_coupling() const { return a12 * (c * b2 - a21 * chi); }
};

[[nodiscard]] NuModel nu_model(const LinearizedSystem& lin);

/// u_FL = [(du^v)_m + Lambda] / chi with xi = (y, dy/dnu), eta = (du, du' - xi2/chi).
[[nodiscard]] double feedback_linearization_input(const Eigen::Vector2d& xi, const Eigen::Vector2d& eta,
                                                  const NuModel& m, const ControllerGains& gains);

/// Observer gains placed at activation: tau2 = w_o^2, tau1 = a11 + a22 + 2 zeta_o w_o.
struct ObserverGains {
  double tau1 = 0.0;
  double tau2 = 0.0;
};

/// Throws ConfigError when the decay coefficient tau1 - a11 - a22 is not positive.
[[nodiscard]] ObserverGains observer_gains(const NuModel& m, const ControllerGains& gains);

/// Shifted observer states; estimates are xi2_hat = xi2_bar + tau1 xi1, dz_hat = dz_bar + tau2 xi1.
struct ObserverState {
  double xi2_bar = 0.0;
  double dz_bar = 0.0;
};

/// Inputs at the start of a step. Over the step xi1 moves linearly to xi1_end and
/// the extension states follow the double integrator driven by du_v.
struct ObserverInputs {
  double xi1 = 0.0;
  double xi1_end = 0.0;
  double du = 0.0;
  double du_rate = 0.0;
  double du_v = 0.0;
};

/// One RK4 step of the shifted observer over dnu with frozen coefficients.
[[nodiscard]] ObserverState observer_step(const ObserverState& s, const ObserverInputs& in, const NuModel& m,
                                          const ObserverGains& g, double dnu);

struct AoaState {
  double du = 0.0;       ///< deg
  double du_rate = 0.0;  ///< deg per unit nu
};

/// Advances du'' = du_v over dnu, clamps |du| with the rate zeroed at the limit.
/// With modulation off du decays at gains.inactive_decay instead.
[[nodiscard]] AoaState aoa_command(const AoaState& s, double du_v, double dnu, const ControllerGains& gains,
                                   bool enabled = true);

/// Rad of bank per deg and per (deg per unit nu).
struct StabilizerGains {
  double k1 = 0.0;
  double k2 = 0.0;
};

/// k1 eta1 + k2 eta2_hat, rad of bank magnitude.
[[nodiscard]] double internal_stabilizer(double eta1, double eta2_hat, const StabilizerGains& gains);

/// Gains that place the eta-loop at (omega, zeta) for the coefficients at one node.
[[nodiscard]] StabilizerGains design_stabilizer_gains(const ReferencePoint& p, const EnvironmentConstants& env,
                                                      double omega, double zeta);

// ---------------------------------------------------------------------------

struct BankLawInput {
  const ReferencePoint* ref = nullptr;
  double drag = 0.0;          ///< g
  double lift = 0.0;          ///< g
  double hdot_mps = 0.0;
  double hdot_ref_mps = 0.0;
};

/// Vertical L/D demand L_ref cos(sigma_ref)/D_ref + c1 (D - D_ref) + c2 (hdot - hdot_ref).
[[nodiscard]] double vertical_lift_to_drag(const BankLawInput& in, const ControllerGains& gains,
                                           const EnvironmentConstants& env);

/// Bank magnitude realising a vertical L/D demand, saturated to [0, 80] deg.
[[nodiscard]] double bank_from_vertical_lift(double lod_v, double drag, double lift);

struct ShuttleCommand {
  double sigma_rad = 0.0;  ///< signed
  double alpha_deg = 0.0;
};

/// Baseline bank and alpha commands. delta_alpha_nav is navigated alpha minus the
/// reference; delta_alpha_cmd is the alpha-channel offset already computed.
[[nodiscard]] ShuttleCommand shuttle_baseline_command(const BankLawInput& in, double delta_alpha_nav,
                                                      double delta_alpha_cmd, int sign,
                                                      const ControllerGains& gains, const EnvironmentConstants& env);

/// Static drag-error inversion used by the baseline alpha channel, deg.
[[nodiscard]] double shuttle_alpha_offset(double drag_error, const ReferencePoint& ref, const ControllerGains& gains);

// ---------------------------------------------------------------------------

struct GuidanceState {
  double nu = 0.0;
  double xi1 = 0.0;
  AoaState aoa{};
  ObserverState observer{};
  ObserverGains observer_gains{};
  double xi2_hat = 0.0;
  double dz_hat = 0.0;
  double eta2_hat = 0.0;
  double du_v = 0.0;
  SupervisorState supervisor{};
  double sigma_cmd_rad = 0.0;
  NuModel model{};
  bool active = false;
};

enum class ControllerKind { Proposed, Shuttle };

[[nodiscard]] std::string_view to_string(ControllerKind kind);
[[nodiscard]] ControllerKind controller_from_string(std::string_view name);

struct GuidanceConfig {
  ControllerKind controller = ControllerKind::Proposed;
  ControllerGains gains{};
  SupervisorConfig supervisor{};
  bool stabilizer_enabled = true;
  bool modulation_in_track = true;
};

/// Stateful guidance loop for either controller; call once per guidance cycle.
class EntryGuidance {
 public:
  EntryGuidance(std::shared_ptr<const ReferenceTrajectory> reference, EnvironmentConstants env,
                GuidanceConfig config);

  GuidanceOutput operator()(const NavigationData& nav);

  [[nodiscard]] const GuidanceState& state() const { return state_; }
  [[nodiscard]] const GuidanceConfig& config() const { return config_; }

 private:
  GuidanceOutput step_proposed(const NavigationData& nav, const ReferencePoint& ref, double v_mps);
  GuidanceOutput step_shuttle(const NavigationData& nav, const ReferencePoint& ref, double v_mps);

  std::shared_ptr<const ReferenceTrajectory> reference_;
  EnvironmentConstants env_;
  GuidanceConfig config_;
  GuidanceState state_;
  double shuttle_offset_deg_ = 0.0;
  double last_time_s_ = 0.0;
  double window_end_mps_ = -1.0;
};

/// Wraps a fresh EntryGuidance into the propagator callback.
[[nodiscard]] GuidanceFunction make_guidance(std::shared_ptr<const ReferenceTrajectory> reference,
                                             const EnvironmentConstants& env, const GuidanceConfig& config);

}  // namespace entry
