#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "entry/dynamics.hpp"
#include "entry/guidance.hpp"
#include "entry/reference.hpp"

namespace entry {

/// Everything needed to fly one entry: plant, planner, propagator and guidance settings.
struct Scenario {
  EnvironmentConstants env{};
  VehicleModel vehicle{};
  PlannerConfig planner{};
  PropagationConfig propagation{};
  GuidanceConfig guidance{};
  /// Speed of sound (Mach for the alpha profile) from the bundled standard table.
  bool sound_table = true;

  void validate() const;
};

[[nodiscard]] PlantModel nominal_plant(const Scenario& scenario);
[[nodiscard]] ReferenceTrajectory build_reference(const Scenario& scenario);
[[nodiscard]] LongitudinalState entry_state(const Scenario& scenario, double fpa_offset_deg = 0.0);

/// 3-sigma widths of the dispersed quantities. Gaussian draws are truncated at 3 sigma.
struct DispersionSpec {
  double fpa_three_sigma_deg = 0.1;
  double cl_three_sigma = 0.10;
  double cd_three_sigma = 0.15;
  double density_bias_three_sigma = 0.10;
  double density_wave_max = 0.05;  ///< amplitude ~ U[0, max]
  double wavelength_min_m = 4000.0;
  double wavelength_max_m = 12000.0;
  bool random_phase = true;
  double alpha_bias_deg = 0.1;  ///< constant, sign drawn at random
  bool random_alpha_bias_sign = true;

  /// All widths zero: every draw is the nominal case.
  static DispersionSpec none();
  void validate() const;
};

struct DispersionDraw {
  double fpa_offset_deg = 0.0;
  double cl_multiplier = 1.0;
  double cd_multiplier = 1.0;
  AtmosphereDispersion atmosphere{};
  double alpha_bias_deg = 0.0;

  [[nodiscard]] bool nominal_atmosphere() const {
    return atmosphere.bias == 0.0 && atmosphere.wave_amplitude == 0.0;
  }
};

/// Deterministic in the seed; independent of any other draw.
[[nodiscard]] DispersionDraw sample_dispersions(const DispersionSpec& spec, std::uint64_t seed);

struct RunMetrics {
  double max_drag_error_window_g = 0.0;  ///< below the reporting velocity
  double max_drag_error_g = 0.0;
  double max_delta_alpha_deg = 0.0;
  double final_velocity_mps = 0.0;
  double final_altitude_m = 0.0;
  double final_fpa_deg = 0.0;
  double final_time_s = 0.0;
  bool failed = false;
  std::string failure_reason;
};

inline constexpr double kReportingVelocityMps = 7000.0;

[[nodiscard]] RunMetrics compute_metrics(const Trajectory& trajectory, const EnvironmentConstants& env,
                                         double window_mps = kReportingVelocityMps);

struct RunResult {
  Trajectory trajectory;
  RunMetrics metrics;
};

/// Flies one dispersed entry. Plant truth gets the draw; guidance keeps the nominal models.
/// Exceptions thrown by the plant or guidance are reported as a failed run.
[[nodiscard]] RunResult run_single(const Scenario& scenario, std::shared_ptr<const ReferenceTrajectory> reference,
                                   const DispersionDraw& draw);

struct BatchConfig {
  std::size_t runs = 500;
  std::uint64_t base_seed = 1;
  unsigned threads = 0;  ///< 0: hardware concurrency
  bool keep_trajectories = false;
};

struct RunRecord {
  std::size_t run_id = 0;
  std::uint64_t seed = 0;
  DispersionDraw draw{};
  RunMetrics metrics{};
  std::optional<Trajectory> trajectory;
};

struct BatchResult {
  ControllerKind controller = ControllerKind::Proposed;
  std::vector<RunRecord> runs;  ///< ordered by run_id
};

/// Run i uses seed base_seed + i; results do not depend on the thread count.
[[nodiscard]] BatchResult run_batch(const Scenario& scenario, std::shared_ptr<const ReferenceTrajectory> reference,
                                    const DispersionSpec& spec, const BatchConfig& config);

struct MetricSummary {
  double p50 = 0.0;
  double p95 = 0.0;
  double p997 = 0.0;
  double max = 0.0;
};

struct BatchSummary {
  ControllerKind controller = ControllerKind::Proposed;
  std::size_t runs = 0;
  std::size_t failed = 0;
  MetricSummary drag_error_window{};
  MetricSummary drag_error{};
  MetricSummary delta_alpha{};
};

/// Linear-interpolation percentile, q in [0, 100]. Throws RangeError on empty input.
[[nodiscard]] double percentile(std::vector<double> values, double q);

/// Statistics over the non-failed runs.
[[nodiscard]] BatchSummary summarize(const BatchResult& batch);

/// Fraction of all runs (failed ones count against) whose windowed drag error is at most `limit_g`.
[[nodiscard]] double fraction_within(const BatchResult& batch, double limit_g);

void write_metrics_csv(const BatchResult& batch, std::ostream& out);
[[nodiscard]] std::string summary_json(const BatchSummary& summary);

/// Columns: t_s, V_mps, h_m, gamma_deg, alpha_deg, sigma_deg, D_g, L_g, D_ref_g, D_err_g,
/// xi1, xi2_hat, eta1, eta2_hat, dz_hat, mode.
void write_trajectory_csv(const Trajectory& trajectory, const EnvironmentConstants& env, std::ostream& out);

}  // namespace entry
