#include "entry/mc_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "entry/errors.hpp"

namespace entry {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

// Standard normal truncated at +-3 by rejection.
double truncated_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const double x = n(rng);
    if (std::abs(x) <= 3.0) return x;
  }
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Decorrelates neighbouring seeds before they reach the engine.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

MetricSummary summary_of(const std::vector<double>& v) {
  if (v.empty()) return {};
  return {percentile(v, 50.0), percentile(v, 95.0), percentile(v, 99.7), *std::max_element(v.begin(), v.end())};
}

nlohmann::json to_json(const MetricSummary& m) {
  return {{"p50", m.p50}, {"p95", m.p95}, {"p99_7", m.p997}, {"max", m.max}};
}

}  // namespace

void Scenario::validate() const {
  env.validate();
  vehicle.validate();
  guidance.gains.validate();
  guidance.supervisor.validate();
  require(propagation.dt_s > 0.0, "propagation.dt_s must be positive");
  require(propagation.guidance_rate_hz > 0.0, "propagation.guidance_rate_hz must be positive");
  require(propagation.terminal_velocity_mps > 0.0, "propagation.terminal_velocity_mps must be positive");
  require(propagation.max_time_s > 0.0, "propagation.max_time_s must be positive");
}

PlantModel nominal_plant(const Scenario& scenario) {
  PlantModel m;
  m.env = scenario.env;
  m.vehicle = scenario.vehicle;
  m.atmosphere = AtmosphereModel::nominal(scenario.env);
  if (scenario.sound_table) m.atmosphere.with_sound_table(StandardAtmosphereTable::bundled());
  return m;
}

ReferenceTrajectory build_reference(const Scenario& scenario) {
  return generate_reference(scenario.planner, nominal_plant(scenario));
}

LongitudinalState entry_state(const Scenario& scenario, double fpa_offset_deg) {
  const auto& ei = scenario.planner.entry;
  return {1.0 + ei.altitude_m / scenario.env.earth_radius_m, ei.velocity_mps / scenario.env.velocity_scale(),
          (ei.fpa_deg + fpa_offset_deg) * kDegToRad};
}

DispersionSpec DispersionSpec::none() {
  DispersionSpec s;
  s.fpa_three_sigma_deg = 0.0;
  s.cl_three_sigma = 0.0;
  s.cd_three_sigma = 0.0;
  s.density_bias_three_sigma = 0.0;
  s.density_wave_max = 0.0;
  s.random_phase = false;
  s.alpha_bias_deg = 0.0;
  s.random_alpha_bias_sign = false;
  return s;
}

void DispersionSpec::validate() const {
  require(fpa_three_sigma_deg >= 0.0, "dispersions.fpa_three_sigma_deg must be non-negative");
  require(cl_three_sigma >= 0.0 && cl_three_sigma < 1.0, "dispersions.cl_three_sigma must lie in [0, 1)");
  require(cd_three_sigma >= 0.0 && cd_three_sigma < 1.0, "dispersions.cd_three_sigma must lie in [0, 1)");
  require(density_bias_three_sigma >= 0.0 && density_bias_three_sigma < 1.0,
          "dispersions.density_bias_three_sigma must lie in [0, 1)");
  require(density_wave_max >= 0.0 && density_wave_max < 1.0, "dispersions.density_wave_max must lie in [0, 1)");
  require(wavelength_min_m > 0.0 && wavelength_max_m >= wavelength_min_m,
          "dispersions wavelength range must be positive and ordered");
  require(alpha_bias_deg >= 0.0, "dispersions.alpha_bias_deg must be non-negative");
}

DispersionDraw sample_dispersions(const DispersionSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(splitmix64(seed));
  // Every variate is drawn regardless of the spec so the stream layout is fixed.
  const double z_fpa = truncated_normal(rng);
  const double z_cl = truncated_normal(rng);
  const double z_cd = truncated_normal(rng);
  const double z_rho = truncated_normal(rng);
  const double u_amp = uniform(rng, 0.0, 1.0);
  const double u_len = uniform(rng, 0.0, 1.0);
  const double u_phase = uniform(rng, 0.0, 1.0);
  const double u_sign = uniform(rng, 0.0, 1.0);

  DispersionDraw d;
  d.fpa_offset_deg = spec.fpa_three_sigma_deg / 3.0 * z_fpa;
  d.cl_multiplier = 1.0 + spec.cl_three_sigma / 3.0 * z_cl;
  d.cd_multiplier = 1.0 + spec.cd_three_sigma / 3.0 * z_cd;
  d.atmosphere.bias = spec.density_bias_three_sigma / 3.0 * z_rho;
  d.atmosphere.wave_amplitude = spec.density_wave_max * u_amp;
  d.atmosphere.wavelength_m = spec.wavelength_min_m + (spec.wavelength_max_m - spec.wavelength_min_m) * u_len;
  d.atmosphere.phase_rad = spec.random_phase ? 2.0 * std::numbers::pi * u_phase : 0.0;
  const double sign = spec.random_alpha_bias_sign && u_sign < 0.5 ? -1.0 : 1.0;
  d.alpha_bias_deg = sign * spec.alpha_bias_deg;
  return d;
}

RunMetrics compute_metrics(const Trajectory& trajectory, const EnvironmentConstants& env, double window_mps) {
  RunMetrics m;
  const double vs = env.velocity_scale();
  for (const auto& s : trajectory.samples) {
    const double err = std::abs(s.drag - s.guidance.drag_ref);
    m.max_drag_error_g = std::max(m.max_drag_error_g, err);
    if (s.state.v * vs < window_mps) m.max_drag_error_window_g = std::max(m.max_drag_error_window_g, err);
    m.max_delta_alpha_deg = std::max(m.max_delta_alpha_deg, std::abs(s.guidance.delta_alpha_deg));
  }
  m.final_velocity_mps = trajectory.final_state.v * vs;
  m.final_altitude_m = (trajectory.final_state.r - 1.0) * env.earth_radius_m;
  m.final_fpa_deg = trajectory.final_state.gamma * kRadToDeg;
  m.final_time_s = trajectory.final_time_s;
  m.failed = trajectory.failed;
  m.failure_reason = trajectory.failure_reason;
  return m;
}

RunResult run_single(const Scenario& scenario, std::shared_ptr<const ReferenceTrajectory> reference,
                     const DispersionDraw& draw) {
  RunResult out;
  try {
    PlantModel truth = nominal_plant(scenario);
    truth.vehicle.cl_multiplier *= draw.cl_multiplier;
    truth.vehicle.cd_multiplier *= draw.cd_multiplier;
    if (!draw.nominal_atmosphere()) {
      truth.atmosphere = AtmosphereModel::dispersed(scenario.env, draw.atmosphere);
      if (scenario.sound_table) truth.atmosphere.with_sound_table(StandardAtmosphereTable::bundled());
    }
    PropagationConfig pc = scenario.propagation;
    pc.alpha_estimate_bias_deg += draw.alpha_bias_deg;
    const auto& p0 = reference->points().front();
    pc.initial_control = {p0.alpha_deg, p0.sigma};
    auto guidance = make_guidance(reference, scenario.env, scenario.guidance);
    out.trajectory = propagate(entry_state(scenario, draw.fpa_offset_deg), guidance, truth, pc);
    out.metrics = compute_metrics(out.trajectory, scenario.env);
  } catch (const std::exception& e) {
    out.trajectory.failed = true;
    out.trajectory.failure_reason = e.what();
    out.metrics = compute_metrics(out.trajectory, scenario.env);
  }
  return out;
}

BatchResult run_batch(const Scenario& scenario, std::shared_ptr<const ReferenceTrajectory> reference,
                      const DispersionSpec& spec, const BatchConfig& config) {
  spec.validate();
  scenario.validate();
  if (!reference || reference->size() < 3) throw DependencyError("run_batch needs a reference trajectory");

  BatchResult batch;
  batch.controller = scenario.guidance.controller;
  batch.runs.resize(config.runs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.runs; i = next++) {
      RunRecord& rec = batch.runs[i];
      rec.run_id = i;
      rec.seed = config.base_seed + i;
      rec.draw = sample_dispersions(spec, rec.seed);
      auto res = run_single(scenario, reference, rec.draw);
      rec.metrics = std::move(res.metrics);
      if (config.keep_trajectories) rec.trajectory = std::move(res.trajectory);
    }
  };

  unsigned n = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(config.runs, 1)));
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return batch;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw RangeError("percentile of an empty set");
  if (!(q >= 0.0 && q <= 100.0)) throw RangeError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BatchSummary summarize(const BatchResult& batch) {
  BatchSummary s;
  s.controller = batch.controller;
  s.runs = batch.runs.size();
  std::vector<double> win, all, da;
  for (const auto& r : batch.runs) {
    if (r.metrics.failed) {
      ++s.failed;
      continue;
    }
    win.push_back(r.metrics.max_drag_error_window_g);
    all.push_back(r.metrics.max_drag_error_g);
    da.push_back(r.metrics.max_delta_alpha_deg);
  }
  s.drag_error_window = summary_of(win);
  s.drag_error = summary_of(all);
  s.delta_alpha = summary_of(da);
  return s;
}

double fraction_within(const BatchResult& batch, double limit_g) {
  if (batch.runs.empty()) return 0.0;
  const auto ok = std::count_if(batch.runs.begin(), batch.runs.end(), [&](const RunRecord& r) {
    return !r.metrics.failed && r.metrics.max_drag_error_window_g <= limit_g;
  });
  return static_cast<double>(ok) / static_cast<double>(batch.runs.size());
}

void write_metrics_csv(const BatchResult& batch, std::ostream& out) {
  out << "run_id,seed,controller,fpa_offset_deg,cl_multiplier,cd_multiplier,density_bias,density_wave_amplitude,"
         "density_wavelength_m,density_phase_rad,alpha_bias_deg,max_drag_error_below_7000_g,max_drag_error_g,"
         "max_delta_alpha_deg,final_velocity_mps,final_altitude_m,final_fpa_deg,final_time_s,failed,failure_reason\n";
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  for (const auto& r : batch.runs) {
    const auto& d = r.draw;
    const auto& m = r.metrics;
    std::string reason = m.failure_reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    out << r.run_id << ',' << r.seed << ',' << to_string(batch.controller) << ',' << d.fpa_offset_deg << ','
        << d.cl_multiplier << ',' << d.cd_multiplier << ',' << d.atmosphere.bias << ','
        << d.atmosphere.wave_amplitude << ',' << d.atmosphere.wavelength_m << ',' << d.atmosphere.phase_rad << ','
        << d.alpha_bias_deg << ',' << m.max_drag_error_window_g << ',' << m.max_drag_error_g << ','
        << m.max_delta_alpha_deg << ',' << m.final_velocity_mps << ',' << m.final_altitude_m << ','
        << m.final_fpa_deg << ',' << m.final_time_s << ',' << (m.failed ? 1 : 0) << ',' << reason << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

std::string summary_json(const BatchSummary& summary) {
  nlohmann::json j;
  j["controller"] = std::string(to_string(summary.controller));
  j["runs"] = summary.runs;
  j["failed"] = summary.failed;
  j["max_drag_error_below_7000_g"] = to_json(summary.drag_error_window);
  j["max_drag_error_g"] = to_json(summary.drag_error);
  j["max_delta_alpha_deg"] = to_json(summary.delta_alpha);
  return j.dump(2);
}

void write_trajectory_csv(const Trajectory& trajectory, const EnvironmentConstants& env, std::ostream& out) {
  out << "t_s,V_mps,h_m,gamma_deg,alpha_deg,sigma_deg,D_g,L_g,D_ref_g,D_err_g,xi1,xi2_hat,eta1,eta2_hat,dz_hat,mode\n";
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(10);
  const double vs = env.velocity_scale();
  for (const auto& s : trajectory.samples) {
    const auto& g = s.guidance;
    out << s.t_s << ',' << s.state.v * vs << ',' << (s.state.r - 1.0) * env.earth_radius_m << ','
        << s.state.gamma * kRadToDeg << ',' << s.alpha_deg << ',' << s.sigma_rad * kRadToDeg << ',' << s.drag << ','
        << s.lift << ',' << g.drag_ref << ',' << s.drag - g.drag_ref << ',' << g.xi1 << ',' << g.xi2_hat << ','
        << g.eta1 << ',' << g.eta2_hat << ',' << g.dz_hat << ',' << g.mode << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

}  // namespace entry
