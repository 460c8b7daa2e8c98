#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "entry/errors.hpp"
#include "entry/linearization.hpp"
#include "entry/mc_harness.hpp"

namespace entrysim {

namespace fs = std::filesystem;
using entry::ControllerKind;

namespace {

constexpr const char* kReferenceFile = "reference.csv";
constexpr double kTrackingStrideMps = 10.0;
constexpr double kResidualTolerance = 1e-4;

std::vector<ControllerKind> selected_controllers(const std::string& name) {
  if (name == "both") return {ControllerKind::Proposed, ControllerKind::Shuttle};
  try {
    return {entry::controller_from_string(name)};
  } catch (const entry::ConfigError&) {
    throw entry::ConfigError("--controller must be proposed, shuttle or both (got \"" + name + "\")");
  }
}

fs::path output_dir(const entry::ScenarioConfig& config, const Options& options) {
  fs::path dir = options.out.empty() ? fs::path(config.output_dir) : options.out;
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw entry::DependencyError("cannot write " + path.string());
  return out;
}

std::shared_ptr<const entry::ReferenceTrajectory> load_reference(const fs::path& dir) {
  return std::make_shared<const entry::ReferenceTrajectory>(entry::ReferenceTrajectory::load_csv(dir / kReferenceFile));
}

entry::Scenario with_controller(entry::Scenario s, ControllerKind kind) {
  s.guidance.controller = kind;
  return s;
}

std::string controller_name(ControllerKind kind) { return std::string(entry::to_string(kind)); }

// Minimal reader for the metrics CSV written by run-mc.
struct MetricTable {
  std::string controller;
  std::size_t runs = 0;
  std::size_t failed = 0;
  std::map<std::string, std::vector<double>> columns;  ///< non-failed runs only
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

const std::vector<std::string> kComparedMetrics{"max_drag_error_below_7000_g", "max_drag_error_g",
                                                "max_delta_alpha_deg"};

MetricTable read_metrics(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw entry::DependencyError("metrics file " + path.string() + " not found; run run-mc first");
  std::string line;
  if (!std::getline(in, line)) throw entry::ConfigError(path.string() + ": empty metrics file");
  const auto header = split(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw entry::ConfigError(path.string() + ": missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t failed_col = column("failed");
  const std::size_t controller_col = column("controller");
  std::map<std::string, std::size_t> metric_cols;
  for (const auto& m : kComparedMetrics) metric_cols[m] = column(m);

  MetricTable table;
  for (const auto& m : kComparedMetrics) table.columns[m];
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw entry::ConfigError(path.string() + ": row " + std::to_string(table.runs + 1) + " has the wrong width");
    }
    ++table.runs;
    table.controller = cells[controller_col];
    if (cells[failed_col] != "0") {
      ++table.failed;
      continue;
    }
    for (const auto& [name, col] : metric_cols) table.columns[name].push_back(std::stod(cells[col]));
  }
  return table;
}

}  // namespace

void write_tracking_csv(const entry::Trajectory& trajectory, const entry::ReferenceTrajectory& reference,
                        const entry::EnvironmentConstants& env, double stride_mps, std::ostream& out) {
  out << "V_mps,D_ref_g,alpha_ref_deg,sigma_ref_deg,D_g,D_err_g,alpha_deg,sigma_deg,h_m,gamma_deg,eta1\n";
  const auto& samples = trajectory.samples;
  if (samples.size() < 2) return;
  const double vs = env.velocity_scale();
  const double v_start = samples.front().state.v;
  const double v_end = samples.back().state.v;
  const double spacing = reference.metadata().grid_spacing_mps;
  const auto stride = static_cast<std::size_t>(std::max(1.0, std::round(stride_mps / spacing)));

  out << std::setprecision(10);
  std::size_t k = 1;
  const auto& nodes = reference.points();
  for (std::size_t i = 0; i < nodes.size(); i += stride) {
    const auto& p = nodes[i];
    if (p.v > v_start || p.v < v_end) continue;
    // First downward crossing of this velocity; V can rise briefly near the entry interface.
    while (k < samples.size() && samples[k].state.v > p.v) ++k;
    if (k >= samples.size()) break;
    const auto& a = samples[k - 1];
    const auto& b = samples[k];
    const double dv = a.state.v - b.state.v;
    const double w = dv > 0.0 ? (a.state.v - p.v) / dv : 1.0;
    auto lerp = [w](double x, double y) { return x + w * (y - x); };
    const double drag = lerp(a.drag, b.drag);
    out << p.v * vs << ',' << p.drag << ',' << p.alpha_deg << ',' << p.sigma * entry::kRadToDeg << ',' << drag << ','
        << drag - p.drag << ',' << lerp(a.alpha_deg, b.alpha_deg) << ','
        << lerp(a.sigma_rad, b.sigma_rad) * entry::kRadToDeg << ','
        << (lerp(a.state.r, b.state.r) - 1.0) * env.earth_radius_m << ','
        << lerp(a.state.gamma, b.state.gamma) * entry::kRadToDeg << ','
        << lerp(a.guidance.eta1, b.guidance.eta1) << '\n';
  }
}

int make_reference(const entry::ScenarioConfig& config, const Options& options) {
  const fs::path dir = output_dir(config, options);
  const auto& s = config.scenario;
  const auto reference = entry::build_reference(s);
  const double residual = entry::reference_consistency_residual(reference, entry::nominal_plant(s));
  reference.save_csv(dir / kReferenceFile);
  spdlog::info("reference: {} nodes, {:.1f} -> {:.1f} m/s, consistency residual {:.3e}", reference.size(),
               reference.v_max() * s.env.velocity_scale(), reference.v_min() * s.env.velocity_scale(), residual);
  if (!(residual < kResidualTolerance)) {
    spdlog::error("consistency residual {:.3e} exceeds {:.0e}", residual, kResidualTolerance);
    return kExitRunFailed;
  }
  return kExitOk;
}

int analyze_zero_dynamics(const entry::ScenarioConfig& config, const Options& options) {
  const fs::path dir = output_dir(config, options);
  const auto reference = load_reference(dir);
  const auto& env = config.scenario.env;
  auto out = open_output(dir / "zero_dynamics.csv");
  out << "V_mps,Gamma1,Gamma2,eig_re1,eig_im1,eig_re2,eig_im2,classification,drag_polar_slope_minus_LoverD,"
         "fpa_rate_sign\n";
  out << std::setprecision(17);
  std::size_t errors = 0;
  std::map<std::string, std::size_t> counts;
  for (const auto& p : reference->points()) {
    try {
      const auto z = entry::analyze_zero_dynamics(p, env);
      const std::string cls(entry::to_string(z.condition));
      ++counts[cls];
      out << p.v * env.velocity_scale() << ',' << z.gamma1 << ',' << z.gamma2 << ',' << z.eigenvalues[0].real() << ','
          << z.eigenvalues[0].imag() << ',' << z.eigenvalues[1].real() << ',' << z.eigenvalues[1].imag() << ',' << cls
          << ',' << z.drag_polar_slope_minus_lod << ',' << z.fpa_rate_sign << '\n';
    } catch (const std::exception& e) {
      ++errors;
      spdlog::error("zero-dynamics analysis failed at V = {:.1f} m/s: {}", p.v * env.velocity_scale(), e.what());
    }
  }
  for (const auto& [cls, n] : counts) spdlog::info("{}: {} nodes", cls, n);
  return errors == 0 ? kExitOk : kExitRunFailed;
}

int run_nominal(const entry::ScenarioConfig& config, const Options& options) {
  const auto controllers = selected_controllers(options.controller);
  const fs::path dir = output_dir(config, options);
  const auto reference = load_reference(dir);
  const auto& env = config.scenario.env;
  int status = kExitOk;
  for (const auto kind : controllers) {
    const auto name = controller_name(kind);
    const auto result = entry::run_single(with_controller(config.scenario, kind), reference, entry::DispersionDraw{});
    {
      auto out = open_output(dir / ("trajectory_" + name + ".csv"));
      entry::write_trajectory_csv(result.trajectory, env, out);
    }
    {
      auto out = open_output(dir / ("tracking_" + name + ".csv"));
      write_tracking_csv(result.trajectory, *reference, env, kTrackingStrideMps, out);
    }
    const auto& m = result.metrics;
    if (m.failed) {
      spdlog::error("{}: run failed: {}", name, m.failure_reason);
      status = kExitRunFailed;
    } else {
      spdlog::info("{}: drag error below 7000 m/s {:.3e} g, max delta alpha {:.2f} deg, final V {:.1f} m/s", name,
                   m.max_drag_error_window_g, m.max_delta_alpha_deg, m.final_velocity_mps);
    }
  }
  return status;
}

int run_mc(const entry::ScenarioConfig& config, const Options& options) {
  const auto controllers = selected_controllers(options.controller);
  const fs::path dir = output_dir(config, options);
  const auto reference = load_reference(dir);
  entry::BatchConfig batch_config;
  batch_config.runs = options.runs.value_or(config.mc_runs);
  batch_config.base_seed = options.seed.value_or(config.mc_seed);
  batch_config.threads = options.threads.value_or(config.mc_threads);
  if (batch_config.runs == 0) throw entry::ConfigError("--runs must be at least 1");

  int status = kExitOk;
  for (const auto kind : controllers) {
    const auto name = controller_name(kind);
    spdlog::info("{}: {} runs from seed {}", name, batch_config.runs, batch_config.base_seed);
    const auto batch =
        entry::run_batch(with_controller(config.scenario, kind), reference, config.dispersions, batch_config);
    {
      auto out = open_output(dir / ("metrics_" + name + ".csv"));
      entry::write_metrics_csv(batch, out);
    }
    const auto summary = entry::summarize(batch);
    {
      auto out = open_output(dir / ("summary_" + name + ".json"));
      out << entry::summary_json(summary) << '\n';
    }
    spdlog::info("{}: drag error below 7000 m/s p50 {:.3e} p95 {:.3e} max {:.3e} g; {:.1f}% within 1e-2 g", name,
                 summary.drag_error_window.p50, summary.drag_error_window.p95, summary.drag_error_window.max,
                 100.0 * entry::fraction_within(batch, 1e-2));
    if (summary.failed > 0) {
      spdlog::error("{}: {} of {} runs failed", name, summary.failed, summary.runs);
      status = kExitRunFailed;
    }
  }
  return status;
}

int compare(const Options& options) {
  if (options.inputs.size() != 2) throw entry::ConfigError("compare needs exactly two metric CSV files");
  const auto first = read_metrics(options.inputs[0]);
  const auto second = read_metrics(options.inputs[1]);
  fs::path dir = options.out.empty() ? fs::path(".") : options.out;
  fs::create_directories(dir);
  auto out = open_output(dir / "comparison.csv");
  out << "# first=" << options.inputs[0].filename().string() << " (" << first.controller << ")\n";
  out << "# second=" << options.inputs[1].filename().string() << " (" << second.controller << ")\n";
  out << "metric,statistic,first,second,difference,ratio_first_over_second\n";
  out << std::setprecision(10);
  auto row = [&](const std::string& metric, const std::string& stat, double a, double b) {
    out << metric << ',' << stat << ',' << a << ',' << b << ',' << b - a << ',';
    if (b != 0.0) out << a / b;
    else if (a == 0.0) out << 1;
    out << '\n';
  };
  row("runs", "count", static_cast<double>(first.runs), static_cast<double>(second.runs));
  row("failed", "count", static_cast<double>(first.failed), static_cast<double>(second.failed));
  for (const auto& metric : kComparedMetrics) {
    const auto& a = first.columns.at(metric);
    const auto& b = second.columns.at(metric);
    if (a.empty() || b.empty()) throw entry::ConfigError("compare: no successful runs to summarise");
    for (const auto& [stat, q] : std::vector<std::pair<std::string, double>>{{"p50", 50.0}, {"p95", 95.0}, {"max", 100.0}}) {
      row(metric, stat, entry::percentile(a, q), entry::percentile(b, q));
    }
  }
  const double p95a = entry::percentile(first.columns.at(kComparedMetrics[0]), 95.0);
  const double p95b = entry::percentile(second.columns.at(kComparedMetrics[0]), 95.0);
  spdlog::info("95th-percentile drag error: {} {:.3e} g, {} {:.3e} g", first.controller, p95a, second.controller, p95b);
  return kExitOk;
}

int run_subcommand(const std::string& name, const entry::ScenarioConfig& config, const Options& options) {
  if (name == "make-reference") return make_reference(config, options);
  if (name == "analyze-zero-dynamics") return analyze_zero_dynamics(config, options);
  if (name == "run-nominal") return run_nominal(config, options);
  if (name == "run-mc") return run_mc(config, options);
  if (name == "compare") return compare(options);
  throw entry::ConfigError("unknown subcommand " + name);
}

}  // namespace entrysim
