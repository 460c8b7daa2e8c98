#include "entry/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "entry/errors.hpp"

namespace entry {

Scenario pinned_scenario() {
  Scenario s;
  s.planner.entry.altitude_m = 85000.0;
  s.planner.entry.velocity_mps = 7800.0;
  s.planner.entry.fpa_deg = -1.0;
  s.planner.grid_spacing_mps = 2.5;
  s.propagation.guidance_rate_hz = 5.0;
  auto& g = s.guidance.gains;
  g.natural_freq = 300.0;
  g.observer_freq = 900.0;
  g.stabilizer_freq = 120.0;
  g.stabilizer_damping = 0.5;
  g.stabilizer_max_increment_deg = 20.0;
  g.delta_alpha_max_deg = 10.0;
  return s;
}

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Range {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = true;
  bool hi_open = true;

  [[nodiscard]] bool contains(double x) const {
    if (!std::isfinite(x)) return false;
    const bool above = lo_open ? x > lo : x >= lo;
    const bool below = hi_open ? x < hi : x <= hi;
    return above && below;
  }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    if (hi == kInf && lo == -kInf) return "must be a finite number";
    if (hi == kInf) {
      if (lo == 0.0) return lo_open ? "must be positive" : "must be non-negative";
      os << (lo_open ? "must be greater than " : "must be at least ") << lo;
      return os.str();
    }
    os << "must lie in " << (lo_open ? '(' : '[') << lo << ", " << hi << (hi_open ? ')' : ']');
    return os.str();
  }
};

const Range kAny{};
const Range kPositive{0.0, kInf, true, true};
const Range kNonNegative{0.0, kInf, false, true};
const Range kUnitFraction{0.0, 1.0, false, true};

Range closed(double lo, double hi) { return {lo, hi, false, false}; }

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + " " + what); }

// The three visitors below share one schema (visit_config) so parsing, emitting
// and range checking cannot drift apart.

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  template <class F>
  void object(std::string_view key, F&& f) {
    if (const json* c = take(key)) {
      if (!c->is_object()) fail(join(path_, key), "must be an object");
      Reader r(*c, join(path_, key));
      f(r);
      r.finish();
    }
  }

  void num(std::string_view key, double& v, const Range& range = kAny) {
    if (const json* c = take(key)) {
      if (!c->is_number()) fail(join(path_, key), "must be a number");
      const double x = c->get<double>();
      if (!range.contains(x)) fail(join(path_, key), range.describe());
      v = x;
    }
  }

  template <class T>
  void count(std::string_view key, T& v, T min_value) {
    if (const json* c = take(key)) {
      if (!c->is_number_integer() && !c->is_number_unsigned()) fail(join(path_, key), "must be an integer");
      if (c->is_number_integer() && c->get<std::int64_t>() < 0) fail(join(path_, key), "must be non-negative");
      const auto x = c->get<std::uint64_t>();
      if (x < static_cast<std::uint64_t>(min_value) || x > std::numeric_limits<T>::max()) {
        fail(join(path_, key), "out of range");
      }
      v = static_cast<T>(x);
    }
  }

  void flag(std::string_view key, bool& v) {
    if (const json* c = take(key)) {
      if (!c->is_boolean()) fail(join(path_, key), "must be true or false");
      v = c->get<bool>();
    }
  }

  void text(std::string_view key, std::string& v) {
    if (const json* c = take(key)) {
      if (!c->is_string()) fail(join(path_, key), "must be a string");
      v = c->get<std::string>();
    }
  }

  void controller(std::string_view key, ControllerKind& v) {
    std::string name(to_string(v));
    text(key, name);
    try {
      v = controller_from_string(name);
    } catch (const ConfigError&) {
      fail(join(path_, key), "must be \"proposed\" or \"shuttle\"");
    }
  }

  void list(std::string_view key, std::vector<double>& v, const Range& range = kAny) {
    if (const json* c = take(key)) {
      if (!c->is_array()) fail(join(path_, key), "must be an array of numbers");
      std::vector<double> out;
      for (std::size_t i = 0; i < c->size(); ++i) {
        const std::string item = join(path_, key) + "[" + std::to_string(i) + "]";
        if (!(*c)[i].is_number()) fail(item, "must be a number");
        const double x = (*c)[i].get<double>();
        if (!range.contains(x)) fail(item, range.describe());
        out.push_back(x);
      }
      v = std::move(out);
    }
  }

  void coeffs(std::string_view key, std::array<double, 4>& v) {
    std::vector<double> tmp(v.begin(), v.end());
    list(key, tmp);
    if (tmp.size() != v.size()) fail(join(path_, key), "must hold exactly 4 coefficients");
    std::copy(tmp.begin(), tmp.end(), v.begin());
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) fail(join(path_, item.key()), "is not a recognised key");
    }
  }

 private:
  const json* take(std::string_view key) {
    seen_.emplace(key);
    const auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

class Writer {
 public:
  explicit Writer(json& j) : j_(j) {}

  template <class F>
  void object(std::string_view key, F&& f) {
    json child = json::object();
    Writer w(child);
    f(w);
    j_[std::string(key)] = std::move(child);
  }
  void num(std::string_view key, double& v, const Range& = kAny) { j_[std::string(key)] = v; }
  template <class T>
  void count(std::string_view key, T& v, T) {
    j_[std::string(key)] = v;
  }
  void flag(std::string_view key, bool& v) { j_[std::string(key)] = v; }
  void text(std::string_view key, std::string& v) { j_[std::string(key)] = v; }
  void controller(std::string_view key, ControllerKind& v) { j_[std::string(key)] = std::string(to_string(v)); }
  void list(std::string_view key, std::vector<double>& v, const Range& = kAny) { j_[std::string(key)] = v; }
  void coeffs(std::string_view key, std::array<double, 4>& v) { j_[std::string(key)] = v; }

 private:
  json& j_;
};

class Checker {
 public:
  explicit Checker(std::string path = {}) : path_(std::move(path)) {}

  template <class F>
  void object(std::string_view key, F&& f) {
    Checker c(join(path_, key));
    f(c);
  }
  void num(std::string_view key, double& v, const Range& range = kAny) {
    if (!range.contains(v)) fail(join(path_, key), range.describe());
  }
  template <class T>
  void count(std::string_view key, T& v, T min_value) {
    if (v < min_value) fail(join(path_, key), "out of range");
  }
  void flag(std::string_view, bool&) {}
  void text(std::string_view, std::string&) {}
  void controller(std::string_view, ControllerKind&) {}
  void list(std::string_view key, std::vector<double>& v, const Range& range = kAny) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!range.contains(v[i])) fail(join(path_, key) + "[" + std::to_string(i) + "]", range.describe());
    }
  }
  void coeffs(std::string_view key, std::array<double, 4>& v) {
    for (double x : v) {
      if (!std::isfinite(x)) fail(join(path_, key), "must hold finite coefficients");
    }
  }

 private:
  std::string path_;
};

template <class V>
void visit_actuator(V& v, ActuatorLimits& a) {
  v.num("min_deg", a.min_value_deg);
  v.num("max_deg", a.max_value_deg);
  v.num("max_rate_degps", a.max_rate_degps, kPositive);
  v.num("max_accel_degps2", a.max_accel_degps2, kPositive);
  v.num("damping", a.damping, kPositive);
  v.num("natural_freq_radps", a.natural_freq_radps, kPositive);
}

template <class V>
void visit_config(V& v, ScenarioConfig& c) {
  Scenario& s = c.scenario;
  v.object("environment", [&](auto& e) {
    e.num("earth_radius_m", s.env.earth_radius_m, kPositive);
    e.num("g0_mps2", s.env.g0_mps2, kPositive);
    e.num("rho0_kg_m3", s.env.rho0_kg_m3, kPositive);
    e.num("scale_height_m", s.env.scale_height_m, kPositive);
    e.num("earth_rate_radps", s.env.earth_rate_radps, kNonNegative);
  });
  v.object("vehicle", [&](auto& e) {
    e.num("mass_kg", s.vehicle.mass_kg, kPositive);
    e.num("reference_area_m2", s.vehicle.reference_area_m2, kPositive);
    e.coeffs("lift_coeffs", s.vehicle.lift_coeffs);
    e.coeffs("drag_coeffs", s.vehicle.drag_coeffs);
  });
  v.object("atmosphere", [&](auto& e) { e.flag("sound_speed_table", s.sound_table); });
  v.object("planner", [&](auto& e) {
    auto& p = s.planner;
    e.object("entry", [&](auto& n) {
      n.num("altitude_m", p.entry.altitude_m, closed(0.0, AtmosphereModel::kMaxAltitudeM));
      n.num("velocity_mps", p.entry.velocity_mps, kPositive);
      n.num("fpa_deg", p.entry.fpa_deg, closed(-90.0, 90.0));
    });
    e.num("heat_rate_constant", p.heat_rate_constant, kPositive);
    e.num("heat_rate_limit", p.heat_rate_limit, kNonNegative);
    e.num("segment_switch_mps", p.segment_switch_mps, kPositive);
    e.num("planning_bank_deg", p.planning_bank_deg, Range{0.0, 80.0, false, true});
    e.num("terminal_velocity_mps", p.terminal_velocity_mps, kPositive);
    e.num("grid_spacing_mps", p.grid_spacing_mps, kPositive);
    e.num("tracker_freq_radps", p.tracker_freq_radps, kPositive);
    e.num("tracker_damping", p.tracker_damping, kPositive);
    e.num("blend_half_width_mps", p.blend_half_width_mps, kPositive);
    e.num("capture_scale_mps", p.capture_scale_mps, kPositive);
    e.num("entry_bank_deg", p.entry_bank_deg, closed(0.0, 80.0));
    e.num("hold_scale_mps", p.hold_scale_mps, kPositive);
  });
  v.object("guidance", [&](auto& e) {
    auto& g = s.guidance.gains;
    e.controller("controller", s.guidance.controller);
    e.num("zeta", g.damping, Range{0.0, 2.0, true, false});
    e.num("omega_n", g.natural_freq, kPositive);
    e.num("observer_zeta", g.observer_damping, kPositive);
    e.num("observer_omega", g.observer_freq, kPositive);
    e.num("eta_omega", g.stabilizer_freq, kPositive);
    e.num("eta_zeta", g.stabilizer_damping, kPositive);
    e.num("max_bank_increment_deg", g.stabilizer_max_increment_deg, Range{0.0, 160.0, true, false});
    e.num("delta_alpha_max_deg", g.delta_alpha_max_deg, Range{0.0, 20.0, true, false});
    e.num("inactive_decay", g.inactive_decay, kNonNegative);
    e.num("bank_drag_gain", g.bank_drag_gain, kPositive);
    e.num("bank_damping", g.bank_damping, kPositive);
    e.flag("stabilizer_enabled", s.guidance.stabilizer_enabled);
    e.flag("modulation_in_track", s.guidance.modulation_in_track);
    e.object("shuttle", [&](auto& n) {
      n.num("alpha_coupling", g.shuttle_alpha_coupling);
      n.num("k_alpha", g.shuttle_k_alpha, kNonNegative);
      n.num("window_mps", g.shuttle_window_mps, kNonNegative);
      n.num("washout_s", g.shuttle_washout_s, kPositive);
    });
    e.object("supervisor", [&](auto& n) {
      auto& sv = s.guidance.supervisor;
      n.num("activation_mps", sv.activation_mps, kPositive);
      n.list("reversal_mps", sv.reversal_mps, kPositive);
      n.num("reversal_complete_deg", sv.reversal_complete_deg, kPositive);
      n.num("eta1_threshold_deg", sv.eta1_threshold_deg, kPositive);
      n.num("eta2_threshold", sv.eta2_threshold, kPositive);
      n.flag("drag_rate_trigger", sv.drag_rate_trigger);
      n.num("drag_rate_threshold", sv.drag_rate_threshold, kPositive);
    });
  });
  v.object("propagation", [&](auto& e) {
    auto& p = s.propagation;
    e.num("dt_s", p.dt_s, kPositive);
    e.num("guidance_rate_hz", p.guidance_rate_hz, kPositive);
    e.num("terminal_velocity_mps", p.terminal_velocity_mps, kPositive);
    e.num("max_time_s", p.max_time_s, kPositive);
    e.num("min_altitude_m", p.min_altitude_m, kNonNegative);
    e.num("alpha_estimate_bias_deg", p.alpha_estimate_bias_deg);
    e.object("bank_actuator", [&](auto& n) { visit_actuator(n, p.bank_actuator); });
    e.object("alpha_actuator", [&](auto& n) { visit_actuator(n, p.alpha_actuator); });
  });
  v.object("dispersions", [&](auto& e) {
    auto& d = c.dispersions;
    e.num("fpa_three_sigma_deg", d.fpa_three_sigma_deg, kNonNegative);
    e.num("cl_three_sigma", d.cl_three_sigma, kUnitFraction);
    e.num("cd_three_sigma", d.cd_three_sigma, kUnitFraction);
    e.num("density_bias_three_sigma", d.density_bias_three_sigma, kUnitFraction);
    e.num("density_wave_max", d.density_wave_max, kUnitFraction);
    e.num("wavelength_min_m", d.wavelength_min_m, kPositive);
    e.num("wavelength_max_m", d.wavelength_max_m, kPositive);
    e.flag("random_phase", d.random_phase);
    e.num("alpha_bias_deg", d.alpha_bias_deg, kNonNegative);
    e.flag("random_alpha_bias_sign", d.random_alpha_bias_sign);
  });
  v.object("monte_carlo", [&](auto& e) {
    e.count("runs", c.mc_runs, std::size_t{1});
    e.count("seed", c.mc_seed, std::uint64_t{0});
    e.count("threads", c.mc_threads, 0u);
  });
  v.object("output", [&](auto& e) { e.text("dir", c.output_dir); });
}

void check_actuator(const ActuatorLimits& a, const char* path) {
  if (!(a.min_value_deg < a.max_value_deg)) fail(std::string(path) + ".min_deg", "must be below max_deg");
}

}  // namespace

void ScenarioConfig::validate() const {
  ScenarioConfig copy = *this;
  Checker checker;
  visit_config(checker, copy);
  const auto& sv = scenario.guidance.supervisor.reversal_mps;
  for (std::size_t i = 1; i < sv.size(); ++i) {
    if (!(sv[i] < sv[i - 1])) fail("guidance.supervisor.reversal_mps", "must be strictly decreasing");
  }
  if (!(dispersions.wavelength_max_m >= dispersions.wavelength_min_m)) {
    fail("dispersions.wavelength_max_m", "must not be below wavelength_min_m");
  }
  if (!(scenario.planner.entry.velocity_mps > scenario.planner.terminal_velocity_mps)) {
    fail("planner.entry.velocity_mps", "must exceed planner.terminal_velocity_mps");
  }
  check_actuator(scenario.propagation.bank_actuator, "propagation.bank_actuator");
  check_actuator(scenario.propagation.alpha_actuator, "propagation.alpha_actuator");
  try {
    scenario.validate();
    dispersions.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

ScenarioConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  ScenarioConfig c;
  Reader r(j, "");
  visit_config(r, c);
  r.finish();
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_config(const ScenarioConfig& config) {
  json j = json::object();
  ScenarioConfig copy = config;
  Writer w(j);
  visit_config(w, copy);
  return j.dump(2) + "\n";
}

}  // namespace entry
