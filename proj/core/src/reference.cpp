#include "entry/reference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "entry/errors.hpp"

namespace entry {

double alpha_profile(double mach) {
  if (!(mach >= 3.0)) throw DomainError("alpha profile undefined below Mach 3 (M = " + std::to_string(mach) + ")");
  if (mach >= 12.0) return 40.0;
  return -4.3333 + 7.3611 * mach - 0.3056 * mach * mach;
}

double heat_rate(double density, double v_mps, double k_q) { return k_q * std::sqrt(density) * v_mps * v_mps * v_mps; }

ReferencePoint make_reference_point(double r, double v, double gamma, double sigma, double alpha_deg,
                                    const PlantModel& model) {
  const auto& env = model.env;
  const double h = env.to_altitude(r);
  const auto aero = aero_coefficients(alpha_deg, model.vehicle);
  const double rho = model.atmosphere.density(h);
  const double drho_dr = model.atmosphere.density_gradient(h) * env.earth_radius_m;
  const auto ld = lift_drag_from_density(rho, v, aero, env, model.vehicle);
  const double q = env.earth_radius_m / (2.0 * model.vehicle.mass_kg) * v * v * model.vehicle.reference_area_m2;

  ReferencePoint p;
  p.v = v;
  p.r = r;
  p.gamma = gamma;
  p.sigma = sigma;
  p.alpha_deg = alpha_deg;
  p.drag = ld.drag;
  p.lift = ld.lift;
  p.drag_r = q * drho_dr * aero.cd;
  p.lift_r = q * drho_dr * aero.cl;
  p.drag_alpha = q * rho * aero.dcd_dalpha;
  p.lift_alpha = q * rho * aero.dcl_dalpha;
  p.cl = aero.cl;
  p.cd = aero.cd;
  p.dcl_dalpha = aero.dcl_dalpha;
  p.dcd_dalpha = aero.dcd_dalpha;
  p.altitude_m = h;
  p.mach = model.atmosphere.mach(v * env.velocity_scale(), h);
  return p;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kFieldCount = 17;

std::array<double, kFieldCount> to_fields(const ReferencePoint& p) {
  return {p.v,      p.r,      p.gamma,      p.sigma,        p.alpha_deg,    p.drag,
          p.lift,   p.drag_r, p.lift_r,     p.drag_alpha,   p.lift_alpha,   p.cl,
          p.cd,     p.dcl_dalpha, p.dcd_dalpha, p.altitude_m, p.mach};
}

ReferencePoint from_fields(const std::array<double, kFieldCount>& f) {
  return {f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8], f[9], f[10], f[11], f[12], f[13], f[14], f[15], f[16]};
}

constexpr const char* kHeader =
    "v,r,gamma_rad,sigma_rad,alpha_deg,drag,lift,drag_r,lift_r,drag_alpha,lift_alpha,cl,cd,dcl_dalpha,dcd_dalpha,"
    "altitude_m,mach";

}  // namespace

ReferenceTrajectory::ReferenceTrajectory(std::vector<ReferencePoint> points, ReferenceMetadata metadata)
    : points_(std::move(points)), metadata_(std::move(metadata)) {
  if (points_.size() < 3) throw RangeError("reference needs at least three grid nodes");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].v < points_[i - 1].v)) throw RangeError("reference velocities must be strictly decreasing");
  }
  std::vector<double> v(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) v[i] = points_[points_.size() - 1 - i].v;
  fields_.reserve(kFieldCount - 1);
  for (std::size_t f = 1; f < kFieldCount; ++f) {
    std::vector<double> y(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) y[i] = to_fields(points_[points_.size() - 1 - i])[f];
    fields_.emplace_back(v, std::move(y));
  }
}

ReferencePoint ReferenceTrajectory::lookup(double v) const {
  if (!(v >= v_min() && v <= v_max())) {
    throw RangeError("velocity " + std::to_string(v) + " outside reference grid [" + std::to_string(v_min()) + ", " +
                     std::to_string(v_max()) + "]");
  }
  std::array<double, kFieldCount> out{};
  out[0] = v;
  for (std::size_t f = 1; f < kFieldCount; ++f) out[f] = fields_[f - 1](v);
  return from_fields(out);
}

void ReferenceTrajectory::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DependencyError("cannot write reference " + path.string());
  out << std::setprecision(17);
  out << "# heat_rate_constant=" << metadata_.heat_rate_constant << '\n';
  out << "# heat_rate_limit=" << metadata_.heat_rate_limit << '\n';
  out << "# segment_switch_mps=" << metadata_.segment_switch_mps << '\n';
  out << "# planning_bank_deg=" << metadata_.planning_bank_deg << '\n';
  out << "# grid_spacing_mps=" << metadata_.grid_spacing_mps << '\n';
  out << "# breakpoints=";
  for (std::size_t i = 0; i < metadata_.breakpoints.size(); ++i) out << (i ? ";" : "") << metadata_.breakpoints[i];
  out << '\n' << kHeader << '\n';
  for (const auto& p : points_) {
    const auto f = to_fields(p);
    for (std::size_t i = 0; i < kFieldCount; ++i) out << (i ? "," : "") << f[i];
    out << '\n';
  }
}

ReferenceTrajectory ReferenceTrajectory::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("reference file " + path.string() + " not found; run make-reference first");
  ReferenceMetadata meta;
  std::vector<ReferencePoint> points;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "breakpoints") {
        std::istringstream items(value);
        std::string item;
        while (std::getline(items, item, ';')) {
          if (!item.empty()) meta.breakpoints.push_back(std::stod(item));
        }
      } else if (!value.empty()) {
        const double x = std::stod(value);
        if (key == "heat_rate_constant") meta.heat_rate_constant = x;
        else if (key == "heat_rate_limit") meta.heat_rate_limit = x;
        else if (key == "segment_switch_mps") meta.segment_switch_mps = x;
        else if (key == "planning_bank_deg") meta.planning_bank_deg = x;
        else if (key == "grid_spacing_mps") meta.grid_spacing_mps = x;
      }
      continue;
    }
    if (!header_seen) {
      if (line != kHeader) throw ConfigError("reference " + path.string() + ": unexpected header");
      header_seen = true;
      continue;
    }
    std::array<double, kFieldCount> f{};
    std::istringstream row(line);
    std::string cell;
    for (auto& x : f) {
      if (!std::getline(row, cell, ',')) throw ConfigError("reference " + path.string() + ": short row");
      x = std::stod(cell);
    }
    points.push_back(from_fields(f));
  }
  return {std::move(points), std::move(meta)};
}

// ---------------------------------------------------------------------------

namespace {

double softplus(double y, double width) {
  const double z = y / width;
  return z > 30.0 ? y : width * std::log1p(std::exp(z));
}

/// Smooth surrogate of the alpha schedule used only to shape planner targets
/// (the printed schedule jumps by ~0.0065 deg at M = 12).
double alpha_profile_smooth(double mach) {
  constexpr double kPeak = 7.3611 / (2.0 * 0.3056);
  constexpr double kTop = -4.3333 + 7.3611 * kPeak - 0.3056 * kPeak * kPeak;
  const double d = softplus(kPeak - std::max(mach, 3.0), 0.3);
  return kTop - 0.3056 * d * d;
}

double soft_clamp(double x, double lo, double hi, double width) {
  return lo + softplus(x - lo, width) - softplus(x - hi, width);
}

constexpr double kMaxTangencyGapM = 500.0;
// smooth stand-in for the tabulated sound speed when shaping the target altitude
constexpr double kPlanningSoundSpeed = 310.0;

class Planner {
 public:
  Planner(const PlannerConfig& cfg, const PlantModel& model) : cfg_(cfg), model_(model) {
    const auto& env = model_.env;
    cos_plan_ = std::cos(cfg_.planning_bank_deg * kDegToRad);
    if (!(cfg_.planning_bank_deg >= 0.0 && cfg_.planning_bank_deg < 80.0) || !(cos_plan_ > 0.0)) {
      throw PlanningError("planning bank " + std::to_string(cfg_.planning_bank_deg) +
                          " deg infeasible; must lie in [0, 80) deg");
    }
    limit_ = cfg_.heat_rate_limit;
    if (!(limit_ > 0.0)) {
      const double v = cfg_.segment_switch_mps / env.velocity_scale();
      const double h = equilibrium_altitude(v);
      limit_ = heat_rate(model_.atmosphere.density(h), cfg_.segment_switch_mps, cfg_.heat_rate_constant);
    }
    const double v_hi = cfg_.entry.velocity_mps / env.velocity_scale();
    const double v_lo = cfg_.terminal_velocity_mps / env.velocity_scale();
    auto gap = [&](double v) { return heat_altitude(v) - equilibrium_altitude(v); };
    if (cfg_.heat_rate_limit > 0.0) {
      // first crossing below entry velocity, or the closest approach when tangent
      const double step = 10.0 / env.velocity_scale();
      double best_v = v_hi;
      double best_gap = std::abs(gap(v_hi));
      double prev = gap(v_hi);
      bool crossed = false;
      for (double v = v_hi - step; v > v_lo; v -= step) {
        const double g = gap(v);
        if (std::abs(g) < best_gap) {
          best_gap = std::abs(g);
          best_v = v;
        }
        if ((g > 0.0) != (prev > 0.0)) {
          double lo = v;
          double hi = v + step;
          for (int i = 0; i < 80; ++i) {
            const double mid = 0.5 * (lo + hi);
            ((gap(mid) > 0.0) == (g > 0.0) ? lo : hi) = mid;
          }
          best_v = 0.5 * (lo + hi);
          crossed = true;
          break;
        }
        prev = g;
      }
      if (!crossed && best_gap > kMaxTangencyGapM) {
        throw PlanningError("constant heat-rate and equilibrium-glide segments do not intersect (closest approach " +
                            std::to_string(best_gap) + " m); adjust heat_rate_limit or planning_bank_deg");
      }
      switch_mps_ = best_v * env.velocity_scale();
    } else {
      switch_mps_ = cfg_.segment_switch_mps;
    }
    if (!(switch_mps_ < cfg_.entry.velocity_mps && switch_mps_ > cfg_.terminal_velocity_mps)) {
      throw PlanningError("segment switch velocity outside the planned span");
    }
    if (!(cfg_.capture_scale_mps > 0.0 && cfg_.hold_scale_mps > 0.0)) {
      throw PlanningError("capture and hold scales must be positive");
    }
    if (!(cfg_.entry_bank_deg >= 0.0 && cfg_.entry_bank_deg <= 80.0)) throw PlanningError("entry bank outside [0, 80] deg");
    capture_offset_ = env.to_radius(cfg_.entry.altitude_m) - plan_radius(v_hi);
    entry_bank_ = cfg_.entry_bank_deg * kDegToRad;
  }

  [[nodiscard]] double heat_limit() const { return limit_; }
  [[nodiscard]] double switch_velocity_mps() const { return switch_mps_; }

  /// Altitude where the heat rate equals the limit.
  [[nodiscard]] double heat_altitude(double v) const {
    const double v_mps = v * model_.env.velocity_scale();
    const double rho = std::pow(limit_ / (cfg_.heat_rate_constant * v_mps * v_mps * v_mps), 2.0);
    return -model_.env.scale_height_m * std::log(rho / model_.env.rho0_kg_m3);
  }

  /// Altitude of the constant-bank equilibrium glide at V.
  [[nodiscard]] double equilibrium_altitude(double v) const {
    const auto& env = model_.env;
    double h = 60000.0;
    for (int it = 0; it < 50; ++it) {
      const double r = env.to_radius(h);
      const double mach = v * env.velocity_scale() / kPlanningSoundSpeed;
      const auto aero = aero_coefficients(alpha_profile_smooth(mach), model_.vehicle);
      const double lift_needed = (1.0 / r - v * v) / r / cos_plan_;
      if (!(lift_needed > 0.0)) throw PlanningError("equilibrium glide undefined at or above circular speed");
      const double q = env.earth_radius_m / (2.0 * model_.vehicle.mass_kg) * v * v * model_.vehicle.reference_area_m2;
      const double rho = lift_needed / (q * aero.cl);
      const double h_new = -env.scale_height_m * std::log(rho / env.rho0_kg_m3);
      if (std::abs(h_new - h) < 1e-9) return h_new;
      h = h_new;
    }
    return h;
  }

  [[nodiscard]] double plan_radius(double v) const {
    const double vs = model_.env.velocity_scale();
    const double w = 0.5 * (1.0 + std::tanh((v * vs - switch_mps_) / cfg_.blend_half_width_mps));
    return model_.env.to_radius(w * heat_altitude(v) + (1.0 - w) * equilibrium_altitude(v));
  }

  /// Plan plus a Gaussian capture term that starts at the entry altitude.
  [[nodiscard]] double target_radius(double v) const {
    const double scale = cfg_.capture_scale_mps / model_.env.velocity_scale();
    const double s = cfg_.entry.velocity_mps / model_.env.velocity_scale() - v;
    const double capture = capture_offset_ * std::exp(-(s / scale) * (s / scale));
    return plan_radius(v) + capture;
  }

  /// Entry bank held through the pull-up, then handed over to the altitude tracker.
  [[nodiscard]] double bank(double r, double gamma, double v, double alpha_deg) const {
    const double s = (cfg_.entry.velocity_mps - v * model_.env.velocity_scale()) / cfg_.hold_scale_mps;
    const double hold = std::exp(-s * s);
    return hold * entry_bank_ + (1.0 - hold) * tracker_bank(r, gamma, v, alpha_deg);
  }

  [[nodiscard]] double tracker_bank(double r, double gamma, double v, double alpha_deg) const {
    const auto ld = lift_drag_accels(r, v, alpha_deg, model_.env, model_.vehicle, model_.atmosphere);
    const double dv_dt = -ld.drag - std::sin(gamma) / (r * r);
    constexpr double dv = 2e-4;
    const double rd = target_radius(v);
    const double rd_p = target_radius(v + dv);
    const double rd_m = target_radius(v - dv);
    const double slope = (rd_p - rd_m) / (2.0 * dv);
    const double curvature = (rd_p - 2.0 * rd + rd_m) / (dv * dv);
    const double w = cfg_.tracker_freq_radps * model_.env.time_scale();
    const double z = cfg_.tracker_damping;
    const double rdot = v * std::sin(gamma);
    const double rdot_d = slope * dv_dt;
    const double rddot_d = curvature * dv_dt * dv_dt;
    const double rddot = rddot_d - 2.0 * z * w * (rdot - rdot_d) - w * w * (r - rd);
    const double lift_vertical =
        (rddot - dv_dt * std::sin(gamma)) / std::cos(gamma) - (v * v - 1.0 / r) * std::cos(gamma) / r;
    const double versine = soft_clamp(1.0 - lift_vertical / ld.lift, 0.0, 1.0 - kCosMax, 0.05);
    return std::acos(1.0 - versine);
  }

  [[nodiscard]] double alpha(double r, double v) const {
    const double h = model_.env.to_altitude(r);
    return alpha_profile(model_.atmosphere.mach(v * model_.env.velocity_scale(), h));
  }

 private:
  static inline const double kCosMax = std::cos(80.0 * kDegToRad);
  const PlannerConfig& cfg_;
  const PlantModel& model_;
  double cos_plan_ = 1.0;
  double limit_ = 0.0;
  double switch_mps_ = 0.0;
  double capture_offset_ = 0.0;
  double entry_bank_ = 0.0;
};

}  // namespace

ReferenceTrajectory generate_reference(const PlannerConfig& cfg, const PlantModel& model) {
  const auto& env = model.env;
  if (!(cfg.grid_spacing_mps > 0.0 && cfg.grid_spacing_mps <= 10.0)) {
    throw PlanningError("grid spacing must lie in (0, 10] m/s");
  }
  if (!(cfg.terminal_velocity_mps < cfg.entry.velocity_mps)) throw PlanningError("terminal velocity above entry");
  const Planner planner(cfg, model);

  const double dv = -cfg.grid_spacing_mps / env.velocity_scale();
  const auto n = static_cast<std::size_t>(
      std::floor((cfg.entry.velocity_mps - cfg.terminal_velocity_mps) / cfg.grid_spacing_mps + 1e-9));

  auto control = [&](double r, double gamma, double v) {
    const double alpha = planner.alpha(r, v);
    return ControlInput{alpha, planner.bank(r, gamma, v, alpha)};
  };
  auto rhs = [&](double r, double gamma, double v) {
    const auto d = eom_velocity_domain(r, gamma, v, control(r, gamma, v), model);
    return std::array<double, 2>{d.dr_dv, d.dgamma_dv};
  };

  std::vector<ReferencePoint> points;
  points.reserve(n + 1);
  ReferenceMetadata meta;
  meta.heat_rate_constant = cfg.heat_rate_constant;
  meta.heat_rate_limit = planner.heat_limit();
  meta.segment_switch_mps = planner.switch_velocity_mps();
  meta.planning_bank_deg = cfg.planning_bank_deg;
  meta.grid_spacing_mps = cfg.grid_spacing_mps;

  double r = env.to_radius(cfg.entry.altitude_m);
  double gamma = cfg.entry.fpa_deg * kDegToRad;
  double v = cfg.entry.velocity_mps / env.velocity_scale();
  try {
    for (std::size_t i = 0; i <= n; ++i) {
      const auto u = control(r, gamma, v);
      points.push_back(make_reference_point(r, v, gamma, u.sigma_rad, u.alpha_deg, model));
      if (i > 0 && (points[i - 1].mach >= 12.0) != (points[i].mach >= 12.0)) {
        meta.breakpoints.push_back(0.5 * (points[i - 1].v + points[i].v));
      }
      if (i == n) break;
      const auto k1 = rhs(r, gamma, v);
      const auto k2 = rhs(r + 0.5 * dv * k1[0], gamma + 0.5 * dv * k1[1], v + 0.5 * dv);
      const auto k3 = rhs(r + 0.5 * dv * k2[0], gamma + 0.5 * dv * k2[1], v + 0.5 * dv);
      const auto k4 = rhs(r + dv * k3[0], gamma + dv * k3[1], v + dv);
      r += dv / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
      gamma += dv / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
      v = (cfg.entry.velocity_mps - static_cast<double>(i + 1) * cfg.grid_spacing_mps) / env.velocity_scale();
    }
  } catch (const DomainError& e) {
    throw PlanningError(std::string("reference flight left the model domain: ") + e.what());
  } catch (const SingularityError& e) {
    throw PlanningError(std::string("reference flight became non-monotone in velocity: ") + e.what());
  }
  return {std::move(points), std::move(meta)};
}

double reference_consistency_residual(const ReferenceTrajectory& ref, const PlantModel& model) {
  const auto& pts = ref.points();
  const auto& breaks = ref.metadata().breakpoints;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double v_hi = pts[i - 1].v;
    const double v_lo = pts[i + 1].v;
    const bool straddles =
        std::any_of(breaks.begin(), breaks.end(), [&](double b) { return b > v_lo && b < v_hi; });
    if (straddles) continue;
    const double dr = (pts[i + 1].r - pts[i - 1].r) / (v_lo - v_hi);
    const double dg = (pts[i + 1].gamma - pts[i - 1].gamma) / (v_lo - v_hi);
    const auto f = eom_velocity_domain(pts[i].r, pts[i].gamma, pts[i].v, {pts[i].alpha_deg, pts[i].sigma}, model);
    worst = std::max(worst, std::hypot(dr - f.dr_dv, dg - f.dgamma_dv));
  }
  return worst;
}

}  // namespace entry
