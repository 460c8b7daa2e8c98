#include "entry/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "entry/errors.hpp"

namespace entry {

namespace detail {
extern const std::string_view kUs76Csv;
}

double EnvironmentConstants::velocity_scale() const { return std::sqrt(g0_mps2 * earth_radius_m); }
double EnvironmentConstants::time_scale() const { return std::sqrt(earth_radius_m / g0_mps2); }

void EnvironmentConstants::validate() const {
  if (!(earth_radius_m > 0.0) || !(g0_mps2 > 0.0) || !(rho0_kg_m3 > 0.0) || !(scale_height_m > 0.0)) {
    throw DomainError("environment constants must be strictly positive");
  }
  if (earth_rate_radps < 0.0) throw DomainError("earth rotation rate must be >= 0");
}

void VehicleModel::validate() const {
  if (!(mass_kg > 0.0)) throw DomainError("vehicle mass must be > 0");
  if (!(reference_area_m2 > 0.0)) throw DomainError("reference area must be > 0");
  if (!(cl_multiplier > 0.0) || !(cd_multiplier > 0.0)) throw DomainError("aero multipliers must be > 0");
  for (int i = 0; i <= 50; ++i) {
    if (!(aero_coefficients(static_cast<double>(i), *this).cd > 0.0)) {
      throw DomainError("drag coefficient must be positive over [0, 50] deg");
    }
  }
}

namespace {

double cubic(const std::array<double, 4>& c, double x) { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); }
double cubic_slope(const std::array<double, 4>& c, double x) { return c[1] + x * (2.0 * c[2] + x * 3.0 * c[3]); }

}  // namespace

AeroCoefficients aero_coefficients(double alpha_deg, const VehicleModel& vehicle) {
  if (!(alpha_deg >= VehicleModel::kAlphaMinDeg && alpha_deg <= VehicleModel::kAlphaMaxDeg)) {
    throw DomainError("angle of attack " + std::to_string(alpha_deg) + " deg outside aero fit range [0, 50]");
  }
  return {vehicle.cl_multiplier * cubic(vehicle.lift_coeffs, alpha_deg),
          vehicle.cd_multiplier * cubic(vehicle.drag_coeffs, alpha_deg),
          vehicle.cl_multiplier * cubic_slope(vehicle.lift_coeffs, alpha_deg),
          vehicle.cd_multiplier * cubic_slope(vehicle.drag_coeffs, alpha_deg)};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> log_of(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw DomainError("standard atmosphere density must be positive");
    out[i] = std::log(v[i]);
  }
  return out;
}

}  // namespace

StandardAtmosphereTable::StandardAtmosphereTable(std::vector<double> altitude_m, std::vector<double> density,
                                                 std::vector<double> speed_of_sound)
    : log_density_(altitude_m, log_of(density)), speed_of_sound_(std::move(altitude_m), std::move(speed_of_sound)) {}

StandardAtmosphereTable StandardAtmosphereTable::parse_csv(std::istream& in, const std::string& name) {
  std::string line;
  std::getline(in, line);
  if (line.rfind("altitude_m,density_kg_m3,speed_of_sound_m_s", 0) != 0) {
    throw ConfigError("atmosphere table " + name + ": unexpected header '" + line + "'");
  }
  std::vector<double> h, rho, a;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double values[3];
    for (double& v : values) {
      if (!std::getline(row, cell, ',')) throw ConfigError("atmosphere table " + name + ": short row '" + line + "'");
      v = std::stod(cell);
    }
    h.push_back(values[0]);
    rho.push_back(values[1]);
    a.push_back(values[2]);
  }
  return {std::move(h), std::move(rho), std::move(a)};
}

StandardAtmosphereTable StandardAtmosphereTable::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("cannot open atmosphere table " + path.string());
  return parse_csv(in, path.string());
}

std::shared_ptr<const StandardAtmosphereTable> StandardAtmosphereTable::bundled() {
  static const auto table = [] {
    std::istringstream in{std::string(detail::kUs76Csv)};
    return std::make_shared<const StandardAtmosphereTable>(parse_csv(in, "us76.csv"));
  }();
  return table;
}

double StandardAtmosphereTable::density(double h_m) const { return std::exp(log_density_(h_m)); }

double StandardAtmosphereTable::density_derivative(double h_m) const {
  return density(h_m) * log_density_.derivative(h_m);
}

double StandardAtmosphereTable::speed_of_sound(double h_m) const { return speed_of_sound_(h_m); }

// ---------------------------------------------------------------------------

AtmosphereModel AtmosphereModel::nominal(const EnvironmentConstants& env) {
  return {Kind::NominalExponential, env};
}

AtmosphereModel AtmosphereModel::standard(const EnvironmentConstants& env,
                                          std::shared_ptr<const StandardAtmosphereTable> table) {
  AtmosphereModel m(Kind::StandardTable, env);
  m.table_ = std::move(table);
  return m;
}

AtmosphereModel AtmosphereModel::dispersed(const EnvironmentConstants& env, const AtmosphereDispersion& dispersion) {
  if (!(dispersion.wavelength_m > 0.0)) throw DomainError("dispersion wavelength must be > 0");
  AtmosphereModel m(Kind::Dispersed, env);
  m.dispersion_ = dispersion;
  return m;
}

AtmosphereModel AtmosphereModel::vacuum(const EnvironmentConstants& env) { return {Kind::Vacuum, env}; }

AtmosphereModel& AtmosphereModel::with_sound_table(std::shared_ptr<const StandardAtmosphereTable> table) {
  table_ = std::move(table);
  return *this;
}

AtmosphereModel& AtmosphereModel::with_constant_sound_speed(double a_mps) {
  if (!(a_mps > 0.0)) throw DomainError("speed of sound must be > 0");
  constant_sound_speed_ = a_mps;
  return *this;
}

void AtmosphereModel::check_altitude(double h_m) const {
  if (!(h_m >= 0.0 && h_m <= kMaxAltitudeM)) {
    throw DomainError("altitude " + std::to_string(h_m) + " m outside atmosphere range [0, 150] km");
  }
}

double AtmosphereModel::exponential(double h_m) const {
  return env_.rho0_kg_m3 * std::exp(-h_m / env_.scale_height_m);
}

double AtmosphereModel::dispersion_ratio(double h_m) const {
  const auto& d = dispersion_;
  const double ratio = 1.0 + d.bias + d.wave_amplitude * std::sin(2.0 * kPi * h_m / d.wavelength_m + d.phase_rad);
  return std::clamp(ratio, AtmosphereDispersion::kMinRatio, AtmosphereDispersion::kMaxRatio);
}

double AtmosphereModel::density(double h_m) const {
  check_altitude(h_m);
  switch (kind_) {
    case Kind::NominalExponential:
      return exponential(h_m);
    case Kind::Dispersed:
      return exponential(h_m) * dispersion_ratio(h_m);
    case Kind::StandardTable:
      if (!table_) throw DomainError("standard atmosphere requested without a table");
      return table_->density(h_m);
    case Kind::Vacuum:
      return 0.0;
  }
  return 0.0;
}

double AtmosphereModel::density_gradient(double h_m) const {
  check_altitude(h_m);
  switch (kind_) {
    case Kind::NominalExponential:
      return -exponential(h_m) / env_.scale_height_m;
    case Kind::Dispersed: {
      const auto& d = dispersion_;
      const double raw =
          1.0 + d.bias + d.wave_amplitude * std::sin(2.0 * kPi * h_m / d.wavelength_m + d.phase_rad);
      const double rho = exponential(h_m);
      double slope = 0.0;
      if (raw > AtmosphereDispersion::kMinRatio && raw < AtmosphereDispersion::kMaxRatio) {
        slope = d.wave_amplitude * std::cos(2.0 * kPi * h_m / d.wavelength_m + d.phase_rad) * 2.0 * kPi /
                d.wavelength_m;
      }
      return -rho / env_.scale_height_m * dispersion_ratio(h_m) + rho * slope;
    }
    case Kind::StandardTable:
      if (!table_) throw DomainError("standard atmosphere requested without a table");
      return table_->density_derivative(h_m);
    case Kind::Vacuum:
      return 0.0;
  }
  return 0.0;
}

double AtmosphereModel::speed_of_sound(double h_m) const {
  check_altitude(h_m);
  if (constant_sound_speed_) return *constant_sound_speed_;
  if (!table_) throw DomainError("speed of sound requires a standard table or a constant fallback");
  return table_->speed_of_sound(h_m);
}

double AtmosphereModel::mach(double v_mps, double h_m) const {
  if (v_mps < 0.0) throw DomainError("velocity must be >= 0 for Mach");
  return v_mps / speed_of_sound(h_m);
}

// ---------------------------------------------------------------------------

LiftDrag lift_drag_from_density(double density, double v, const AeroCoefficients& aero,
                                const EnvironmentConstants& env, const VehicleModel& vehicle) {
  const double q = env.earth_radius_m / (2.0 * vehicle.mass_kg) * density * v * v * vehicle.reference_area_m2;
  return {q * aero.cl, q * aero.cd};
}

LiftDrag lift_drag_accels(double r, double v, double alpha_deg, const EnvironmentConstants& env,
                          const VehicleModel& vehicle, const AtmosphereModel& atmosphere) {
  const double h = env.to_altitude(r);
  const auto aero = aero_coefficients(alpha_deg, vehicle);
  if (h > AtmosphereModel::kMaxAltitudeM || atmosphere.kind() == AtmosphereModel::Kind::Vacuum) return {};
  return lift_drag_from_density(atmosphere.density(h), v, aero, env, vehicle);
}

}  // namespace entry
