#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <memory>
#include <optional>

#include "entry/interpolation.hpp"

namespace entry {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

struct EnvironmentConstants {
  double earth_radius_m = 6.378137e6;
  double g0_mps2 = 9.80665;
  double rho0_kg_m3 = 1.225;
  double scale_height_m = 7200.0;
  double earth_rate_radps = 0.0;  ///< dimensional; the longitudinal plant runs with 0

  [[nodiscard]] double velocity_scale() const;  ///< sqrt(g0 Re), m/s
  [[nodiscard]] double time_scale() const;      ///< sqrt(Re/g0), s

  [[nodiscard]] double to_altitude(double r) const { return (r - 1.0) * earth_radius_m; }
  [[nodiscard]] double to_radius(double h_m) const { return 1.0 + h_m / earth_radius_m; }

  void validate() const;
};

struct AeroCoefficients {
  double cl = 0.0;
  double cd = 0.0;
  double dcl_dalpha = 0.0;  ///< per deg
  double dcd_dalpha = 0.0;  ///< per deg
};

/// Point-mass vehicle with cubic-in-alpha (deg) aerodynamic fits.
struct VehicleModel {
  double mass_kg = 1000.0;
  double reference_area_m2 = 5.0;
  std::array<double, 4> lift_coeffs{0.12457, -0.02437, 0.00309, -3.66023e-5};
  std::array<double, 4> drag_coeffs{0.32083, -0.02850, 0.00155, -9.42499e-7};
  /// Multiplicative dispersions of the coefficients; the plant truth uses them,
  /// guidance models keep 1.
  double cl_multiplier = 1.0;
  double cd_multiplier = 1.0;

  static constexpr double kAlphaMinDeg = 0.0;
  static constexpr double kAlphaMaxDeg = 50.0;

  void validate() const;
};

/// Throws DomainError for alpha outside [0, 50] deg.
[[nodiscard]] AeroCoefficients aero_coefficients(double alpha_deg, const VehicleModel& vehicle);

/// 1976 US Standard Atmosphere sampled on an altitude grid.
class StandardAtmosphereTable {
 public:
  StandardAtmosphereTable(std::vector<double> altitude_m, std::vector<double> density,
                          std::vector<double> speed_of_sound);

  /// Reads a CSV with columns altitude_m, density_kg_m3, speed_of_sound_m_s.
  static StandardAtmosphereTable load_csv(const std::filesystem::path& path);
  static StandardAtmosphereTable parse_csv(std::istream& in, const std::string& name);
  /// The table compiled into the library (core/data/us76.csv).
  static std::shared_ptr<const StandardAtmosphereTable> bundled();

  [[nodiscard]] double density(double h_m) const;
  [[nodiscard]] double density_derivative(double h_m) const;  ///< d rho / dh
  [[nodiscard]] double speed_of_sound(double h_m) const;
  [[nodiscard]] double min_altitude() const { return log_density_.front(); }
  [[nodiscard]] double max_altitude() const { return log_density_.back(); }

 private:
  MonotoneCubic log_density_;
  MonotoneCubic speed_of_sound_;
};

/// Bias-plus-sinusoid perturbation applied multiplicatively to nominal density.
struct AtmosphereDispersion {
  double bias = 0.0;
  double wave_amplitude = 0.0;
  double wavelength_m = 8000.0;
  double phase_rad = 0.0;

  static constexpr double kMinRatio = 0.5;
  static constexpr double kMaxRatio = 1.5;
};

class AtmosphereModel {
 public:
  enum class Kind { NominalExponential, StandardTable, Dispersed, Vacuum };

  static constexpr double kMaxAltitudeM = 150000.0;

  static AtmosphereModel nominal(const EnvironmentConstants& env);
  static AtmosphereModel standard(const EnvironmentConstants& env,
                                  std::shared_ptr<const StandardAtmosphereTable> table);
  static AtmosphereModel dispersed(const EnvironmentConstants& env, const AtmosphereDispersion& dispersion);
  static AtmosphereModel vacuum(const EnvironmentConstants& env);

  [[nodiscard]] Kind kind() const { return kind_; }

  /// kg/m^3. Throws DomainError outside [0, 150] km.
  [[nodiscard]] double density(double h_m) const;
  /// d rho / dh, kg/m^4.
  [[nodiscard]] double density_gradient(double h_m) const;
  /// m/s. Uses the constant fallback when set, otherwise the standard table.
  [[nodiscard]] double speed_of_sound(double h_m) const;
  [[nodiscard]] double mach(double v_mps, double h_m) const;

  /// Table used for the speed of sound (and density when kind = StandardTable).
  AtmosphereModel& with_sound_table(std::shared_ptr<const StandardAtmosphereTable> table);
  /// Constant speed of sound, table-free.
  AtmosphereModel& with_constant_sound_speed(double a_mps);

  [[nodiscard]] const AtmosphereDispersion& dispersion() const { return dispersion_; }

 private:
  AtmosphereModel(Kind kind, const EnvironmentConstants& env) : kind_(kind), env_(env) {}

  [[nodiscard]] double exponential(double h_m) const;
  [[nodiscard]] double dispersion_ratio(double h_m) const;
  void check_altitude(double h_m) const;

  Kind kind_;
  EnvironmentConstants env_;
  AtmosphereDispersion dispersion_{};
  std::shared_ptr<const StandardAtmosphereTable> table_;
  std::optional<double> constant_sound_speed_;
};

struct LiftDrag {
  double lift = 0.0;  ///< g0 units
  double drag = 0.0;  ///< g0 units
};

/// Nondimensional lift and drag accelerations, L = Re/(2m) rho V^2 S C_L.
/// Returns zero above the atmosphere cutoff.
[[nodiscard]] LiftDrag lift_drag_accels(double r, double v, double alpha_deg, const EnvironmentConstants& env,
                                        const VehicleModel& vehicle, const AtmosphereModel& atmosphere);

/// Same, given the density directly.
[[nodiscard]] LiftDrag lift_drag_from_density(double density, double v, const AeroCoefficients& aero,
                                              const EnvironmentConstants& env, const VehicleModel& vehicle);

}  // namespace entry
