#pragma once

#include <array>
#include <complex>
#include <string_view>

#include <Eigen/Dense>

#include "entry/env.hpp"
#include "entry/reference.hpp"

namespace entry {

/// Error-dynamics matrices in the velocity domain, state e = (dr, dgamma).
struct Jacobians {
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
};

struct LinearizedSystem {
  Jacobians full;
  Jacobians simplified;
  Eigen::RowVector2d c = Eigen::RowVector2d::Zero();  ///< [D_r, 0]
  double chi = 0.0;                                   ///< D_alpha, g per deg
  ReferencePoint at;
};

/// Exact Jacobians of the velocity-domain dynamics about a reference node.
/// Throws SingularityError when D r^2 + sin(gamma) vanishes.
[[nodiscard]] Jacobians full_jacobians(const ReferencePoint& p);

/// Near-equilibrium-glide approximation of the Jacobians.
[[nodiscard]] Jacobians simplified_jacobians(const ReferencePoint& p);

/// Builds both Jacobian sets plus C and chi, checking chi != 0 and that [C; C A_bar] is invertible.
[[nodiscard]] LinearizedSystem linearize(const ReferencePoint& p);

struct AssumptionResiduals {
  double radius = 0.0;             ///< |r - 1|
  double flight_path = 0.0;        ///< |sin(gamma)|
  double radius_sensitivity = 0.0; ///< |L_r D - D_r L| |cos(sigma)| / |D_r L|
  double equilibrium = 0.0;        ///< |D (V^2 - 2)|
};

[[nodiscard]] AssumptionResiduals assumption_residuals(const ReferencePoint& p);

/// Output-dynamics coefficients of the dynamically extended system:
/// y'' = k_xi (y, y') + k_eta1 du + k_rate du' + chi du^v.
struct ExtendedCoefficients {
  Eigen::RowVector2d k_xi = Eigen::RowVector2d::Zero();
  double k_eta1 = 0.0;
  double k_rate = 0.0;
  double chi = 0.0;
};

[[nodiscard]] ExtendedCoefficients extended_coefficients(const LinearizedSystem& lin);

struct ExtendedDrift {
  Eigen::Vector4d f = Eigen::Vector4d::Zero();
  Eigen::Vector4d g = Eigen::Vector4d::Zero();
};

/// Drift and input vector of z = (y, y', du, du').
[[nodiscard]] ExtendedDrift extended_drift(const LinearizedSystem& lin, const Eigen::Vector4d& z);

struct NormalFormState {
  Eigen::Vector2d xi = Eigen::Vector2d::Zero();
  Eigen::Vector2d eta = Eigen::Vector2d::Zero();
};

[[nodiscard]] NormalFormState to_normal_form(const Eigen::Vector4d& z, double chi);
[[nodiscard]] Eigen::Vector4d from_normal_form(const NormalFormState& s, double chi);

struct ZeroDynamicsCoefficients {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

/// Closed-form coefficients. Throws SingularityError when D_alpha = 0.
[[nodiscard]] ZeroDynamicsCoefficients zero_dynamics_coeffs(const ReferencePoint& p, const EnvironmentConstants& env);

/// Same coefficients obtained from the eta-subsystem with xi = 0.
[[nodiscard]] ZeroDynamicsCoefficients zero_dynamics_from_normal_form(const LinearizedSystem& lin);

enum class FlightCondition { UnstableOscillatory, UnstableSaddle, Stable };

[[nodiscard]] std::string_view to_string(FlightCondition fc);

struct ZeroDynamicsReport {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  /// Ordered by decreasing real part, then decreasing imaginary part.
  std::array<std::complex<double>, 2> eigenvalues{};
  FlightCondition condition = FlightCondition::Stable;
  /// Velocity decreases along flight, so Re(lambda) < 0 is the growing direction.
  std::string_view convention = "velocity-domain: Re<0 unstable";
  double drag_polar_slope_minus_lod = 0.0;
  int fpa_rate_sign = 0;
};

[[nodiscard]] ZeroDynamicsReport classify_flight_condition(double gamma1, double gamma2);

/// Coefficients, classification and the two physical indicator terms at a node.
[[nodiscard]] ZeroDynamicsReport analyze_zero_dynamics(const ReferencePoint& p, const EnvironmentConstants& env);

}  // namespace entry
