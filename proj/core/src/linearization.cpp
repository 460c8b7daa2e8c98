#include "entry/linearization.hpp"

#include <cmath>

#include "entry/errors.hpp"

namespace entry {

namespace {

double common_denominator(const ReferencePoint& p) {
  const double q = p.drag * p.r * p.r + std::sin(p.gamma);
  if (!(std::abs(q) > 1e-12) || !(std::abs(p.v) > 0.0)) {
    throw SingularityError("D r^2 + sin(gamma) vanishes; velocity is not monotone at this node");
  }
  return p.v * q * q;
}

void require_chi(double chi) {
  if (!(std::abs(chi) > 0.0) || !std::isfinite(chi)) throw SingularityError("D_alpha vanishes");
}

}  // namespace

Jacobians full_jacobians(const ReferencePoint& p) {
  const double inv = 1.0 / common_denominator(p);
  const double r = p.r;
  const double v = p.v;
  const double v2 = v * v;
  const double sg = std::sin(p.gamma);
  const double cg = std::cos(p.gamma);
  const double cs = std::cos(p.sigma);
  const double r2 = r * r;
  const double q = p.drag * r2 + sg;

  Jacobians j;
  j.a(0, 0) = -inv * v2 * r * sg * (2.0 * sg - p.drag_r * r2 * r);
  j.a(0, 1) = -inv * v2 * p.drag * r2 * r2 * cg;
  j.a(1, 0) = -inv * (p.lift_r * r2 * q * cs - p.drag_r * r2 * (p.lift * r2 * cs + v2 * r * cg - cg) -
                      p.drag * v2 * r2 * cg + 2.0 * p.drag * r * cg + 2.0 * p.lift * r * sg * cs + v2 * cg * sg);
  j.a(1, 1) = -inv * ((v2 * r - 1.0) * (-p.drag * r2 * sg - 1.0) - p.lift * r2 * cs * cg);
  j.b(0) = inv * r2 * r2 * v2 * sg * p.drag_alpha;
  j.b(1) = -inv * r2 * (p.lift_alpha * cs * q - p.drag_alpha * (p.lift * r2 * cs + (v2 * r - 1.0) * cg));
  return j;
}

Jacobians simplified_jacobians(const ReferencePoint& p) {
  common_denominator(p);
  const double v = p.v;
  const double d = p.drag;
  const double sg = std::sin(p.gamma);
  const double lc = p.lift * std::cos(p.sigma);
  const double glide = v * v - 1.0;

  Jacobians j;
  j.a(0, 0) = v * p.drag_r * sg / (d * d);
  j.a(0, 1) = -v / d;
  j.a(1, 0) = p.drag_r * glide / (v * d * d);
  j.a(1, 1) = (glide + lc) / (v * d * d);
  j.b(0) = v * v * sg * p.dcd_dalpha / (v * d * p.cd);
  j.b(1) = -p.lift_alpha * std::cos(p.sigma) / (v * d) + (lc + glide) * p.dcd_dalpha / (v * d * p.cd);
  return j;
}

LinearizedSystem linearize(const ReferencePoint& p) {
  LinearizedSystem lin;
  lin.full = full_jacobians(p);
  lin.simplified = simplified_jacobians(p);
  lin.c << p.drag_r, 0.0;
  lin.chi = p.drag_alpha;
  lin.at = p;
  require_chi(lin.chi);
  Eigen::Matrix2d obs;
  obs.row(0) = lin.c;
  obs.row(1) = lin.c * lin.simplified.a;
  if (!(std::abs(obs.determinant()) > 1e-12)) throw SingularityError("[C; C A] is singular");
  return lin;
}

AssumptionResiduals assumption_residuals(const ReferencePoint& p) {
  AssumptionResiduals res;
  res.radius = std::abs(p.r - 1.0);
  res.flight_path = std::abs(std::sin(p.gamma));
  const double cs = std::abs(std::cos(p.sigma));
  const double scale = std::abs(p.drag_r * p.lift);
  res.radius_sensitivity = scale > 0.0 ? std::abs(p.lift_r * p.drag - p.drag_r * p.lift) * cs / scale : 0.0;
  res.equilibrium = std::abs(p.drag * (p.v * p.v - 2.0));
  return res;
}

ExtendedCoefficients extended_coefficients(const LinearizedSystem& lin) {
  require_chi(lin.chi);
  const Eigen::Matrix2d& a = lin.simplified.a;
  const Eigen::Vector2d& b = lin.simplified.b;
  Eigen::Matrix2d obs;
  obs.row(0) = lin.c;
  obs.row(1) = lin.c * a;
  if (!(std::abs(obs.determinant()) > 1e-12)) throw SingularityError("[C; C A] is singular");
  const double cb = lin.c.dot(b.transpose());
  const Eigen::RowVector2d k = lin.c * a * a * obs.inverse();

  ExtendedCoefficients e;
  e.k_xi = k;
  e.k_eta1 = (lin.c * a * b).value() - k.dot(Eigen::RowVector2d(lin.chi, cb));
  e.k_rate = cb - k.dot(Eigen::RowVector2d(0.0, lin.chi));
  e.chi = lin.chi;
  return e;
}

ExtendedDrift extended_drift(const LinearizedSystem& lin, const Eigen::Vector4d& z) {
  const auto e = extended_coefficients(lin);
  ExtendedDrift out;
  out.f << z(1), e.k_xi(0) * z(0) + e.k_xi(1) * z(1) + e.k_eta1 * z(2) + e.k_rate * z(3), z(3), 0.0;
  out.g << 0.0, e.chi, 0.0, 1.0;
  return out;
}

NormalFormState to_normal_form(const Eigen::Vector4d& z, double chi) {
  require_chi(chi);
  NormalFormState s;
  s.xi << z(0), z(1);
  s.eta << z(2), z(3) - z(1) / chi;
  return s;
}

Eigen::Vector4d from_normal_form(const NormalFormState& s, double chi) {
  require_chi(chi);
  return {s.xi(0), s.xi(1), s.eta(0), s.eta(1) + s.xi(1) / chi};
}

ZeroDynamicsCoefficients zero_dynamics_coeffs(const ReferencePoint& p, const EnvironmentConstants& env) {
  require_chi(p.drag_alpha);
  const double lc = p.lift * std::cos(p.sigma);
  const double bracket = p.dcl_dalpha / p.cl - p.dcd_dalpha / p.cd;
  ZeroDynamicsCoefficients zc;
  zc.gamma1 = env.earth_radius_m / env.scale_height_m * lc / p.drag / p.drag_alpha * bracket;
  zc.gamma2 = ((p.v * p.v - 1.0) + lc) / (p.v * p.drag * p.drag);
  return zc;
}

ZeroDynamicsCoefficients zero_dynamics_from_normal_form(const LinearizedSystem& lin) {
  const auto e = extended_coefficients(lin);
  return {-e.k_eta1 / e.chi, -e.k_rate / e.chi};
}

std::string_view to_string(FlightCondition fc) {
  switch (fc) {
    case FlightCondition::UnstableOscillatory:
      return "FC1-unstable-oscillatory";
    case FlightCondition::UnstableSaddle:
      return "FC2-unstable-saddle";
    case FlightCondition::Stable:
      break;
  }
  return "stable";
}

ZeroDynamicsReport classify_flight_condition(double gamma1, double gamma2) {
  ZeroDynamicsReport rep;
  rep.gamma1 = gamma1;
  rep.gamma2 = gamma2;
  // lambda^2 - gamma2 lambda - gamma1 = 0
  const double disc = gamma2 * gamma2 + 4.0 * gamma1;
  if (disc < 0.0) {
    const double im = 0.5 * std::sqrt(-disc);
    rep.eigenvalues = {std::complex<double>(0.5 * gamma2, im), std::complex<double>(0.5 * gamma2, -im)};
  } else {
    const double sq = std::sqrt(disc);
    const double q = 0.5 * (gamma2 + std::copysign(sq, gamma2));
    double l1 = q;
    double l2 = q != 0.0 ? -gamma1 / q : 0.0;
    if (l2 > l1) std::swap(l1, l2);
    rep.eigenvalues = {std::complex<double>(l1, 0.0), std::complex<double>(l2, 0.0)};
  }
  if (gamma1 < 0.0 && gamma2 < 0.0) {
    rep.condition = FlightCondition::UnstableOscillatory;
  } else if (gamma1 > 0.0) {
    rep.condition = FlightCondition::UnstableSaddle;
  } else {
    rep.condition = FlightCondition::Stable;
  }
  return rep;
}

ZeroDynamicsReport analyze_zero_dynamics(const ReferencePoint& p, const EnvironmentConstants& env) {
  const auto zc = zero_dynamics_coeffs(p, env);
  auto rep = classify_flight_condition(zc.gamma1, zc.gamma2);
  rep.drag_polar_slope_minus_lod = p.dcl_dalpha / p.dcd_dalpha - p.cl / p.cd;
  const double rate = (p.v * p.v - 1.0) + p.lift * std::cos(p.sigma);
  rep.fpa_rate_sign = (rate > 0.0) - (rate < 0.0);
  return rep;
}

}  // namespace entry
