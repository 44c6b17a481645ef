#include "polarimetry/polcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace polarimetry {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::DegeneratePole: return "DegeneratePole";
    case ErrorKind::BadArity: return "BadArity";
    case ErrorKind::OptimizerNoConverge: return "OptimizerNoConverge";
    case ErrorKind::SingularQfi: return "SingularQfi";
    case ErrorKind::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::SingularArm: return "SingularArm";
    case ErrorKind::SingularFisher: return "SingularFisher";
    case ErrorKind::WrongReceiver: return "WrongReceiver";
    case ErrorKind::AllZeroCounts: return "AllZeroCounts";
    case ErrorKind::NoConverge: return "NoConverge";
  }
  return "Unknown";
}

double wrap_phase(double phi) {
  constexpr double pi = std::numbers::pi;
  double w = std::remainder(phi, 2.0 * pi);  // [-pi, pi]
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

ModalParams ModalParams::make(double a_h, double a_v, double phi_minus, double phi_plus) {
  if (!(a_h >= 0.0) || !(a_v >= 0.0) || !std::isfinite(a_h) || !std::isfinite(a_v) ||
      !std::isfinite(phi_minus) || !std::isfinite(phi_plus)) {
    std::ostringstream msg;
    msg << "amplitudes must be finite and nonnegative (a_h=" << a_h << ", a_v=" << a_v << ")";
    throw Error(ErrorKind::InvalidState, msg.str());
  }
  return ModalParams{a_h, a_v, wrap_phase(phi_minus), wrap_phase(phi_plus)};
}

bool StokesVector::is_fully_polarized(double rel_tol) const {
  if (!(s0 >= 0.0) || !std::isfinite(s0) || !std::isfinite(s1) || !std::isfinite(s2) ||
      !std::isfinite(s3)) {
    return false;
  }
  const double mismatch = std::abs(s0 * s0 - (s1 * s1 + s2 * s2 + s3 * s3));
  return mismatch <= rel_tol * std::max(1.0, s0 * s0);
}

StokesVector stokes_from_modal(const ModalParams& p) {
  const double cross = 2.0 * p.a_h * p.a_v;
  return StokesVector{p.a_h * p.a_h + p.a_v * p.a_v, p.a_h * p.a_h - p.a_v * p.a_v,
                      cross * std::cos(p.phi_minus), cross * std::sin(p.phi_minus)};
}

ModalFromStokes modal_from_stokes(const StokesVector& s) {
  if (!s.is_fully_polarized()) {
    std::ostringstream msg;
    msg << "Stokes vector (" << s.s0 << ", " << s.s1 << ", " << s.s2 << ", " << s.s3
        << ") is not fully polarized";
    throw Error(ErrorKind::InvalidState, msg.str());
  }
  ModalFromStokes out;
  out.params.a_h = std::sqrt(std::max(0.0, 0.5 * (s.s0 + s.s1)));
  out.params.a_v = std::sqrt(std::max(0.0, 0.5 * (s.s0 - s.s1)));
  out.degenerate_pole = s.s0 - std::abs(s.s1) < 1e-12 * s.s0 || s.s0 == 0.0;
  out.params.phi_minus = out.degenerate_pole ? 0.0 : wrap_phase(std::atan2(s.s3, s.s2));
  out.params.phi_plus = 0.0;
  return out;
}

JacobianMatrix jacobian(const ModalParams& p, const Scenario& scenario) {
  const double c = std::cos(p.phi_minus);
  const double s = std::sin(p.phi_minus);
  if (!scenario.power_known) {
    JacobianMatrix j(3, 3);
    j << 2.0 * p.a_h, -2.0 * p.a_v, 0.0,
         2.0 * p.a_v * c, 2.0 * p.a_h * c, -2.0 * p.a_h * p.a_v * s,
         2.0 * p.a_v * s, 2.0 * p.a_h * s, 2.0 * p.a_h * p.a_v * c;
    return j;
  }
  if (p.a_h <= 0.0 || p.a_v <= 0.0) {
    throw Error(ErrorKind::DegeneratePole,
                "power-constrained Jacobian is undefined at a_h = 0 or a_v = 0");
  }
  // a_v = sqrt(S0 - a_h^2) is eliminated; d(a_h a_v)/d a_h = (S0 - 2 a_h^2) / a_v.
  const double s0 = p.s0();
  const double d_cross = 2.0 * (s0 - 2.0 * p.a_h * p.a_h) / p.a_v;
  JacobianMatrix j(3, 2);
  j << 4.0 * p.a_h, 0.0,
       d_cross * c, -2.0 * p.a_h * p.a_v * s,
       d_cross * s, 2.0 * p.a_h * p.a_v * c;
  return j;
}

StokesVector stokes_from_angles(double theta, double phi, double s0) {
  const double st = std::sin(theta);
  return StokesVector{s0, s0 * std::cos(theta), s0 * st * std::cos(phi), s0 * st * std::sin(phi)};
}

std::vector<GridPoint> sphere_grid(int n_theta, int n_phi, double s0) {
  if (n_theta < 2 || n_phi < 2) {
    throw Error(ErrorKind::InvalidState, "sphere_grid needs n_theta >= 2 and n_phi >= 2");
  }
  std::vector<GridPoint> grid;
  grid.reserve(static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi));
  for (int i = 0; i < n_theta; ++i) {
    const double theta = std::numbers::pi * i / (n_theta - 1);
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / n_phi;
      grid.push_back(GridPoint{theta, phi, stokes_from_angles(theta, phi, s0)});
    }
  }
  return grid;
}

}  // namespace polarimetry
