#pragma once

// Fully polarized two-mode coherent light: modal <-> Stokes coordinates and
// the Jacobians used to carry every bound into Stokes coordinates.

#include <Eigen/Dense>
#include <vector>

#include "polarimetry/errors.hpp"

namespace polarimetry {

/// Validation tolerance for the fully polarized invariant (relative to S0^2).
inline constexpr double kStokesRelTol = 1e-9;

/// Wraps an angle into (-pi, pi].
double wrap_phase(double phi);

/// Magnitudes and phases of the coherent amplitudes
/// alpha_H = a_h exp(i(phi_plus + phi_minus)/2), alpha_V = a_v exp(i(phi_plus - phi_minus)/2).
struct ModalParams {
  double a_h = 0.0;
  double a_v = 0.0;
  double phi_minus = 0.0;
  double phi_plus = 0.0;

  /// Validating constructor: rejects negative or non-finite magnitudes and
  /// wraps both phases.
  static ModalParams make(double a_h, double a_v, double phi_minus, double phi_plus = 0.0);

  double s0() const { return a_h * a_h + a_v * a_v; }
};

struct StokesVector {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  Eigen::Vector3d direction_part() const { return {s1, s2, s3}; }

  /// True when s0 >= 0 and s0^2 = s1^2 + s2^2 + s3^2 within `rel_tol * max(1, s0^2)`.
  bool is_fully_polarized(double rel_tol = kStokesRelTol) const;
};

/// The four estimation regimes: S0 known or not, global phase known or not.
struct Scenario {
  bool power_known = false;
  bool phase_known = false;

  /// Number of estimated modal parameters: (a_h, a_v, phi_minus) or (a_h, phi_minus).
  int num_params() const { return power_known ? 2 : 3; }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Rows (S1, S2, S3); columns (a_h, a_v, phi_minus) or, with known power, (a_h, phi_minus).
using JacobianMatrix = Eigen::MatrixXd;

StokesVector stokes_from_modal(const ModalParams& p);

struct ModalFromStokes {
  ModalParams params;
  /// Set when the state sits on an S1 pole; phi_minus is then reported as 0.
  bool degenerate_pole = false;
};

/// Inverse of stokes_from_modal with phi_plus = 0. Throws InvalidState when `s`
/// is not fully polarized.
ModalFromStokes modal_from_stokes(const StokesVector& s);

/// Throws DegeneratePole for the power-constrained Jacobian at a_h = 0 or a_v = 0.
JacobianMatrix jacobian(const ModalParams& p, const Scenario& scenario);

/// Point of a sphere scan. theta is the inclination from the +S1 axis, phi the
/// azimuth measured from +S2 towards +S3 (so phi equals phi_minus).
struct GridPoint {
  double theta = 0.0;
  double phi = 0.0;
  StokesVector stokes;
};

/// n_theta inclinations spanning [0, pi] inclusive and n_phi azimuths 2*pi*j/n_phi,
/// inclination-major order.
std::vector<GridPoint> sphere_grid(int n_theta, int n_phi, double s0);

StokesVector stokes_from_angles(double theta, double phi, double s0);

}  // namespace polarimetry
