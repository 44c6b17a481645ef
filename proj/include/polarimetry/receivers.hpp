#pragma once

// Photon-counting polarimeters: the six-detector Stokes receiver and the
// four-detector tetrahedron receiver built on a partially polarizing beam
// splitter (PPBS) with amplitude coefficients x and y = sqrt(1 - x^2).

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "polarimetry/polcore.hpp"

namespace polarimetry {

/// crb_detail refuses states with min(a_h, a_v) below this (absolute).
inline constexpr double kReceiverPoleMargin = 1e-6;

enum class ReceiverKind { Stokes, Tetrahedron };

struct ReceiverSpec {
  ReceiverKind kind = ReceiverKind::Stokes;
  double ppbs_x = 0.0;  // tetrahedron only

  static ReceiverSpec stokes() { return {ReceiverKind::Stokes, 0.0}; }
  /// Throws InvalidState unless 0 < x < 1.
  static ReceiverSpec tetrahedron(double x);

  double ppbs_y() const;
  int arm_count() const { return kind == ReceiverKind::Stokes ? 6 : 4; }
  /// (H, V, +, -, R, L) or (+, -, R, L).
  std::vector<std::string> arm_labels() const;
};

struct ArmMeans {
  Eigen::VectorXd means;
  Eigen::MatrixXd gradients;  // arms x estimated parameters
  /// Field amplitudes at each detector and their gradients; may be left empty,
  /// in which case poisson_fisher works from the means alone.
  Eigen::VectorXcd amplitudes;
  Eigen::MatrixXcd amplitude_gradients;
};

ArmMeans arm_means(const ModalParams& p, const ReceiverSpec& spec, const Scenario& scenario);

struct FisherMatrix {
  Eigen::MatrixXd entries;
  Scenario scenario;
  /// Dark arms whose Fisher contribution depends on the approach direction;
  /// they enter through the limit along the axis of their largest gradient.
  std::vector<int> ambiguous_arms;
};

/// Sum over arms of grad(n) grad(n)^T / n. Dark arms (n < 1e-14) are resolved
/// through the amplitudes when present; from means alone a dark arm with a non-negligible
/// gradient throws SingularArm.
FisherMatrix poisson_fisher(const ArmMeans& arms, const Scenario& scenario = {});

/// The per-arm-pair matrices of the Stokes receiver written out in closed form,
/// summed over the three pairs (H/V, +/-, R/L).
Eigen::MatrixXd stokes_fisher_closed_form(const ModalParams& p, const Scenario& scenario);

struct CrbResult {
  double cost = 0.0;  // +infinity when a Stokes direction is unidentifiable
  bool singular = false;
  std::string diagnostic;
  std::vector<int> ambiguous_arms;
};

CrbResult crb_detail(const ModalParams& p, const ReceiverSpec& spec, const Scenario& scenario);

/// Tr(J F^+ J^T); +infinity on SingularFisher. Throws DegeneratePole on the S1 poles.
double crb_cost(const ModalParams& p, const ReceiverSpec& spec, const Scenario& scenario);

/// 11/2 S0 - 9/(2 S0) (1/S1^2 + 1/S2^2 + 1/S3^2)^{-1}, the harmonic term taken as 0 when any S_j = 0.
double stokes_bound_closed_form(const StokesVector& s);

/// The known-power counterpart; continuous through vanishing coordinates.
double stokes_const_closed_form(const StokesVector& s);

struct TetraOptimum {
  double x_opt = 0.0;
  double cost = 0.0;
};

/// Minimizes the tetrahedron CRB over x in [0.01, 0.99]: a 0.01 scan, then golden section to 1e-8.
TetraOptimum tetrahedron_optimize(const ModalParams& p, const Scenario& scenario);

}  // namespace polarimetry
