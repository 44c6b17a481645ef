#pragma once

// Holevo-Cramer-Rao bound for a two-mode coherent state. Everything lives in
// the three-dimensional span of the state and its parameter derivatives, so X
// and Z are 3x3 (or parameter-count sized) matrices.

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "polarimetry/polcore.hpp"

namespace polarimetry {

using HermitianMatrixSmall = Eigen::MatrixXcd;

/// Interior margin below which build_basis refuses a state (absolute, in |alpha| units).
inline constexpr double kPoleMargin = 1e-6;

/// Orthonormal basis (e0, e1, e2) of span{psi, d psi}, with e0 = psi.
struct SpanBasis {
  int dim = 3;
  ModalParams params;
  Scenario scenario;
  std::vector<std::string> labels;
  /// Column k holds the components of d_k psi in (e0, e1, e2); estimated
  /// parameters first, then phi_plus as the last column.
  Eigen::MatrixXcd overlap_coeffs;
  /// Row i expresses e_i over (psi, a^dag psi, b^dag psi).
  Eigen::Matrix3cd embedding;
  double beta = 0.0;   // constrained only
  double gamma = 0.0;  // constrained only
};

/// Gram matrix of (psi, a^dag psi, b^dag psi) for the coherent state at p.
Eigen::Matrix3cd coherent_gram(const ModalParams& p);

/// Gram matrix of the basis vectors computed through `embedding` and `coherent_gram`.
Eigen::Matrix3cd basis_gram(const SpanBasis& basis);

SpanBasis build_basis(const ModalParams& p, const Scenario& scenario);

struct XSet {
  Scenario scenario;
  std::vector<double> free_params;
  /// Column j is X_j |psi> in the span basis; its 0th entry is always 0.
  Eigen::MatrixXcd columns;
  std::vector<HermitianMatrixSmall> matrices;
};

/// Expected free-parameter count: 0 with unknown phase, 3 (general) or 4
/// (constrained) with known phase. The constrained case also accepts 2 values
/// (b, c), leaving the remaining two at zero.
int free_param_count(const Scenario& scenario);

XSet assemble_x(const ModalParams& p, const Scenario& scenario, const std::vector<double>& free);

/// Largest violation of the locally-unbiased constraints (and, with unknown
/// phase, the nuisance constraint) by `x` at `basis`.
double constraint_residual(const SpanBasis& basis, const XSet& x);

/// Z_jk = <psi| X_j X_k |psi>.
Eigen::MatrixXcd z_matrix(const XSet& x);

/// Sum of singular values of a real antisymmetric matrix.
double trace_norm_antisym(const Eigen::MatrixXd& m);

/// Tr Re(J Z J^T) + ||Im(J Z J^T)||_1.
double holevo_function(const Eigen::MatrixXcd& z, const Eigen::MatrixXd& j);

/// J Z[X] J^T in Stokes coordinates.
Eigen::MatrixXcd reparametrized_z(const ModalParams& p, const Scenario& scenario,
                                  const std::vector<double>& free);

struct HolevoResult {
  double cost_modal = 0.0;
  double cost_stokes = 0.0;
  std::vector<double> optimal_free_params;
  Eigen::MatrixXcd z_matrix;
  Scenario scenario;
  int restarts = 0;
  double restart_spread = 0.0;  // relative gap between the two best restarts
};

HolevoResult holevo_cost(const ModalParams& p, const Scenario& scenario);

}  // namespace polarimetry
