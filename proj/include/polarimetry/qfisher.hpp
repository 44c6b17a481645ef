#pragma once

// Closed-form quantum Fisher information, QCRB costs and SLD commutators for
// the coherent two-mode state.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "polarimetry/polcore.hpp"

namespace polarimetry {

struct QfiMatrix {
  Eigen::MatrixXd entries;  // over (a_h, a_v, phi_minus) or (a_h, phi_minus)
  bool power_known = false;
  bool phase_known = false;
};

QfiMatrix qfi_matrix(const ModalParams& p, const Scenario& scenario);

/// Tr(J Q^{-1} J^T). Throws SingularQfi when a diagonal entry is below 1e-12 * S0.
double qcrb_cost(const ModalParams& p, const Scenario& scenario);

/// Closed-form value of qcrb_cost written in Stokes coordinates; also valid on the poles.
double qcrb_closed_form(const StokesVector& s, const Scenario& scenario);

/// <[L_phi, L_ah]> and <[L_phi, L_av]>; a single <[L_phi, L_ah]> with known power.
std::vector<std::complex<double>> sld_commutator_expectations(const ModalParams& p,
                                                              const Scenario& scenario);

}  // namespace polarimetry
