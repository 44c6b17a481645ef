#pragma once

// Brute-force two-mode Fock-space model, used to check the closed forms.
// Basis |n, m> with n + m <= cutoff, ordered by total photon number N.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <complex>

#include "polarimetry/polcore.hpp"
#include "polarimetry/qfisher.hpp"

namespace polarimetry::fock {

using cd = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<cd>;

/// Truncation may drop at most this much Poisson mass.
inline constexpr double kMaxTailMass = 1e-10;

inline int block_offset(int total) { return total * (total + 1) / 2; }
inline int index(int n, int m) { return block_offset(n + m) + n; }
inline int dimension(int cutoff) { return block_offset(cutoff + 1); }

/// S0 + 10 sqrt(S0) + 10, rounded up.
int default_cutoff(double s0);

/// P(N > cutoff) for N ~ Poisson(s0).
double tail_mass(double s0, int cutoff);

struct FockState {
  int cutoff = 0;
  Eigen::VectorXcd amplitudes;
  double tail_mass = 0.0;
};

struct FockDensity {
  int cutoff = 0;
  Eigen::MatrixXcd rho;
  double tail_mass = 0.0;

  /// Diagonal block of total photon number `total`.
  Eigen::MatrixXcd block(int total) const;
};

/// Throws CutoffTooSmall when the dropped Poisson tail reaches kMaxTailMass.
FockState coherent_two_mode(const ModalParams& p, int cutoff);

/// Derivatives of the amplitudes with respect to (a_h, a_v, phi_minus, phi_plus).
std::array<Eigen::VectorXcd, 4> coherent_derivatives(const ModalParams& p, int cutoff);

struct StokesOperators {
  int cutoff = 0;
  std::array<SparseOp, 4> s;
};

StokesOperators stokes_operators(int cutoff);

double expectation(const SparseOp& op, const FockState& state);
double variance(const SparseOp& op, const FockState& state);

/// max |([S_j, S_k] - coeff S_l)_{ab}| over basis states with N <= cutoff - 2.
double commutator_residual(const StokesOperators& ops, int j, int k, int l, cd coeff);

/// Removes every coherence between different total photon numbers.
FockDensity phase_average(const FockState& state);

/// Largest entry of [rho, N_total].
double photon_number_commutator(const FockDensity& rho);

enum class DerivativeMode { Analytic, FiniteDifference };

struct NumericalQfi {
  QfiMatrix qfi;
  /// <[L_j, L_k]> over the estimated parameters.
  Eigen::MatrixXcd commutators;
  double tail_mass = 0.0;
};

/// SLD-based QFI of the pure state (known phase) or its phase average
/// (unknown phase), in the parameters of `scenario`.
NumericalQfi numerical_qfi(const ModalParams& p, const Scenario& scenario, int cutoff,
                           DerivativeMode mode = DerivativeMode::Analytic);

}  // namespace polarimetry::fock
