#include "polarimetry/fockoracle.hpp"

#include <gsl/gsl_cdf.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace polarimetry::fock {

namespace {

constexpr cd I{0.0, 1.0};

// alpha^n / sqrt(n!) for n = 0..cutoff.
std::vector<cd> scaled_powers(cd alpha, int cutoff) {
  std::vector<cd> f(static_cast<std::size_t>(cutoff) + 1);
  f[0] = 1.0;
  for (int n = 1; n <= cutoff; ++n) f[n] = f[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  return f;
}

Eigen::VectorXcd amplitudes_unchecked(const ModalParams& p, int cutoff) {
  const cd ah = std::polar(p.a_h, 0.5 * (p.phi_plus + p.phi_minus));
  const cd av = std::polar(p.a_v, 0.5 * (p.phi_plus - p.phi_minus));
  const auto fh = scaled_powers(ah, cutoff);
  const auto fv = scaled_powers(av, cutoff);
  const double norm = std::exp(-0.5 * p.s0());
  Eigen::VectorXcd psi(dimension(cutoff));
  for (int total = 0; total <= cutoff; ++total) {
    for (int n = 0; n <= total; ++n) psi(index(n, total - n)) = norm * fh[n] * fv[total - n];
  }
  return psi;
}

// Columns: derivatives of psi in the estimated parameters of `scenario`.
std::vector<Eigen::VectorXcd> parameter_derivatives(const ModalParams& p, const Scenario& scenario,
                                                    int cutoff, DerivativeMode mode) {
  std::vector<Eigen::VectorXcd> d;
  if (mode == DerivativeMode::Analytic) {
    const auto all = coherent_derivatives(p, cutoff);
    if (scenario.power_known) {
      d.push_back(all[0] - (p.a_h / p.a_v) * all[1]);
      d.push_back(all[2]);
    } else {
      d.assign(all.begin(), all.begin() + 3);
    }
    return d;
  }
  constexpr double h = 1e-5;
  const double s0 = p.s0();
  auto shifted = [&](int which, double delta) {
    ModalParams q = p;
    if (which == 0) {
      q.a_h += delta;
      if (scenario.power_known) q.a_v = std::sqrt(std::max(0.0, s0 - q.a_h * q.a_h));
    } else if (which == 1) {
      q.a_v += delta;
    } else {
      q.phi_minus += delta;
    }
    return amplitudes_unchecked(q, cutoff);
  };
  const std::vector<int> params = scenario.power_known ? std::vector<int>{0, 2}
                                                       : std::vector<int>{0, 1, 2};
  for (int which : params) d.push_back((shifted(which, h) - shifted(which, -h)) / (2.0 * h));
  return d;
}

}  // namespace

int default_cutoff(double s0) {
  return static_cast<int>(std::ceil(s0 + 10.0 * std::sqrt(std::max(0.0, s0)) + 10.0));
}

double tail_mass(double s0, int cutoff) {
  if (s0 <= 0.0) return 0.0;
  return gsl_cdf_poisson_Q(static_cast<unsigned>(cutoff), s0);
}

Eigen::MatrixXcd FockDensity::block(int total) const {
  return rho.block(block_offset(total), block_offset(total), total + 1, total + 1);
}

FockState coherent_two_mode(const ModalParams& p, int cutoff) {
  const double tail = tail_mass(p.s0(), cutoff);
  if (cutoff < 0 || tail >= kMaxTailMass) {
    std::ostringstream msg;
    msg << "cutoff " << cutoff << " drops Poisson mass " << tail << " at S0=" << p.s0();
    throw Error(ErrorKind::CutoffTooSmall, msg.str());
  }
  return FockState{cutoff, amplitudes_unchecked(p, cutoff), tail};
}

std::array<Eigen::VectorXcd, 4> coherent_derivatives(const ModalParams& p, int cutoff) {
  const cd eh = std::polar(1.0, 0.5 * (p.phi_plus + p.phi_minus));
  const cd ev = std::polar(1.0, 0.5 * (p.phi_plus - p.phi_minus));
  const auto fh = scaled_powers(p.a_h * eh, cutoff);
  const auto fv = scaled_powers(p.a_v * ev, cutoff);
  const double norm = std::exp(-0.5 * p.s0());
  const int dim = dimension(cutoff);
  std::array<Eigen::VectorXcd, 4> d;
  for (auto& v : d) v = Eigen::VectorXcd::Zero(dim);
  for (int total = 0; total <= cutoff; ++total) {
    for (int n = 0; n <= total; ++n) {
      const int m = total - n;
      const int k = index(n, m);
      const cd amp = norm * fh[n] * fv[m];
      // d/da (alpha^n / sqrt(n!)) = sqrt(n) e^{i phase} alpha^{n-1} / sqrt((n-1)!)
      const cd dh = n > 0 ? std::sqrt(static_cast<double>(n)) * eh * fh[n - 1] : cd(0.0);
      const cd dv = m > 0 ? std::sqrt(static_cast<double>(m)) * ev * fv[m - 1] : cd(0.0);
      d[0](k) = norm * dh * fv[m] - p.a_h * amp;
      d[1](k) = norm * fh[n] * dv - p.a_v * amp;
      d[2](k) = I * 0.5 * static_cast<double>(n - m) * amp;
      d[3](k) = I * 0.5 * static_cast<double>(n + m) * amp;
    }
  }
  return d;
}

StokesOperators stokes_operators(int cutoff) {
  const int dim = dimension(cutoff);
  std::array<std::vector<Eigen::Triplet<cd>>, 4> t;
  for (int total = 0; total <= cutoff; ++total) {
    for (int n = 0; n <= total; ++n) {
      const int m = total - n;
      const int k = index(n, m);
      t[0].emplace_back(k, k, static_cast<double>(n + m));
      t[1].emplace_back(k, k, static_cast<double>(n - m));
      if (m > 0) {
        // a^dag b |n, m> = sqrt((n+1) m) |n+1, m-1>
        const int up = index(n + 1, m - 1);
        const double c = std::sqrt(static_cast<double>((n + 1) * m));
        t[2].emplace_back(up, k, c);
        t[2].emplace_back(k, up, c);
        t[3].emplace_back(up, k, I * c);
        t[3].emplace_back(k, up, -I * c);
      }
    }
  }
  StokesOperators ops;
  ops.cutoff = cutoff;
  for (int j = 0; j < 4; ++j) {
    ops.s[j].resize(dim, dim);
    ops.s[j].setFromTriplets(t[j].begin(), t[j].end());
  }
  return ops;
}

double expectation(const SparseOp& op, const FockState& state) {
  return state.amplitudes.dot(op * state.amplitudes).real();
}

double variance(const SparseOp& op, const FockState& state) {
  const Eigen::VectorXcd v = op * state.amplitudes;
  const double mean = state.amplitudes.dot(v).real();
  return v.squaredNorm() - mean * mean;
}

double commutator_residual(const StokesOperators& ops, int j, int k, int l, cd coeff) {
  const SparseOp c = SparseOp(ops.s[j] * ops.s[k]) - SparseOp(ops.s[k] * ops.s[j]) -
                     SparseOp(coeff * ops.s[l]);
  const int interior = dimension(ops.cutoff - 2);
  double worst = 0.0;
  for (int col = 0; col < c.outerSize(); ++col) {
    for (SparseOp::InnerIterator it(c, col); it; ++it) {
      if (it.row() < interior && it.col() < interior) worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

FockDensity phase_average(const FockState& state) {
  FockDensity out;
  out.cutoff = state.cutoff;
  out.tail_mass = state.tail_mass;
  const int dim = dimension(state.cutoff);
  out.rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (int total = 0; total <= state.cutoff; ++total) {
    const auto v = state.amplitudes.segment(block_offset(total), total + 1);
    out.rho.block(block_offset(total), block_offset(total), total + 1, total + 1) = v * v.adjoint();
  }
  return out;
}

double photon_number_commutator(const FockDensity& rho) {
  const int dim = dimension(rho.cutoff);
  Eigen::VectorXd n(dim);
  for (int total = 0; total <= rho.cutoff; ++total) {
    n.segment(block_offset(total), total + 1).setConstant(total);
  }
  // ([rho, N])_{ab} = rho_ab (N_b - N_a)
  double worst = 0.0;
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) worst = std::max(worst, std::abs(rho.rho(a, b)) * std::abs(n(b) - n(a)));
  }
  return worst;
}

NumericalQfi numerical_qfi(const ModalParams& p, const Scenario& scenario, int cutoff,
                           DerivativeMode mode) {
  if (scenario.power_known && (p.a_h <= 0.0 || p.a_v <= 0.0)) {
    throw Error(ErrorKind::DegeneratePole, "constrained parametrization needs a_h, a_v > 0");
  }
  const FockState psi = coherent_two_mode(p, cutoff);
  const auto d = parameter_derivatives(p, scenario, cutoff, mode);
  const int k = static_cast<int>(d.size());

  NumericalQfi out;
  out.tail_mass = psi.tail_mass;
  out.qfi.power_known = scenario.power_known;
  out.qfi.phase_known = scenario.phase_known;
  out.qfi.entries = Eigen::MatrixXd::Zero(k, k);
  out.commutators = Eigen::MatrixXcd::Zero(k, k);

  if (scenario.phase_known) {
    // Pure state: L_j psi = 2(|d_j psi><psi|psi> + |psi><d_j psi|psi>).
    const double norm = psi.amplitudes.squaredNorm();
    std::vector<Eigen::VectorXcd> v;
    for (const auto& dj : d) v.push_back(2.0 * (norm * dj + psi.amplitudes * dj.dot(psi.amplitudes)));
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        const cd g = v[a].dot(v[b]);
        out.qfi.entries(a, b) = g.real();
        out.commutators(a, b) = 2.0 * I * g.imag();
      }
    }
    return out;
  }

  // Phase-averaged state is block diagonal in N; solve the SLD equation per block
  // in the eigenbasis of rho: L_ab = 2 (d rho)_ab / (lambda_a + lambda_b).
  for (int total = 0; total <= cutoff; ++total) {
    const int off = block_offset(total);
    const int size = total + 1;
    const Eigen::VectorXcd v = psi.amplitudes.segment(off, size);
    const Eigen::MatrixXcd rho = v * v.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho);
    const Eigen::VectorXd lam = eig.eigenvalues();
    const Eigen::MatrixXcd& u = eig.eigenvectors();
    std::vector<Eigen::MatrixXcd> sld;
    for (const auto& dj : d) {
      const Eigen::VectorXcd dv = dj.segment(off, size);
      const Eigen::MatrixXcd drho = dv * v.adjoint() + v * dv.adjoint();
      const Eigen::MatrixXcd dd = u.adjoint() * drho * u;
      Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(size, size);
      for (int a = 0; a < size; ++a) {
        for (int b = 0; b < size; ++b) {
          const double den = lam(a) + lam(b);
          if (den < 1e-12) {
            if (std::abs(dd(a, b)) > 1e-8) {
              std::ostringstream msg;
              msg << "SLD denominator " << den << " against numerator " << std::abs(dd(a, b))
                  << " in block N=" << total;
              throw Error(ErrorKind::IllConditioned, msg.str());
            }
            continue;
          }
          l(a, b) = 2.0 * dd(a, b) / den;
        }
      }
      sld.push_back(std::move(l));
    }
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        const Eigen::MatrixXcd ab = sld[a] * sld[b];
        const Eigen::MatrixXcd ba = sld[b] * sld[a];
        cd tr_ab = 0.0;
        cd tr_ba = 0.0;
        for (int i = 0; i < size; ++i) {
          tr_ab += lam(i) * ab(i, i);
          tr_ba += lam(i) * ba(i, i);
        }
        out.qfi.entries(a, b) += tr_ab.real();
        out.commutators(a, b) += tr_ab - tr_ba;
      }
    }
  }
  return out;
}

}  // namespace polarimetry::fock
