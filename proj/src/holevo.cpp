#include "polarimetry/holevo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polarimetry/optim.hpp"

namespace polarimetry {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

void require_interior(const ModalParams& p, const Scenario& scenario) {
  const double s0 = p.s0();
  bool ok = p.a_h > kPoleMargin && p.a_v > kPoleMargin;
  if (scenario.power_known) {
    ok = ok && p.a_h * p.a_h > kPoleMargin * s0 && p.a_v * p.a_v > kPoleMargin * s0;
  }
  if (!ok) {
    std::ostringstream msg;
    msg << "HCRB needs an interior state, got a_h=" << p.a_h << ", a_v=" << p.a_v;
    throw Error(ErrorKind::DegeneratePole, msg.str());
  }
}

// X_j |psi> for every estimated parameter, as columns.
Eigen::MatrixXcd x_columns(const ModalParams& p, const Scenario& scenario,
                           const std::vector<double>& free) {
  const double ah = p.a_h;
  const double av = p.a_v;
  const double s0 = p.s0();
  const double rs0 = std::sqrt(s0);
  auto at = [&](std::size_t i) { return i < free.size() ? free[i] : 0.0; };

  if (!scenario.power_known) {
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(3, 3);
    if (!scenario.phase_known) {
      x(1, 0) = 0.5;
      x(2, 1) = 0.5;
      x(1, 2) = I / (2.0 * ah);
      x(2, 2) = -I / (2.0 * av);
      return x;
    }
    // The remaining freedom of each column is i t (a_v, a_h)/sqrt(S0).
    const double n1 = av / rs0;
    const double n2 = ah / rs0;
    x(1, 0) = 0.5 + I * at(0) * n1;
    x(2, 0) = I * at(0) * n2;
    x(1, 1) = I * at(1) * n1;
    x(2, 1) = 0.5 + I * at(1) * n2;
    x(1, 2) = I * (ah / s0 + at(2) * n1);
    x(2, 2) = I * (-av / s0 + at(2) * n2);
    return x;
  }

  const double rb = av / rs0;  // sqrt(beta)
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(3, 2);
  x(1, 0) = rb / 2.0;
  x(1, 1) = I / (2.0 * ah * rb);
  if (scenario.phase_known) {
    const double m0 = (ah * ah - av * av) / s0;
    const double m1 = -2.0 * ah * av / s0;
    x(2, 0) = I * at(0) + at(2) * m1;
    // s_phi is measured in units of |x_phi| = 1/(2 a_h sqrt(beta)), which grows near the poles.
    const double kappa = 1.0 / (2.0 * ah * rb);
    x(2, 1) = I * at(1) + kappa * at(3) * m1;
    x(1, 0) += I * at(2) * m0;
    x(1, 1) += I * kappa * at(3) * m0;
  }
  return x;
}

Eigen::MatrixXcd gram_of_columns(const Eigen::MatrixXcd& x) { return x.adjoint() * x; }

// holevo_function specialised to three Stokes rows. With mu > 0 the trace norm
// 2|w| is replaced by 2 sqrt(|w|^2 + mu^2), which removes the kink at w = 0.
double stokes_objective(const Eigen::MatrixXcd& x, const Eigen::MatrixXd& j, double mu = 0.0) {
  const Eigen::MatrixXcd z = gram_of_columns(x);
  const Eigen::MatrixXd zr = z.real();
  const Eigen::MatrixXd zi = z.imag();
  const double re_trace = (j * zr * j.transpose()).trace();
  const Eigen::Matrix3d a = j * zi * j.transpose();
  const double axial =
      std::sqrt(a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2) + mu * mu);
  return re_trace + 2.0 * axial;
}

}  // namespace

Eigen::Matrix3cd coherent_gram(const ModalParams& p) {
  const cd ah = std::polar(p.a_h, 0.5 * (p.phi_plus + p.phi_minus));
  const cd av = std::polar(p.a_v, 0.5 * (p.phi_plus - p.phi_minus));
  // a|psi> = alpha_H |psi>, so <a^dag psi|a^dag psi> = 1 + |alpha_H|^2, etc.
  Eigen::Matrix3cd g;
  g(0, 0) = 1.0;
  g(0, 1) = std::conj(ah);
  g(0, 2) = std::conj(av);
  g(1, 0) = ah;
  g(2, 0) = av;
  g(1, 1) = 1.0 + std::norm(ah);
  g(2, 2) = 1.0 + std::norm(av);
  g(1, 2) = ah * std::conj(av);
  g(2, 1) = av * std::conj(ah);
  return g;
}

Eigen::Matrix3cd basis_gram(const SpanBasis& basis) {
  const Eigen::Matrix3cd g = coherent_gram(basis.params);
  return basis.embedding.conjugate() * g * basis.embedding.transpose();
}

SpanBasis build_basis(const ModalParams& p, const Scenario& scenario) {
  require_interior(p, scenario);
  SpanBasis b;
  b.params = p;
  b.scenario = scenario;
  const double ah = p.a_h;
  const double av = p.a_v;
  const double s0 = p.s0();
  const double rs0 = std::sqrt(s0);
  const cd ph = std::polar(1.0, 0.5 * (p.phi_plus + p.phi_minus));
  const cd pv = std::polar(1.0, 0.5 * (p.phi_plus - p.phi_minus));

  // d_{a_h} psi = (e^{i phi_H} a^dag - a_h) psi, already unit norm and orthogonal to psi.
  Eigen::RowVector3cd eh(-ah, ph, 0.0);
  Eigen::RowVector3cd ev(-av, 0.0, pv);
  Eigen::RowVector3cd e0(1.0, 0.0, 0.0);

  if (!scenario.power_known) {
    b.labels = {"psi", "d_ah psi", "d_av psi"};
    b.embedding << e0, eh, ev;
    b.overlap_coeffs = Eigen::MatrixXcd::Zero(3, 4);
    b.overlap_coeffs(1, 0) = 1.0;
    b.overlap_coeffs(2, 1) = 1.0;
    b.overlap_coeffs.col(2) << I * 0.5 * (ah * ah - av * av), I * ah / 2.0, -I * av / 2.0;
    b.overlap_coeffs.col(3) << I * 0.5 * s0, I * ah / 2.0, I * av / 2.0;
    return b;
  }

  b.beta = av * av / s0;
  b.gamma = 0.5 * (ah * ah - av * av);
  const double rb = std::sqrt(b.beta);
  b.labels = {"psi", "sqrt(beta) d_ah psi", "i(a_h d_ah + a_v d_av) psi / sqrt(S0)"};
  b.embedding << e0, (av * eh - ah * ev) / rs0, I * (ah * eh + av * ev) / rs0;
  b.overlap_coeffs = Eigen::MatrixXcd::Zero(3, 3);
  b.overlap_coeffs(1, 0) = 1.0 / rb;
  b.overlap_coeffs.col(1) << I * b.gamma, I * rb * ah, b.gamma / rs0;
  b.overlap_coeffs.col(2) << I * s0 / 2.0, 0.0, rs0 / 2.0;
  return b;
}

int free_param_count(const Scenario& scenario) {
  if (!scenario.phase_known) return 0;
  return scenario.power_known ? 4 : 3;
}

XSet assemble_x(const ModalParams& p, const Scenario& scenario, const std::vector<double>& free) {
  require_interior(p, scenario);
  const int expected = free_param_count(scenario);
  const bool short_constrained = scenario.power_known && scenario.phase_known && free.size() == 2;
  if (static_cast<int>(free.size()) != expected && !short_constrained) {
    std::ostringstream msg;
    msg << "expected " << expected << " free parameters, got " << free.size();
    throw Error(ErrorKind::BadArity, msg.str());
  }
  XSet out;
  out.scenario = scenario;
  out.free_params = free;
  out.columns = x_columns(p, scenario, free);
  for (Eigen::Index j = 0; j < out.columns.cols(); ++j) {
    HermitianMatrixSmall m = HermitianMatrixSmall::Zero(3, 3);
    m.col(0) = out.columns.col(j);
    m.row(0) = out.columns.col(j).adjoint();
    out.matrices.push_back(m);
  }
  return out;
}

double constraint_residual(const SpanBasis& basis, const XSet& x) {
  const Eigen::Index n = x.columns.cols();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    worst = std::max(worst, std::abs(x.columns(0, j)));
    const auto& m = x.matrices[static_cast<std::size_t>(j)];
    worst = std::max(worst, (m - m.adjoint()).cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < n; ++k) {
      const double target = j == k ? 1.0 : 0.0;
      const cd v = x.columns.col(j).dot(basis.overlap_coeffs.col(k));
      worst = std::max(worst, std::abs(2.0 * v.real() - target));
    }
    if (!x.scenario.phase_known) {
      const cd v = x.columns.col(j).dot(basis.overlap_coeffs.col(basis.overlap_coeffs.cols() - 1));
      worst = std::max(worst, std::abs(2.0 * v.real()));
    }
  }
  return worst;
}

Eigen::MatrixXcd z_matrix(const XSet& x) { return gram_of_columns(x.columns); }

double trace_norm_antisym(const Eigen::MatrixXd& m) {
  if (m.rows() == 3 && m.cols() == 3) {
    // Singular values of an antisymmetric 3x3 are {|w|, |w|, 0} with w its axial vector.
    const double w2 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
    return 2.0 * std::sqrt(w2);
  }
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().sum();
}

double holevo_function(const Eigen::MatrixXcd& z, const Eigen::MatrixXd& j) {
  const Eigen::MatrixXd re = j * z.real() * j.transpose();
  const Eigen::MatrixXd im = j * z.imag() * j.transpose();
  return re.trace() + trace_norm_antisym(im);
}

Eigen::MatrixXcd reparametrized_z(const ModalParams& p, const Scenario& scenario,
                                  const std::vector<double>& free) {
  const XSet x = assemble_x(p, scenario, free);
  const Eigen::MatrixXcd jc = jacobian(p, scenario).cast<cd>();
  return jc * z_matrix(x) * jc.transpose();
}

HolevoResult holevo_cost(const ModalParams& p, const Scenario& scenario) {
  require_interior(p, scenario);
  const Eigen::MatrixXd j = jacobian(p, scenario);
  const int k = free_param_count(scenario);

  HolevoResult out;
  out.scenario = scenario;
  std::vector<double> best(static_cast<std::size_t>(k), 0.0);

  if (k > 0) {
    const double scale = 1.0 / std::sqrt(p.s0());
    const double s0 = p.s0();
    auto objective = [&](double mu) -> optim::Objective {
      return [&, mu](const std::vector<double>& t) {
        return stokes_objective(x_columns(p, scenario, t), j, mu);
      };
    };
    const optim::Objective f = objective(0.0);
    std::vector<std::vector<double>> starts{std::vector<double>(static_cast<std::size_t>(k), 0.0)};
    for (auto& q : optim::halton_points(7, k, -2.0, 2.0)) {
      for (auto& v : q) v *= scale;
      starts.push_back(std::move(q));
    }
    std::vector<double> values;
    double best_value = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
      // The optimum can sit on the trace-norm kink, where the simplex crawls;
      // walk down a smoothed family first, then polish on the exact objective.
      std::vector<double> t = s;
      for (double mu : {1e-2, 1e-4, 1e-6}) {
        t = optim::nelder_mead(objective(mu * s0), t, 0.5 * scale, 1e-9).x;
      }
      auto r = optim::nelder_mead(f, t, 0.1 * scale, 1e-9);
      // A collapsed simplex can also stall in the narrow valleys near the
      // poles, so re-seed from the result until it stops improving.
      for (int round = 0; round < 20; ++round) {
        const auto again = optim::nelder_mead(f, r.x, 0.1 * scale, 1e-9);
        const bool improved = again.value < r.value - 1e-13 * std::abs(r.value);
        if (again.value < r.value) r = again;
        if (!improved) break;
      }
      values.push_back(r.value);
      if (r.value < best_value) {
        best_value = r.value;
        best = r.x;
      }
    }
    std::sort(values.begin(), values.end());
    out.restarts = static_cast<int>(starts.size());
    out.restart_spread = (values[1] - values[0]) / std::max(std::abs(values[0]), 1e-300);
    if (out.restart_spread > 1e-6) {
      std::ostringstream msg;
      msg << "best restarts disagree: " << values[0] << " vs " << values[1];
      throw Error(ErrorKind::OptimizerNoConverge, msg.str());
    }
  }

  const XSet x = assemble_x(p, scenario, best);
  out.optimal_free_params = best;
  out.z_matrix = z_matrix(x);
  const Eigen::Index n = out.z_matrix.rows();
  out.cost_modal = holevo_function(out.z_matrix, Eigen::MatrixXd::Identity(n, n));
  out.cost_stokes = holevo_function(out.z_matrix, j);
  return out;
}

}  // namespace polarimetry
