#include "polarimetry/receivers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polarimetry/optim.hpp"

namespace polarimetry {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

constexpr double kDarkMean = 1e-14;
constexpr double kFlatGradient = 1e-7;

// Row a: detector amplitude = c(a,0) alpha_H + c(a,1) alpha_V.
Eigen::MatrixX2cd arm_coefficients(const ReceiverSpec& spec) {
  if (spec.kind == ReceiverKind::Stokes) {
    const double r3 = 1.0 / std::sqrt(3.0);
    const double r6 = 1.0 / std::sqrt(6.0);
    Eigen::MatrixX2cd c(6, 2);
    c << r3, 0.0,
         0.0, r3,
         r6, r6,
         r6, -r6,
         r6, I * r6,
         r6, -I * r6;
    return c;
  }
  // PPBS sends (x alpha_H, y alpha_V) to the diagonal pair and (y alpha_H, x alpha_V)
  // through a quarter-wave plate to the circular pair.
  const double x = spec.ppbs_x / std::sqrt(2.0);
  const double y = spec.ppbs_y() / std::sqrt(2.0);
  Eigen::MatrixX2cd c(4, 2);
  c << x, y,
       x, -y,
       y, I * x,
       y, -I * x;
  return c;
}

}  // namespace

ReceiverSpec ReceiverSpec::tetrahedron(double x) {
  if (!(x > 0.0 && x < 1.0)) {
    std::ostringstream msg;
    msg << "PPBS coefficient x must lie in (0, 1), got " << x;
    throw Error(ErrorKind::InvalidState, msg.str());
  }
  return {ReceiverKind::Tetrahedron, x};
}

double ReceiverSpec::ppbs_y() const { return std::sqrt(std::max(0.0, 1.0 - ppbs_x * ppbs_x)); }

std::vector<std::string> ReceiverSpec::arm_labels() const {
  if (kind == ReceiverKind::Stokes) return {"H", "V", "+", "-", "R", "L"};
  return {"+", "-", "R", "L"};
}

ArmMeans arm_means(const ModalParams& p, const ReceiverSpec& spec, const Scenario& scenario) {
  const cd ph = std::polar(1.0, 0.5 * (p.phi_plus + p.phi_minus));
  const cd pv = std::polar(1.0, 0.5 * (p.phi_plus - p.phi_minus));
  const cd ah = p.a_h * ph;
  const cd av = p.a_v * pv;

  // Columns: d(alpha_H, alpha_V) / d theta for the estimated parameters.
  Eigen::Matrix2Xcd d;
  if (!scenario.power_known) {
    d.resize(2, 3);
    d << ph, 0.0, 0.5 * I * ah,
         0.0, pv, -0.5 * I * av;
  } else {
    if (p.a_h <= 0.0 || p.a_v <= 0.0) {
      throw Error(ErrorKind::DegeneratePole, "constrained receiver model needs a_h, a_v > 0");
    }
    d.resize(2, 2);
    d << ph, 0.5 * I * ah,
         -(p.a_h / p.a_v) * pv, -0.5 * I * av;
  }

  const Eigen::MatrixX2cd c = arm_coefficients(spec);
  ArmMeans out;
  out.amplitudes = c * Eigen::Vector2cd(ah, av);
  out.amplitude_gradients = c * d;
  out.means = out.amplitudes.cwiseAbs2();
  // d|a|^2 = 2 Re(conj(a) da)
  out.gradients =
      2.0 * (out.amplitudes.conjugate().asDiagonal() * out.amplitude_gradients).real();
  return out;
}

FisherMatrix poisson_fisher(const ArmMeans& arms, const Scenario& scenario) {
  const Eigen::Index k = arms.gradients.cols();
  FisherMatrix f;
  f.scenario = scenario;
  f.entries = Eigen::MatrixXd::Zero(k, k);
  const bool have_amplitudes = arms.amplitudes.size() == arms.means.size();
  for (Eigen::Index a = 0; a < arms.means.size(); ++a) {
    const double n = arms.means(a);
    if (n >= kDarkMean) {
      const Eigen::VectorXd g = arms.gradients.row(a).transpose();
      f.entries += g * g.transpose() / n;
      continue;
    }
    if (!have_amplitudes) {
      if (arms.gradients.row(a).norm() < kFlatGradient) continue;
      std::ostringstream msg;
      msg << "arm " << a << " has mean " << n << " but gradient norm "
          << arms.gradients.row(a).norm();
      throw Error(ErrorKind::SingularArm, msg.str());
    }
    // Dark arm: near the point a = sum_j delta_j g_j and the contribution
    // 4 Re(conj(a) g_j) Re(conj(a) g_k) / |a|^2 depends on the approach
    // direction unless all g_j share one phase. Take the limit along the axis
    // of the largest g_j; the CRB limit is direction independent wherever the
    // closed forms are continuous. Direction-dependent arms are reported.
    const Eigen::RowVectorXcd g = arms.amplitude_gradients.row(a);
    Eigen::Index lead = 0;
    const double gmax = g.cwiseAbs().maxCoeff(&lead);
    if (gmax < kFlatGradient) continue;
    const cd u = g(lead) / gmax;
    const Eigen::RowVectorXcd rotated = std::conj(u) * g;
    if (rotated.imag().cwiseAbs().maxCoeff() > 1e-9 * gmax) {
      f.ambiguous_arms.push_back(static_cast<int>(a));
    }
    const Eigen::VectorXd r = rotated.real().transpose();
    f.entries += 4.0 * r * r.transpose();
  }
  return f;
}

Eigen::MatrixXd stokes_fisher_closed_form(const ModalParams& p, const Scenario& scenario) {
  const double ah = p.a_h;
  const double av = p.a_v;
  const double s0 = p.s0();
  const double c = std::cos(p.phi_minus);
  const double s = std::sin(p.phi_minus);
  const double c2 = c * c;
  const double s2 = s * s;
  const double sin2 = 2.0 * s * c;

  if (!scenario.power_known) {
    const double h2 = ah * ah;
    const double v2 = av * av;
    const double diff = h2 - v2;
    Eigen::Matrix3d hv = Eigen::Vector3d(4.0 / 3.0, 4.0 / 3.0, 0.0).asDiagonal();

    // |alpha_H +- alpha_V|^2 and |alpha_H +- i alpha_V|^2 products.
    const double pm = s0 * s0 - 4.0 * h2 * v2 * c2;
    const double rl = s0 * s0 - 4.0 * h2 * v2 * s2;
    Eigen::Matrix3d fpm;
    fpm << h2 * s0 + v2 * (v2 - 3.0 * h2) * c2, ah * av * s0 * s2, ah * v2 * diff * sin2 / 2.0,
           ah * av * s0 * s2, v2 * s0 + h2 * (h2 - 3.0 * v2) * c2, -av * h2 * diff * sin2 / 2.0,
           ah * v2 * diff * sin2 / 2.0, -av * h2 * diff * sin2 / 2.0, h2 * v2 * s0 * s2;
    Eigen::Matrix3d frl;
    frl << h2 * s0 + v2 * (v2 - 3.0 * h2) * s2, ah * av * s0 * c2, -ah * v2 * diff * sin2 / 2.0,
           ah * av * s0 * c2, v2 * s0 + h2 * (h2 - 3.0 * v2) * s2, av * h2 * diff * sin2 / 2.0,
           -ah * v2 * diff * sin2 / 2.0, av * h2 * diff * sin2 / 2.0, h2 * v2 * s0 * c2;
    return hv + (4.0 / 3.0) * fpm / pm + (4.0 / 3.0) * frl / rl;
  }

  const double h2 = ah * ah;
  const double rest = s0 - h2;    // a_v^2
  const double tilt = s0 - 2.0 * h2;
  Eigen::Matrix2d hv = Eigen::Vector2d(4.0 * s0 / (3.0 * rest), 0.0).asDiagonal();
  const double dpm = s0 * s0 - 4.0 * h2 * rest * c2;
  const double drl = s0 * s0 - 4.0 * h2 * rest * s2;
  Eigen::Matrix2d fpm;
  fpm << s0 * tilt * tilt * c2 / rest, -ah * s0 * tilt * s * c,
         -ah * s0 * tilt * s * c, h2 * s0 * rest * s2;
  Eigen::Matrix2d frl;
  frl << s0 * tilt * tilt * s2 / rest, ah * s0 * tilt * s * c,
         ah * s0 * tilt * s * c, h2 * s0 * rest * c2;
  return hv + (4.0 / 3.0) * fpm / dpm + (4.0 / 3.0) * frl / drl;
}

CrbResult crb_detail(const ModalParams& p, const ReceiverSpec& spec, const Scenario& scenario) {
  // On the S1 poles phi_minus drops out of J and F together, and the finite
  // ratio it contributes nearby is lost; callers substitute the limit instead.
  if (std::min(p.a_h, p.a_v) < kReceiverPoleMargin) {
    std::ostringstream msg;
    msg << "receiver CRB is discontinuous on the S1 poles (a_h=" << p.a_h << ", a_v=" << p.a_v
        << ")";
    throw Error(ErrorKind::DegeneratePole, msg.str());
  }
  const Eigen::MatrixXd j = jacobian(p, scenario);
  const FisherMatrix f = poisson_fisher(arm_means(p, spec, scenario), scenario);
  CrbResult out;
  out.ambiguous_arms = f.ambiguous_arms;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f.entries);
  const Eigen::VectorXd lam = eig.eigenvalues();
  const double top = std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  const double jscale = std::max(j.norm(), 1e-300);
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const Eigen::VectorXd v = eig.eigenvectors().col(i);
    const double jv = (j * v).norm();
    if (lam(i) > 1e-12 * top) {
      out.cost += jv * jv / lam(i);
    } else if (jv > 1e-9 * jscale) {
      std::ostringstream msg;
      msg << "Fisher matrix is singular along a direction that moves the Stokes vector (|J v| = "
          << jv << ")";
      out.singular = true;
      out.diagnostic = msg.str();
      out.cost = std::numeric_limits<double>::infinity();
      return out;
    }
  }
  return out;
}

double crb_cost(const ModalParams& p, const ReceiverSpec& spec, const Scenario& scenario) {
  return crb_detail(p, spec, scenario).cost;
}

double stokes_bound_closed_form(const StokesVector& s) {
  const double a = s.s1 * s.s1;
  const double b = s.s2 * s.s2;
  const double c = s.s3 * s.s3;
  // (1/a + 1/b + 1/c)^{-1} = abc / (ab + bc + ca), zero as soon as one coordinate vanishes.
  const double den = a * b + b * c + c * a;
  const double harmonic = den > 0.0 ? a * b * c / den : 0.0;
  return 5.5 * s.s0 - 4.5 * harmonic / s.s0;
}

double stokes_const_closed_form(const StokesVector& s) {
  const double a = s.s1 * s.s1;
  const double b = s.s2 * s.s2;
  const double c = s.s3 * s.s3;
  // (1 + c/b)(1 + b/a)(1 + a/c) / (1/a + 1/b + 1/c) with numerator and
  // denominator multiplied by abc; the pole limit of the ratio is S0^2.
  const double den = a * b + b * c + c * a;
  const double ratio = den > 0.0 ? (b + c) * (a + b) * (a + c) / den : s.s0 * s.s0;
  return 4.5 * ratio / s.s0;
}

TetraOptimum tetrahedron_optimize(const ModalParams& p, const Scenario& scenario) {
  const auto cost = [&](double x) {
    return crb_cost(p, ReceiverSpec::tetrahedron(x), scenario);
  };
  const auto r = optim::scan_then_golden(cost, 0.01, 0.99, 0.01, 1e-8);
  return {r.x, r.value};
}

}  // namespace polarimetry
