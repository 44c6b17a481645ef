#include "polarimetry/qfisher.hpp"

#include <cmath>
#include <sstream>

namespace polarimetry {

QfiMatrix qfi_matrix(const ModalParams& p, const Scenario& scenario) {
  const double s0 = p.s0();
  const double s1 = p.a_h * p.a_h - p.a_v * p.a_v;
  const double cross = 4.0 * p.a_h * p.a_h * p.a_v * p.a_v;
  QfiMatrix q;
  q.power_known = scenario.power_known;
  q.phase_known = scenario.phase_known;
  if (!scenario.power_known) {
    q.entries = Eigen::Vector3d(4.0, 4.0, scenario.phase_known ? s0 : (s0 > 0 ? cross / s0 : 0.0))
                    .asDiagonal();
    return q;
  }
  if (!(s0 - s1 > 0.0) || p.a_h <= 0.0) {
    throw Error(ErrorKind::DegeneratePole, "constrained QFI is undefined on the S1 poles");
  }
  // The a_h entry is 4 (1 + a_h^2 / a_v^2) once a_v follows a_h on the sphere.
  q.entries = Eigen::Vector2d(8.0 * s0 / (s0 - s1), scenario.phase_known ? s0 : s0 - s1 * s1 / s0)
                  .asDiagonal();
  return q;
}

double qcrb_cost(const ModalParams& p, const Scenario& scenario) {
  const QfiMatrix q = qfi_matrix(p, scenario);
  const double s0 = p.s0();
  const Eigen::VectorXd d = q.entries.diagonal();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) < 1e-12 * s0 || s0 <= 0.0) {
      std::ostringstream msg;
      msg << "QFI diagonal entry " << i << " is " << d(i);
      throw Error(ErrorKind::SingularQfi, msg.str());
    }
  }
  const Eigen::MatrixXd j = jacobian(p, scenario);
  return (j * d.cwiseInverse().asDiagonal() * j.transpose()).trace();
}

double qcrb_closed_form(const StokesVector& s, const Scenario& scenario) {
  const double base = scenario.power_known ? 2.0 * s.s0 : 3.0 * s.s0;
  if (!scenario.phase_known || s.s0 <= 0.0) return base;
  return base - s.s1 * s.s1 / s.s0;
}

std::vector<std::complex<double>> sld_commutator_expectations(const ModalParams& p,
                                                              const Scenario& scenario) {
  using cd = std::complex<double>;
  const double s0 = p.s0();
  const double ah = p.a_h;
  const double av = p.a_v;
  if (s0 <= 0.0) {
    return scenario.power_known ? std::vector<cd>{0.0} : std::vector<cd>{0.0, 0.0};
  }
  if (scenario.power_known) {
    // L_ah restricted to the sphere is L_ah - (a_h/a_v) L_av; both regimes give -8i a_h.
    return {cd(0.0, -8.0 * ah)};
  }
  if (scenario.phase_known) return {cd(0.0, -4.0 * ah), cd(0.0, 4.0 * av)};
  return {cd(0.0, -8.0 * ah * av * av / s0), cd(0.0, 8.0 * av * ah * ah / s0)};
}

}  // namespace polarimetry
