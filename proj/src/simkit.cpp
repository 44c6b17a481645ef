#include "polarimetry/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace polarimetry {

namespace {

double total_counts(const CountRecord& c) {
  double t = 0.0;
  for (auto k : c.counts) t += static_cast<double>(k);
  return t;
}

// Moment inversion of the tetrahedron means (S0 + (x^2-y^2) S1 +- 2xy S2)/4 and
// (S0 - (x^2-y^2) S1 +- 2xy S3)/4. S1 is invisible at x = y and is then set to 0.
StokesVector tetra_moment_estimate(const CountRecord& c) {
  const double x = c.receiver.ppbs_x;
  const double y = c.receiver.ppbs_y();
  const double shots = static_cast<double>(c.shots);
  const auto k = [&](int i) { return static_cast<double>(c.counts[static_cast<std::size_t>(i)]); };
  StokesVector s;
  s.s0 = total_counts(c) / shots;
  const double contrast = x * x - y * y;
  s.s1 = std::abs(contrast) > 1e-6 ? ((k(0) + k(1)) - (k(2) + k(3))) / (contrast * shots) : 0.0;
  s.s2 = (k(0) - k(1)) / (x * y * shots);
  s.s3 = (k(2) - k(3)) / (x * y * shots);
  return s;
}

struct Model {
  const CountRecord& c;
  ReceiverSpec spec;
  Scenario scenario;
  double s0 = 0.0;  // known power

  ModalParams params(const Eigen::VectorXd& t) const {
    ModalParams p;
    p.a_h = t(0);
    if (scenario.power_known) {
      p.a_v = std::sqrt(std::max(0.0, s0 - t(0) * t(0)));
      p.phi_minus = t(1);
    } else {
      p.a_v = t(1);
      p.phi_minus = t(2);
    }
    return p;
  }

  // Flips negative magnitudes (a -> -a is phi_minus -> phi_minus + pi for the
  // arm means) and wraps the phase.
  Eigen::VectorXd fold(Eigen::VectorXd t) const {
    const Eigen::Index phase = t.size() - 1;
    for (Eigen::Index i = 0; i < phase; ++i) {
      if (t(i) < 0.0) {
        t(i) = -t(i);
        t(phase) += std::numbers::pi;
      }
    }
    t(phase) = wrap_phase(t(phase));
    return t;
  }

  bool feasible(const Eigen::VectorXd& t) const {
    if (!t.allFinite()) return false;
    if (scenario.power_known) return t(0) > 0.0 && t(0) * t(0) < s0;
    return true;
  }

  double loglik(const Eigen::VectorXd& t) const {
    const ArmMeans m = arm_means(params(t), spec, {scenario.power_known, false});
    const double shots = static_cast<double>(c.shots);
    double l = 0.0;
    for (Eigen::Index a = 0; a < m.means.size(); ++a) {
      const double k = static_cast<double>(c.counts[static_cast<std::size_t>(a)]);
      const double n = m.means(a);
      if (k > 0.0) {
        if (n <= 0.0) return -std::numeric_limits<double>::infinity();
        l += k * std::log(n);
      }
      l -= shots * n;
    }
    return l;
  }
};

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CountRecord sample_counts(const ModalParams& p, const ReceiverSpec& spec, std::int64_t shots,
                          std::uint64_t seed) {
  if (shots < 1) throw Error(ErrorKind::InvalidState, "shots must be >= 1");
  const ArmMeans m = arm_means(p, spec, {});
  std::mt19937_64 gen(seed);
  CountRecord rec;
  rec.shots = shots;
  rec.receiver = spec;
  rec.seed = seed;
  for (Eigen::Index a = 0; a < m.means.size(); ++a) {
    const double mean = static_cast<double>(shots) * m.means(a);
    if (mean <= 0.0) {
      rec.counts.push_back(0);
      continue;
    }
    std::poisson_distribution<std::int64_t> draw(mean);
    rec.counts.push_back(draw(gen));
  }
  return rec;
}

StokesVector naive_stokes_estimate(const CountRecord& c) {
  if (c.receiver.kind != ReceiverKind::Stokes) {
    throw Error(ErrorKind::WrongReceiver, "naive estimator needs the six-arm Stokes receiver");
  }
  const double shots = static_cast<double>(c.shots);
  const auto k = [&](int i) { return static_cast<double>(c.counts[static_cast<std::size_t>(i)]); };
  return StokesVector{total_counts(c) / shots, 3.0 * (k(0) - k(1)) / shots,
                      3.0 * (k(2) - k(3)) / shots, 3.0 * (k(4) - k(5)) / shots};
}

MleResult mle_estimate(const CountRecord& c, const Scenario& scenario, double known_s0) {
  if (static_cast<int>(c.counts.size()) != c.receiver.arm_count()) {
    throw Error(ErrorKind::BadArity, "count vector does not match the receiver");
  }
  if (total_counts(c) <= 0.0) throw Error(ErrorKind::AllZeroCounts, "no photons detected");
  if (scenario.power_known && !(known_s0 > 0.0)) {
    throw Error(ErrorKind::InvalidState, "known-power MLE needs S0 > 0");
  }

  // Start from the moment estimate pushed onto the sphere and away from the poles.
  const StokesVector raw = c.receiver.kind == ReceiverKind::Stokes ? naive_stokes_estimate(c)
                                                                    : tetra_moment_estimate(c);
  const double s0 = scenario.power_known ? known_s0 : std::max(raw.s0, 1e-12);
  Eigen::Vector3d dir(raw.s1, raw.s2, raw.s3);
  dir = dir.norm() > 0.0 ? Eigen::Vector3d(dir / dir.norm()) : Eigen::Vector3d(0.0, 1.0, 0.0);
  const double floor = 1e-3;
  const double u = std::clamp(dir(0), -1.0 + floor, 1.0 - floor);
  const double ah0 = std::sqrt(0.5 * s0 * (1.0 + u));
  const double av0 = std::sqrt(0.5 * s0 * (1.0 - u));
  const double ph0 = (dir(1) == 0.0 && dir(2) == 0.0) ? 0.0 : std::atan2(dir(2), dir(1));

  Model model{c, c.receiver, scenario, s0};
  Eigen::VectorXd t = scenario.power_known ? Eigen::VectorXd(Eigen::Vector2d(ah0, ph0))
                                           : Eigen::VectorXd(Eigen::Vector3d(ah0, av0, ph0));
  const double shots = static_cast<double>(c.shots);
  double l = model.loglik(t);

  MleResult out;
  for (int iter = 1; iter <= 500; ++iter) {
    out.iterations = iter;
    const ArmMeans m = arm_means(model.params(t), c.receiver, {scenario.power_known, false});
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(t.size());
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(t.size(), t.size());
    for (Eigen::Index a = 0; a < m.means.size(); ++a) {
      const double n = m.means(a);
      if (n <= 0.0) continue;
      const double k = static_cast<double>(c.counts[static_cast<std::size_t>(a)]);
      const Eigen::VectorXd g = m.gradients.row(a).transpose();
      grad += (k / n - shots) * g;
      info += shots * g * g.transpose() / n;
    }
    if (grad.norm() < 1e-8 * shots) {
      out.converged = true;
      break;
    }
    // Fisher scoring step, with a pseudo-inverse for the unidentifiable phase near the poles.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
    const Eigen::VectorXd lam = eig.eigenvalues();
    const double top = std::max(lam.maxCoeff(), 1e-300);
    Eigen::VectorXd step = Eigen::VectorXd::Zero(t.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      if (lam(i) > 1e-12 * top) {
        const Eigen::VectorXd v = eig.eigenvectors().col(i);
        step += v * (v.dot(grad) / lam(i));
      }
    }
    bool moved = false;
    for (double scale = 1.0; scale > 1e-12; scale *= 0.5) {
      Eigen::VectorXd trial = t + scale * step;
      trial = model.fold(trial);
      if (!model.feasible(trial)) continue;
      const double lt = model.loglik(trial);
      if (lt >= l) {
        moved = lt > l;
        t = trial;
        l = lt;
        break;
      }
    }
    if (!moved) {
      // No ascent direction left at working precision: the gradient test is
      // as tight as the likelihood resolves.
      out.converged = grad.norm() < 1e-6 * shots;
      break;
    }
  }
  out.params = model.params(t);
  out.params.phi_minus = wrap_phase(out.params.phi_minus);
  return out;
}

MseReport mse_benchmark(const ModalParams& p, const ReceiverSpec& spec, const Scenario& scenario,
                        int trials, std::int64_t shots, Estimator estimator, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorKind::InvalidState, "trials must be >= 1");
  const StokesVector truth = stokes_from_modal(p);
  const Eigen::Vector3d target(truth.s1, truth.s2, truth.s3);

  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d sum_sq = Eigen::Vector3d::Zero();
  MseReport r;
  r.trials = trials;
  int used = 0;
  for (int t = 0; t < trials; ++t) {
    const CountRecord rec =
        sample_counts(p, spec, shots, splitmix64(seed + static_cast<std::uint64_t>(t)));
    StokesVector est;
    try {
      if (estimator == Estimator::Naive) {
        est = naive_stokes_estimate(rec);
      } else {
        const MleResult m = mle_estimate(rec, scenario, p.s0());
        if (!m.converged) ++r.not_converged;
        est = stokes_from_modal(m.params);
      }
    } catch (const Error&) {
      ++r.excluded;
      continue;
    }
    const Eigen::Vector3d err = Eigen::Vector3d(est.s1, est.s2, est.s3) - target;
    sum += err;
    sum_sq += err.cwiseAbs2();
    ++used;
  }
  r.per_parameter_mse.assign(3, std::numeric_limits<double>::quiet_NaN());
  r.bias.assign(3, std::numeric_limits<double>::quiet_NaN());
  r.stderr_.assign(3, std::numeric_limits<double>::quiet_NaN());
  if (used == 0) {
    r.total = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.total = 0.0;
  const double n = static_cast<double>(used);
  for (int j = 0; j < 3; ++j) {
    const double mean = sum(j) / n;
    const double mse = sum_sq(j) / n;
    r.per_parameter_mse[j] = static_cast<double>(shots) * mse;
    r.total += r.per_parameter_mse[j];
    r.bias[j] = mean;
    const double var = used > 1 ? (sum_sq(j) - n * mean * mean) / (n - 1.0) : 0.0;
    r.stderr_[j] = used > 1 ? std::sqrt(std::max(var, 0.0) / n) : 0.0;
  }
  return r;
}

}  // namespace polarimetry
