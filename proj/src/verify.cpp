#include "polarimetry/verify.hpp"

#include <gsl/gsl_randist.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "polarimetry/fockoracle.hpp"
#include "polarimetry/holevo.hpp"
#include "polarimetry/qfisher.hpp"
#include "polarimetry/receivers.hpp"

namespace polarimetry {

namespace {

using cd = std::complex<double>;

struct Context {
  const VerifyOptions& opt;
  std::mt19937_64 rng;
  std::vector<ModalParams> states;  // shared by every randomized check
};

// Keeps both amplitudes well away from zero so the constrained charts apply.
std::vector<ModalParams> random_states(std::mt19937_64& rng, double s0_max, int count) {
  std::uniform_real_distribution<double> s0_dist(0.25 * s0_max, s0_max);
  std::uniform_real_distribution<double> t_dist(0.15, std::numbers::pi / 2 - 0.15);
  std::uniform_real_distribution<double> phi_dist(-std::numbers::pi, std::numbers::pi);
  std::vector<ModalParams> out;
  for (int i = 0; i < count; ++i) {
    const double r = std::sqrt(s0_dist(rng));
    const double t = t_dist(rng);
    out.push_back(ModalParams::make(r * std::cos(t), r * std::sin(t), phi_dist(rng), phi_dist(rng)));
  }
  return out;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

const Scenario kScenarios[] = {{false, true}, {false, false}, {true, true}, {true, false}};

std::string scenario_tag(const Scenario& s) {
  return std::string(s.power_known ? "constrained" : "general") + "/" +
         (s.phase_known ? "known" : "averaged");
}

// Each check returns the worst deviation normalised by its tolerance scale.
// `sign` is -1 when a fault is injected into the check's reference value.
using CheckFn = std::function<double(Context&, double sign, std::string& detail)>;

struct Check {
  std::string name;
  double tol;
  bool vacuum;
  CheckFn run;
};

double check_vacuum_state(Context&, double sign, std::string&) {
  const auto psi = fock::coherent_two_mode(ModalParams{}, 4);
  Eigen::VectorXcd expected = Eigen::VectorXcd::Zero(psi.amplitudes.size());
  expected(0) = sign;
  return (psi.amplitudes - expected).cwiseAbs().maxCoeff();
}

double check_vacuum_phase_average(Context&, double sign, std::string&) {
  const auto rho = fock::phase_average(fock::coherent_two_mode(ModalParams{}, 4));
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(rho.rho.rows(), rho.rho.cols());
  expected(0, 0) = sign;
  return (rho.rho - expected).cwiseAbs().maxCoeff();
}

double check_vacuum_qfi(Context&, double sign, std::string&) {
  const auto q = fock::numerical_qfi(ModalParams{}, Scenario{false, true}, 4);
  // Amplitude directions keep QFI 4; the phase direction is unidentifiable.
  const Eigen::Vector3d expected(4.0 * sign, 4.0 * sign, 0.0);
  return max_abs(Eigen::MatrixXd(q.qfi.entries) - Eigen::MatrixXd(expected.asDiagonal()));
}

double check_stokes_means(Context& ctx, double sign, std::string& detail) {
  double worst = 0.0;
  for (const auto& p : ctx.states) {
    const int cutoff = fock::default_cutoff(p.s0());
    const auto ops = fock::stokes_operators(cutoff);
    const auto psi = fock::coherent_two_mode(p, cutoff);
    const StokesVector s = stokes_from_modal(p);
    const double ref[4] = {s.s0, s.s1, s.s2, s.s3};
    for (int j = 0; j < 4; ++j) {
      const double d = std::abs(fock::expectation(ops.s[j], psi) - sign * ref[j]);
      if (d > worst) {
        worst = d;
        detail = "S" + std::to_string(j);
      }
    }
  }
  return worst;
}

double check_stokes_variances(Context& ctx, double sign, std::string& detail) {
  double worst = 0.0;
  for (const auto& p : ctx.states) {
    const int cutoff = fock::default_cutoff(p.s0());
    const auto ops = fock::stokes_operators(cutoff);
    const auto psi = fock::coherent_two_mode(p, cutoff);
    for (int j = 1; j < 4; ++j) {
      const double d = std::abs(fock::variance(ops.s[j], psi) - sign * p.s0()) / p.s0();
      if (d > worst) {
        worst = d;
        detail = "Var S" + std::to_string(j);
      }
    }
  }
  return worst;
}

double check_stokes_commutators(Context& ctx, double sign, std::string& detail) {
  // With S3 = i(a^dag b - b^dag a) the cyclic relations carry -2i.
  const auto ops = fock::stokes_operators(fock::default_cutoff(ctx.opt.s0_max));
  const int cyc[3][3] = {{1, 2, 3}, {2, 3, 1}, {3, 1, 2}};
  double worst = 0.0;
  for (const auto& c : cyc) {
    const double d = fock::commutator_residual(ops, c[0], c[1], c[2], cd(0.0, -2.0 * sign));
    if (d > worst) {
      worst = d;
      detail = "[S" + std::to_string(c[0]) + ",S" + std::to_string(c[1]) + "]";
    }
  }
  return worst;
}

double check_phase_average(Context& ctx, double sign, std::string& detail) {
  double worst = 0.0;
  for (const auto& p : ctx.states) {
    const int cutoff = fock::default_cutoff(p.s0());
    const auto rho = fock::phase_average(fock::coherent_two_mode(p, cutoff));
    const double comm = fock::photon_number_commutator(rho);
    if (comm > worst) {
      worst = comm;
      detail = "[rho, N]";
    }
    const double trace_err = std::abs(rho.rho.trace().real() - (1.0 - rho.tail_mass));
    if (trace_err > worst) {
      worst = trace_err;
      detail = "trace";
    }
    for (int total = 0; total <= cutoff; ++total) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho.block(total));
      const double top = eig.eigenvalues().maxCoeff();
      const double poisson = sign * gsl_ran_poisson_pdf(static_cast<unsigned>(total), p.s0());
      const double d = std::abs(top - poisson);
      if (d > worst) {
        worst = d;
        detail = "block N=" + std::to_string(total);
      }
    }
  }
  return worst;
}

CheckFn qfi_check(Scenario sc) {
  return [sc](Context& ctx, double sign, std::string& detail) {
    double worst = 0.0;
    for (const auto& p : ctx.states) {
      const auto num = fock::numerical_qfi(p, sc, fock::default_cutoff(p.s0()));
      const Eigen::MatrixXd ref = sign * qfi_matrix(p, sc).entries;
      const double d = max_abs(num.qfi.entries - ref) / std::max(1.0, max_abs(ref));
      if (d > worst) {
        worst = d;
        std::ostringstream os;
        os << "a_h=" << p.a_h << " a_v=" << p.a_v;
        detail = os.str();
      }
    }
    return worst;
  };
}

double check_qfi_finite_difference(Context& ctx, double sign, std::string& detail) {
  double worst = 0.0;
  const ModalParams& p = ctx.states.front();
  const int cutoff = fock::default_cutoff(p.s0());
  for (const auto& sc : kScenarios) {
    const auto a = fock::numerical_qfi(p, sc, cutoff, fock::DerivativeMode::Analytic);
    const auto f = fock::numerical_qfi(p, sc, cutoff, fock::DerivativeMode::FiniteDifference);
    const double d = max_abs(f.qfi.entries - sign * a.qfi.entries) /
                     std::max(1.0, max_abs(a.qfi.entries));
    if (d > worst) {
      worst = d;
      detail = scenario_tag(sc);
    }
  }
  return worst;
}

double check_sld_commutators(Context& ctx, double sign, std::string& detail) {
  double worst = 0.0;
  for (const auto& p : ctx.states) {
    const int cutoff = fock::default_cutoff(p.s0());
    for (const auto& sc : kScenarios) {
      const auto num = fock::numerical_qfi(p, sc, cutoff);
      const auto ref = sld_commutator_expectations(p, sc);
      const int phi = sc.num_params() - 1;
      for (std::size_t k = 0; k < ref.size(); ++k) {
        const cd got = num.commutators(phi, static_cast<int>(k));
        const double d = std::abs(got - sign * ref[k]) / std::max(1.0, std::abs(ref[k]));
        if (d > worst) {
          worst = d;
          detail = scenario_tag(sc) + " <[L_phi, L_" + std::to_string(k) + "]>";
        }
      }
    }
  }
  return worst;
}

CheckFn stokes_fisher_check(Scenario sc) {
  return [sc](Context& ctx, double sign, std::string& detail) {
    double worst = 0.0;
    for (const auto& p : ctx.states) {
      const auto f = poisson_fisher(arm_means(p, ReceiverSpec::stokes(), sc), sc).entries;
      const Eigen::MatrixXd ref = sign * stokes_fisher_closed_form(p, sc);
      const double d = max_abs(f - ref) / std::max(1.0, max_abs(ref));
      if (d > worst) {
        worst = d;
        std::ostringstream os;
        os << "a_h=" << p.a_h << " a_v=" << p.a_v << " phi=" << p.phi_minus;
        detail = os.str();
      }
    }
    return worst;
  };
}

CheckFn stokes_crb_check(Scenario sc) {
  return [sc](Context& ctx, double sign, std::string& detail) {
    double worst = 0.0;
    for (const auto& p : ctx.states) {
      const StokesVector s = stokes_from_modal(p);
      const double ref =
          sign * (sc.power_known ? stokes_const_closed_form(s) : stokes_bound_closed_form(s));
      const double d = std::abs(crb_cost(p, ReceiverSpec::stokes(), sc) - ref) / p.s0();
      if (d > worst) {
        worst = d;
        std::ostringstream os;
        os << "S=(" << s.s0 << "," << s.s1 << "," << s.s2 << "," << s.s3 << ")";
        detail = os.str();
      }
    }
    return worst;
  };
}

double check_hcrb_unknown_phase(Context& ctx, double sign, std::string& detail) {
  double worst = 0.0;
  for (const auto& p : ctx.states) {
    for (bool power_known : {false, true}) {
      const Scenario sc{power_known, false};
      const double ref = sign * (power_known ? 4.0 : 5.0) * p.s0();
      const double d = std::abs(holevo_cost(p, sc).cost_stokes - ref) / p.s0();
      if (d > worst) {
        worst = d;
        detail = scenario_tag(sc);
      }
    }
  }
  return worst;
}

double check_qcrb_closed_form(Context& ctx, double sign, std::string& detail) {
  double worst = 0.0;
  for (const auto& p : ctx.states) {
    for (const auto& sc : kScenarios) {
      const double ref = sign * qcrb_closed_form(stokes_from_modal(p), sc);
      const double d = std::abs(qcrb_cost(p, sc) - ref) / p.s0();
      if (d > worst) {
        worst = d;
        detail = scenario_tag(sc);
      }
    }
  }
  return worst;
}

double check_receiver_lossless(Context& ctx, double sign, std::string& detail) {
  double worst = 0.0;
  for (const auto& p : ctx.states) {
    for (const auto& spec : {ReceiverSpec::stokes(), ReceiverSpec::tetrahedron(0.6)}) {
      const double total = arm_means(p, spec, Scenario{}).means.sum();
      const double d = std::abs(total - sign * p.s0());
      if (d > worst) {
        worst = d;
        detail = spec.kind == ReceiverKind::Stokes ? "stokes" : "tetrahedron";
      }
    }
  }
  return worst;
}

const std::vector<Check>& checks() {
  static const std::vector<Check> all{
      {"vacuum_state", 1e-14, true, check_vacuum_state},
      {"vacuum_phase_average", 1e-14, true, check_vacuum_phase_average},
      {"vacuum_qfi", 1e-12, true, check_vacuum_qfi},
      {"fock_stokes_means", 1e-8, false, check_stokes_means},
      {"fock_stokes_variances", 1e-6, false, check_stokes_variances},
      {"fock_stokes_commutators", 1e-10, false, check_stokes_commutators},
      {"fock_phase_average_blocks", 1e-10, false, check_phase_average},
      {"qfi_general_known", 1e-6, false, qfi_check({false, true})},
      {"qfi_general_averaged", 1e-6, false, qfi_check({false, false})},
      {"qfi_constrained_known", 1e-6, false, qfi_check({true, true})},
      {"qfi_constrained_averaged", 1e-6, false, qfi_check({true, false})},
      {"qfi_finite_difference", 1e-6, false, check_qfi_finite_difference},
      {"sld_commutators", 1e-6, false, check_sld_commutators},
      {"stokes_fisher_general", 1e-9, false, stokes_fisher_check({false, false})},
      {"stokes_fisher_constrained", 1e-9, false, stokes_fisher_check({true, false})},
      {"stokes_crb_general", 1e-9, false, stokes_crb_check({false, false})},
      {"stokes_crb_constrained", 1e-9, false, stokes_crb_check({true, false})},
      {"hcrb_unknown_phase", 1e-9, false, check_hcrb_unknown_phase},
      {"qcrb_closed_form", 1e-12, false, check_qcrb_closed_form},
      {"receiver_lossless", 1e-10, false, check_receiver_lossless},
  };
  return all;
}

}  // namespace

bool VerifySummary::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<std::string> VerifySummary::failed() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.passed) out.push_back(c.name);
  }
  return out;
}

const std::vector<std::string>& verify_check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : checks()) n.push_back(c.name);
    return n;
  }();
  return names;
}

VerifySummary run_verification(const VerifyOptions& opt) {
  if (!(opt.s0_max >= 0.0) || !std::isfinite(opt.s0_max)) {
    throw Error(ErrorKind::InvalidState, "s0-max must be a finite nonnegative number");
  }
  if (opt.trials < 1) throw Error(ErrorKind::InvalidState, "trials must be positive");
  const auto& names = verify_check_names();
  if (!opt.inject_fault.empty() &&
      std::find(names.begin(), names.end(), opt.inject_fault) == names.end()) {
    throw Error(ErrorKind::InvalidState, "unknown check '" + opt.inject_fault + "'");
  }
  Context ctx{opt, std::mt19937_64(opt.seed), {}};
  if (opt.s0_max > 0.0) ctx.states = random_states(ctx.rng, opt.s0_max, opt.trials);

  VerifySummary summary;
  for (const auto& c : checks()) {
    if (!c.vacuum && opt.s0_max == 0.0) continue;
    CheckResult r;
    r.name = c.name;
    r.tol = c.tol;
    const double sign = c.name == opt.inject_fault ? -1.0 : 1.0;
    try {
      r.worst = c.run(ctx, sign, r.detail);
      r.passed = r.worst <= c.tol;
    } catch (const Error& e) {
      r.worst = std::numeric_limits<double>::infinity();
      r.passed = false;
      r.detail = e.what();
    }
    summary.checks.push_back(std::move(r));
  }
  return summary;
}

nlohmann::ordered_json to_json(const VerifySummary& s) {
  nlohmann::ordered_json j;
  j["passed"] = s.all_passed();
  j["failed"] = s.failed();
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : s.checks) {
    nlohmann::ordered_json o;
    o["name"] = c.name;
    o["passed"] = c.passed;
    o["worst"] = std::isfinite(c.worst) ? nlohmann::ordered_json(c.worst) : nullptr;
    o["tol"] = c.tol;
    o["detail"] = c.detail;
    arr.push_back(std::move(o));
  }
  j["checks"] = std::move(arr);
  return j;
}

}  // namespace polarimetry
