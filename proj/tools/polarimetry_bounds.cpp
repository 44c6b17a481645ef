// polarimetry-bounds: point bounds, sphere scans, receiver Monte Carlo and
// oracle verification.
//
// Exit codes: 0 ok, 1 verification or numerical failure, 2 invalid input,
// 3 degenerate point (partial report), 4 I/O error.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "polarimetry/polcore.hpp"
#include "polarimetry/receivers.hpp"
#include "polarimetry/report.hpp"
#include "polarimetry/simkit.hpp"
#include "polarimetry/verify.hpp"

using namespace polarimetry;

namespace {

enum Exit { kOk = 0, kFailed = 1, kInvalid = 2, kDegenerate = 3, kIo = 4 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidState:
    case ErrorKind::BadArity:
    case ErrorKind::WrongReceiver:
    case ErrorKind::AllZeroCounts:
      return kInvalid;
    case ErrorKind::DegeneratePole:
      return kDegenerate;
    default:
      return kFailed;
  }
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  ss.imbue(std::locale::classic());
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw Error(ErrorKind::InvalidState, std::string("cannot parse ") + what + " entry '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

struct StateArgs {
  std::string stokes;
  std::string modal;
  double s0 = 1.0;
  bool power_known = false;
  bool phase_known = false;

  void add(CLI::App* cmd) {
    auto* st = cmd->add_option("--stokes", stokes,
                               "s0,s1,s2,s3 (or a direction s1,s2,s3 scaled to --s0)");
    auto* mo = cmd->add_option("--modal", modal, "a_h,a_v,phi_minus");
    st->excludes(mo);
    cmd->add_option("--s0", s0, "power used with a bare direction")->capture_default_str();
    cmd->add_flag("--power-known", power_known, "S0 is known; estimate the direction only");
    cmd->add_flag("--phase-known", phase_known, "global phase is known (reference beam)");
  }

  Scenario scenario() const { return {power_known, phase_known}; }

  StokesVector point() const {
    if (!modal.empty()) {
      const auto v = parse_list(modal, "--modal");
      if (v.size() != 3) throw Error(ErrorKind::InvalidState, "--modal needs a_h,a_v,phi_minus");
      return stokes_from_modal(ModalParams::make(v[0], v[1], v[2]));
    }
    if (stokes.empty()) throw Error(ErrorKind::InvalidState, "give --stokes or --modal");
    const auto v = parse_list(stokes, "--stokes");
    if (v.size() == 4) return {v[0], v[1], v[2], v[3]};
    if (v.size() == 3) {
      const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      if (!(r > 0.0) || !(s0 >= 0.0)) {
        throw Error(ErrorKind::InvalidState, "direction must be nonzero and --s0 nonnegative");
      }
      return {s0, s0 * v[0] / r, s0 * v[1] / r, s0 * v[2] / r};
    }
    throw Error(ErrorKind::InvalidState, "--stokes needs 3 or 4 comma-separated values");
  }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  f.close();
  if (!f) throw IoError("write to '" + path + "' failed");
}

std::string echo_args(int argc, char** argv) {
  std::string out;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) out += ' ';
    out += argv[i];
  }
  return out;
}

int run_bounds(const StateArgs& st, const std::string& out, const std::string& args) {
  const BoundReport r = evaluate_bounds(st.point(), st.scenario());
  emit(to_json(r, args).dump(2) + "\n", out);
  // The constrained chart does not exist on a pole, so those numbers are limits only.
  if (r.vacuum || (r.pole && st.power_known)) return kDegenerate;
  return kOk;
}

int run_scan_cmd(const std::string& grid, const StateArgs& st, const std::string& bounds,
                 const std::string& out, const std::string& args) {
  ScanOptions opt;
  char x = 0;
  std::istringstream g(grid);
  if (!(g >> opt.n_theta >> x >> opt.n_phi) || (x != 'x' && x != 'X') || !g.eof()) {
    throw Error(ErrorKind::InvalidState, "--grid expects NxM, got '" + grid + "'");
  }
  if (!(st.s0 > 0.0)) throw Error(ErrorKind::InvalidState, "--s0 must be positive for a scan");
  opt.s0 = st.s0;
  opt.scenario = st.scenario();
  if (bounds.empty() || bounds == "all") {
    opt.bounds = scan_bound_names();
  } else {
    std::stringstream ss(bounds);
    std::string b;
    while (std::getline(ss, b, ',')) opt.bounds.push_back(b);
  }
  // Probe the output path before spending time on the grid.
  if (!out.empty() && out != "-") {
    std::ofstream probe(out, std::ios::binary);
    if (!probe) throw IoError("cannot open '" + out + "' for writing");
  }
  emit(scan_csv(run_scan(opt), args), out);
  return kOk;
}

struct SimArgs {
  std::string receiver = "stokes";
  double x = 0.0;
  std::string estimator = "mle";
  int trials = 1000;
  std::int64_t shots = 20;
  std::uint64_t seed = 1;
};

int run_simulate(const StateArgs& st, const SimArgs& sa, const std::string& out,
                 const std::string& args) {
  const StokesVector point = st.point();
  const BoundReport bounds = evaluate_bounds(point, st.scenario());
  if (bounds.vacuum) throw Error(ErrorKind::InvalidState, "cannot simulate the vacuum");
  if (bounds.pole) throw Error(ErrorKind::DegeneratePole, "simulation needs an interior state");
  if (sa.trials < 1 || sa.shots < 1) {
    throw Error(ErrorKind::InvalidState, "--trials and --shots must be positive");
  }
  ReceiverSpec spec = ReceiverSpec::stokes();
  if (sa.receiver == "tetrahedron" || sa.receiver == "tetra") {
    spec = ReceiverSpec::tetrahedron(sa.x > 0.0 ? sa.x : bounds.tetra_x_opt);
  } else if (sa.receiver != "stokes") {
    throw Error(ErrorKind::InvalidState, "unknown receiver '" + sa.receiver + "'");
  }
  Estimator est = Estimator::Mle;
  if (sa.estimator == "naive") {
    est = Estimator::Naive;
  } else if (sa.estimator != "mle") {
    throw Error(ErrorKind::InvalidState, "unknown estimator '" + sa.estimator + "'");
  }
  if (est == Estimator::Naive && spec.kind != ReceiverKind::Stokes) {
    throw Error(ErrorKind::WrongReceiver, "the naive estimator needs the Stokes receiver");
  }
  const Scenario sc{st.power_known, false};
  const MseReport m =
      mse_benchmark(bounds.modal, spec, sc, sa.trials, sa.shots, est, sa.seed);

  nlohmann::ordered_json j;
  j["tool"] = "polarimetry-bounds";
  j["version"] = version_string();
  j["args"] = args;
  j["receiver"] = spec.kind == ReceiverKind::Stokes ? "stokes" : "tetrahedron";
  if (spec.kind == ReceiverKind::Tetrahedron) {
    j["ppbs_x"] = spec.ppbs_x;
  } else {
    j["ppbs_x"] = nullptr;
  }
  j["estimator"] = sa.estimator;
  j["shots"] = sa.shots;
  j["seed"] = sa.seed;
  j["mse"] = to_json(m);
  j["total_over_5s0"] = std::isfinite(m.total) ? nlohmann::ordered_json(m.total / (5.0 * point.s0))
                                               : nullptr;
  j["bounds"] = to_json(bounds, args);
  emit(j.dump(2) + "\n", out);
  return kOk;
}

int run_verify(const VerifyOptions& opt, const std::string& out) {
  const VerifySummary s = run_verification(opt);
  std::ostringstream text;
  text.imbue(std::locale::classic());
  for (const auto& c : s.checks) {
    text << (c.passed ? "PASS " : "FAIL ") << c.name << "  worst=" << format_number(c.worst)
         << " tol=" << format_number(c.tol);
    if (!c.passed && !c.detail.empty()) text << "  (" << c.detail << ")";
    text << "\n";
  }
  const auto failed = s.failed();
  if (failed.empty()) {
    text << "all " << s.checks.size() << " checks passed\n";
  } else {
    text << "failed:";
    for (const auto& f : failed) text << " " << f;
    text << "\n";
  }
  std::cout << text.str();
  if (!out.empty()) emit(to_json(s).dump(2) + "\n", out);
  return failed.empty() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Precision bounds for coherent-light polarimetry"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  StateArgs bounds_state;
  std::string bounds_out;
  auto* bounds = app.add_subcommand("bounds", "all bounds at one state, as JSON");
  bounds_state.add(bounds);
  bounds->add_option("--out", bounds_out, "output file (default stdout)");

  StateArgs scan_state;
  std::string grid = "64x128";
  std::string scan_bounds = "all";
  std::string scan_out;
  auto* scan = app.add_subcommand("scan", "bounds over a Poincare-sphere grid, as CSV");
  scan->add_option("--grid", grid, "NxM: inclinations x azimuths")->capture_default_str();
  scan->add_option("--s0", scan_state.s0, "sphere radius")->capture_default_str();
  scan->add_flag("--power-known", scan_state.power_known);
  scan->add_flag("--phase-known", scan_state.phase_known);
  scan->add_option("--bounds", scan_bounds,
                   "comma list of crb_stokes,crb_tetra,tetra_x_opt,qcrb,hcrb or 'all'")
      ->capture_default_str();
  scan->add_option("--out", scan_out, "output file (default stdout)");

  StateArgs sim_state;
  SimArgs sim;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo MSE of a receiver, as JSON");
  sim_state.add(simulate);
  simulate->add_option("--receiver", sim.receiver, "stokes or tetrahedron")->capture_default_str();
  simulate->add_option("--x", sim.x, "PPBS coefficient (default: optimal x)");
  simulate->add_option("--estimator", sim.estimator, "mle or naive")->capture_default_str();
  simulate->add_option("--trials", sim.trials)->capture_default_str();
  simulate->add_option("--shots", sim.shots)->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--out", sim_out, "output file (default stdout)");

  VerifyOptions vopt;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "closed forms against the Fock-space oracle");
  verify->add_option("--s0-max", vopt.s0_max, "largest S0 of the random states; 0 = vacuum only")
      ->capture_default_str();
  verify->add_option("--trials", vopt.trials, "random states")->capture_default_str();
  verify->add_option("--seed", vopt.seed)->capture_default_str();
  verify->add_option("--inject-fault", vopt.inject_fault, "flip the sign of one check's reference");
  verify->add_option("--out", verify_out, "JSON summary file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  const std::string args = echo_args(argc, argv);
  try {
    if (*bounds) return run_bounds(bounds_state, bounds_out, args);
    if (*scan) return run_scan_cmd(grid, scan_state, scan_bounds, scan_out, args);
    if (*simulate) return run_simulate(sim_state, sim, sim_out, args);
    if (*verify) return run_verify(vopt, verify_out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  return kInvalid;
}
