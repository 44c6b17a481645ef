#include "polarimetry/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "polarimetry/holevo.hpp"
#include "polarimetry/qfisher.hpp"
#include "polarimetry/receivers.hpp"

namespace polarimetry {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct Want {
  bool crb_stokes = true;
  bool crb_tetra = true;
  bool qcrb = true;
  bool hcrb = true;
};

// Limits of the known-phase HCRB and of the receivers on the S1 poles.
double hcrb_pole_limit(const Scenario& sc, double s0) {
  if (sc.phase_known) return sc.power_known ? s0 : 2.0 * s0;
  return sc.power_known ? 4.0 * s0 : 5.0 * s0;
}

BoundReport evaluate(const StokesVector& point, const Scenario& scenario, const Want& want) {
  if (!point.is_fully_polarized()) {
    std::ostringstream msg;
    msg << "Stokes vector (" << point.s0 << ", " << point.s1 << ", " << point.s2 << ", "
        << point.s3 << ") violates S0^2 = S1^2 + S2^2 + S3^2";
    throw Error(ErrorKind::InvalidState, msg.str());
  }
  BoundReport r;
  r.scenario = scenario;
  r.point = point;
  const double s0 = point.s0;
  r.double_homodyne_ref = 6.0 * s0;
  if (s0 <= 0.0) {
    r.vacuum = true;
    r.crb_stokes = r.crb_tetra = r.tetra_x_opt = r.qcrb = r.hcrb = kNan;
    r.flags.push_back("vacuum");
    return r;
  }
  const ModalFromStokes mf = modal_from_stokes(point);
  r.modal = mf.params;
  r.pole = mf.degenerate_pole;
  if (r.pole) r.flags.push_back("degenerate_pole");
  const ModalParams& p = r.modal;

  auto substituted = [&](const char* name) {
    r.pole = true;
    r.flags.push_back(std::string(name) + "_pole_limit");
  };

  if (want.hcrb) {
    try {
      r.hcrb = holevo_cost(p, scenario).cost_stokes;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegeneratePole) throw;
      r.hcrb = hcrb_pole_limit(scenario, s0);
      substituted("hcrb");
    }
  } else {
    r.hcrb = kNan;
  }

  if (want.qcrb) {
    try {
      r.qcrb = qcrb_cost(p, scenario);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegeneratePole && e.kind() != ErrorKind::SingularQfi) throw;
      r.qcrb = qcrb_closed_form(point, scenario);
      substituted("qcrb");
    }
    if (!mf.degenerate_pole) {
      const auto comm = sld_commutator_expectations(p, scenario);
      const bool noncommuting =
          std::any_of(comm.begin(), comm.end(), [](auto c) { return std::abs(c) > 1e-12; });
      if (noncommuting) r.flags.push_back("qcrb_unattainable");
    }
  } else {
    r.qcrb = kNan;
  }

  const Scenario receiver_scenario{scenario.power_known, false};
  if (want.crb_stokes) {
    try {
      const CrbResult c = crb_detail(p, ReceiverSpec::stokes(), receiver_scenario);
      r.crb_stokes = c.cost;
      if (c.singular) r.flags.push_back("crb_stokes_singular_fisher");
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegeneratePole) throw;
      r.crb_stokes = scenario.power_known ? stokes_const_closed_form(point)
                                          : stokes_bound_closed_form(point);
      substituted("crb_stokes");
    }
  } else {
    r.crb_stokes = kNan;
  }

  if (want.crb_tetra) {
    try {
      const TetraOptimum t = tetrahedron_optimize(p, receiver_scenario);
      r.crb_tetra = t.cost;
      r.tetra_x_opt = t.x_opt;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegeneratePole) throw;
      r.crb_tetra = scenario.power_known ? 4.0 * s0 : 5.0 * s0;
      r.tetra_x_opt = 1.0 / std::sqrt(2.0);
      substituted("crb_tetra");
    }
  } else {
    r.crb_tetra = r.tetra_x_opt = kNan;
  }

  for (const auto& v : ordering_violations(r)) r.flags.push_back("ordering_violation:" + v);
  return r;
}

void put_number(nlohmann::ordered_json& j, const std::string& key, double v,
                std::vector<std::string>& extra_flags) {
  if (std::isfinite(v)) {
    j[key] = v;
  } else {
    j[key] = nullptr;
    if (std::isinf(v)) extra_flags.push_back(key + "_infinite");
  }
}

}  // namespace

std::string version_string() { return POLARIMETRY_VERSION; }

BoundReport evaluate_bounds(const StokesVector& point, const Scenario& scenario) {
  return evaluate(point, scenario, Want{});
}

std::vector<std::string> ordering_violations(const BoundReport& r, double tol) {
  std::vector<std::string> out;
  const double slack = tol * std::max(1.0, r.point.s0);
  const bool q = std::isfinite(r.qcrb);
  const bool h = std::isfinite(r.hcrb);
  if (q && h && r.qcrb > r.hcrb + slack) out.push_back("qcrb<=hcrb");
  if (q && h && r.hcrb > 2.0 * r.qcrb + slack) out.push_back("hcrb<=2qcrb");
  if (h && std::isfinite(r.crb_stokes) && r.hcrb > r.crb_stokes + slack) {
    out.push_back("hcrb<=crb_stokes");
  }
  if (h && std::isfinite(r.crb_tetra) && r.hcrb > r.crb_tetra + slack) {
    out.push_back("hcrb<=crb_tetra");
  }
  return out;
}

nlohmann::ordered_json to_json(const BoundReport& r, const std::string& args) {
  nlohmann::ordered_json j;
  std::vector<std::string> flags = r.flags;
  j["tool"] = "polarimetry-bounds";
  j["version"] = version_string();
  j["args"] = args;
  j["power_known"] = r.scenario.power_known;
  j["phase_known"] = r.scenario.phase_known;
  j["s0"] = r.point.s0;
  j["s1"] = r.point.s1;
  j["s2"] = r.point.s2;
  j["s3"] = r.point.s3;
  put_number(j, "crb_stokes", r.crb_stokes, flags);
  put_number(j, "crb_tetra", r.crb_tetra, flags);
  put_number(j, "tetra_x_opt", r.tetra_x_opt, flags);
  put_number(j, "qcrb", r.qcrb, flags);
  put_number(j, "hcrb", r.hcrb, flags);
  j["double_homodyne_ref"] = r.double_homodyne_ref;
  j["flags"] = flags;
  return j;
}

nlohmann::ordered_json to_json(const MseReport& r) {
  nlohmann::ordered_json j;
  std::vector<std::string> unused;
  auto arr = [&](const std::vector<double>& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? nlohmann::ordered_json(x) : nullptr);
    return a;
  };
  j["trials"] = r.trials;
  j["excluded"] = r.excluded;
  j["not_converged"] = r.not_converged;
  j["mse_s1"] = std::isfinite(r.per_parameter_mse[0]) ? nlohmann::ordered_json(r.per_parameter_mse[0]) : nullptr;
  j["mse_s2"] = std::isfinite(r.per_parameter_mse[1]) ? nlohmann::ordered_json(r.per_parameter_mse[1]) : nullptr;
  j["mse_s3"] = std::isfinite(r.per_parameter_mse[2]) ? nlohmann::ordered_json(r.per_parameter_mse[2]) : nullptr;
  put_number(j, "total", r.total, unused);
  j["bias"] = arr(r.bias);
  j["stderr"] = arr(r.stderr_);
  return j;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drops the sign of -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

const std::vector<std::string>& scan_bound_names() {
  static const std::vector<std::string> names{"crb_stokes", "crb_tetra", "tetra_x_opt", "qcrb",
                                              "hcrb"};
  return names;
}

ScanTable run_scan(const ScanOptions& opt) {
  const auto& names = scan_bound_names();
  for (const auto& b : opt.bounds) {
    if (std::find(names.begin(), names.end(), b) == names.end()) {
      throw Error(ErrorKind::InvalidState, "unknown bound column '" + b + "'");
    }
  }
  ScanTable t;
  for (const auto& n : names) {
    if (std::find(opt.bounds.begin(), opt.bounds.end(), n) != opt.bounds.end()) {
      t.columns.push_back(n);
    }
  }
  auto has = [&](const char* n) {
    return std::find(t.columns.begin(), t.columns.end(), n) != t.columns.end();
  };
  Want want;
  want.crb_stokes = has("crb_stokes");
  want.crb_tetra = has("crb_tetra") || has("tetra_x_opt");
  want.qcrb = has("qcrb");
  want.hcrb = has("hcrb");

  const auto grid = sphere_grid(opt.n_theta, opt.n_phi, opt.s0);
  t.rows.resize(grid.size());
  auto fill = [&](std::size_t i) {
    const BoundReport r = evaluate(grid[i].stokes, opt.scenario, want);
    ScanRow row{grid[i], {}};
    for (const auto& c : t.columns) {
      if (c == "crb_stokes") row.values.push_back(r.crb_stokes);
      if (c == "crb_tetra") row.values.push_back(r.crb_tetra);
      if (c == "tetra_x_opt") row.values.push_back(r.tetra_x_opt);
      if (c == "qcrb") row.values.push_back(r.qcrb);
      if (c == "hcrb") row.values.push_back(r.hcrb);
    }
    t.rows[i] = std::move(row);
  };

  // Rows land in their grid slot, so the output order never depends on scheduling.
  const unsigned workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), grid.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        fill(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = grid.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return t;
}

std::string scan_csv(const ScanTable& t, const std::string& args) {
  std::string out = "# polarimetry-bounds v" + version_string() + " " + args + "\n";
  out += "theta,phi,s0,s1,s2,s3";
  for (const auto& c : t.columns) out += "," + c;
  out += "\n";
  for (const auto& row : t.rows) {
    const auto& s = row.point.stokes;
    out += format_number(row.point.theta) + "," + format_number(row.point.phi) + "," +
           format_number(s.s0) + "," + format_number(s.s1) + "," + format_number(s.s2) + "," +
           format_number(s.s3);
    for (double v : row.values) out += "," + format_number(v);
    out += "\n";
  }
  return out;
}

}  // namespace polarimetry
