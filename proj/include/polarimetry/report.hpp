#pragma once

// Point reports and sphere scans shared by the CLI and the acceptance suite.

#include <json.hpp>
#include <string>
#include <vector>

#include "polarimetry/polcore.hpp"
#include "polarimetry/simkit.hpp"

namespace polarimetry {

std::string version_string();

struct BoundReport {
  Scenario scenario;
  StokesVector point;
  ModalParams modal;
  double crb_stokes = 0.0;   // may be +inf
  double crb_tetra = 0.0;    // may be +inf
  double tetra_x_opt = 0.0;
  double qcrb = 0.0;
  double hcrb = 0.0;
  double double_homodyne_ref = 0.0;
  bool pole = false;
  bool vacuum = false;
  std::vector<std::string> flags;
};

/// Every bound at `point`. On the S1 poles the bounds that are discontinuous
/// or undefined there are replaced by their limits and flagged. Throws
/// InvalidState for a vector that is not fully polarized.
BoundReport evaluate_bounds(const StokesVector& point, const Scenario& scenario);

/// Ordering checks qcrb <= hcrb <= 2 qcrb and hcrb <= finite receiver CRBs,
/// with slack `tol * S0`. Returns the names of the violated relations.
std::vector<std::string> ordering_violations(const BoundReport& r, double tol = 1e-8);

/// Flat JSON object; infinities become null with an "<key>_infinite" flag.
nlohmann::ordered_json to_json(const BoundReport& r, const std::string& args);

nlohmann::ordered_json to_json(const MseReport& r);

/// 12 significant digits, "inf"/"-inf"/"nan", no negative zero, no locale.
std::string format_number(double v);

/// Columns available to scans, in output order.
const std::vector<std::string>& scan_bound_names();

struct ScanOptions {
  int n_theta = 64;
  int n_phi = 128;
  double s0 = 1.0;
  Scenario scenario;
  std::vector<std::string> bounds;  // subset of scan_bound_names(), kept in canonical order
};

struct ScanRow {
  GridPoint point;
  std::vector<double> values;  // one per selected bound
};

struct ScanTable {
  std::vector<std::string> columns;  // selected bounds
  std::vector<ScanRow> rows;
};

/// Evaluates only the requested bounds. Throws InvalidState for unknown names.
ScanTable run_scan(const ScanOptions& opt);

/// Header line, column line and rows, LF terminated.
std::string scan_csv(const ScanTable& t, const std::string& args);

}  // namespace polarimetry
