#pragma once

// Thin wrappers over GSL's simplex and golden-section minimizers.

#include <functional>
#include <vector>

namespace polarimetry::optim {

using Objective = std::function<double(const std::vector<double>&)>;

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;  // stopped on value stagnation rather than simplex size
};

/// Nelder-Mead (GSL nmsimplex2). Stops when the simplex characteristic size
/// drops below `size_tol`, or after 50*dim iterations without a decrease in the
/// best value. A zero-dimensional problem just evaluates f at x0.
SimplexResult nelder_mead(const Objective& f, const std::vector<double>& x0, double step,
                          double size_tol = 1e-9, int max_iter = 20000);

/// Points of a Halton sequence mapped into [lo, hi]^dim, skipping the origin-like first point.
std::vector<std::vector<double>> halton_points(int count, int dim, double lo, double hi);

struct ScalarResult {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Golden-section search on [lo, hi] with interior guess `mid`; needs f(mid) below both ends.
/// Falls back to returning `mid` when the bracket is not valid.
ScalarResult golden_section(const std::function<double(double)>& f, double lo, double mid,
                            double hi, double x_tol = 1e-8, int max_iter = 500);

/// Coarse scan on an even grid followed by golden-section refinement around the best cell.
/// Non-finite samples are skipped.
ScalarResult scan_then_golden(const std::function<double(double)>& f, double lo, double hi,
                              double grid_step, double x_tol = 1e-8);

}  // namespace polarimetry::optim
