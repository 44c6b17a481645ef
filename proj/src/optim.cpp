#include "polarimetry/optim.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_qrng.h>

#include <cmath>
#include <limits>
#include <memory>
#include <mutex>

namespace polarimetry::optim {

namespace {

void quiet_gsl() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

struct MultiminDeleter {
  void operator()(gsl_multimin_fminimizer* s) const { gsl_multimin_fminimizer_free(s); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinDeleter {
  void operator()(gsl_min_fminimizer* s) const { gsl_min_fminimizer_free(s); }
};

double multi_trampoline(const gsl_vector* v, void* params) {
  const auto& f = *static_cast<const Objective*>(params);
  std::vector<double> x(v->size);
  for (std::size_t i = 0; i < v->size; ++i) x[i] = gsl_vector_get(v, i);
  const double y = f(x);
  return std::isfinite(y) ? y : std::numeric_limits<double>::max();
}

double scalar_trampoline(double x, void* params) {
  const auto& f = *static_cast<const std::function<double(double)>*>(params);
  const double y = f(x);
  return std::isfinite(y) ? y : std::numeric_limits<double>::max();
}

}  // namespace

SimplexResult nelder_mead(const Objective& f, const std::vector<double>& x0, double step,
                          double size_tol, int max_iter) {
  quiet_gsl();
  SimplexResult out;
  if (x0.empty()) {
    out.x = x0;
    out.value = f(x0);
    out.converged = true;
    return out;
  }
  const std::size_t n = x0.size();
  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n));
  std::unique_ptr<gsl_vector, VectorDeleter> steps(gsl_vector_alloc(n));
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, x0[i]);
  gsl_vector_set_all(steps.get(), step);

  gsl_multimin_function fn;
  fn.n = n;
  fn.f = &multi_trampoline;
  fn.params = const_cast<Objective*>(&f);

  std::unique_ptr<gsl_multimin_fminimizer, MultiminDeleter> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), steps.get());

  // Near a smooth minimum f only resolves x to ~sqrt(eps), so a tiny size_tol
  // may never be met; a long run without any decrease counts as converged too.
  const int stall_limit = 50 * static_cast<int>(n);
  int status = GSL_CONTINUE;
  int iter = 0;
  int stalled = 0;
  double best = std::numeric_limits<double>::infinity();
  while (status == GSL_CONTINUE && iter < max_iter) {
    ++iter;
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), size_tol);
    if (!std::isfinite(best) || s->fval < best - 1e-15 * std::abs(best)) {
      best = s->fval;
      stalled = 0;
    } else if (++stalled >= stall_limit) {
      status = GSL_SUCCESS;
      out.stalled = true;
    }
  }
  out.iterations = iter;
  out.converged = status == GSL_SUCCESS;
  out.value = s->fval;
  out.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.x[i] = gsl_vector_get(s->x, i);
  return out;
}

std::vector<std::vector<double>> halton_points(int count, int dim, double lo, double hi) {
  std::vector<std::vector<double>> pts;
  if (count <= 0 || dim <= 0) return pts;
  std::unique_ptr<gsl_qrng, void (*)(gsl_qrng*)> q(gsl_qrng_alloc(gsl_qrng_halton, dim),
                                                  gsl_qrng_free);
  std::vector<double> u(dim);
  gsl_qrng_get(q.get(), u.data());  // first point is all zeros
  for (int i = 0; i < count; ++i) {
    gsl_qrng_get(q.get(), u.data());
    std::vector<double> p(dim);
    for (int d = 0; d < dim; ++d) p[d] = lo + (hi - lo) * u[d];
    pts.push_back(std::move(p));
  }
  return pts;
}

ScalarResult golden_section(const std::function<double(double)>& f, double lo, double mid,
                            double hi, double x_tol, int max_iter) {
  quiet_gsl();
  ScalarResult out;
  out.x = mid;
  out.value = f(mid);

  gsl_function fn;
  fn.function = &scalar_trampoline;
  fn.params = const_cast<std::function<double(double)>*>(&f);

  std::unique_ptr<gsl_min_fminimizer, MinDeleter> s(
      gsl_min_fminimizer_alloc(gsl_min_fminimizer_goldensection));
  if (gsl_min_fminimizer_set(s.get(), &fn, mid, lo, hi) != GSL_SUCCESS) {
    return out;  // no valid bracket: mid is already the best known point
  }
  int status = GSL_CONTINUE;
  int iter = 0;
  while (status == GSL_CONTINUE && iter < max_iter) {
    ++iter;
    if (gsl_min_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    status = gsl_min_test_interval(gsl_min_fminimizer_x_lower(s.get()),
                                   gsl_min_fminimizer_x_upper(s.get()), x_tol, 0.0);
  }
  out.iterations = iter;
  out.converged = status == GSL_SUCCESS;
  out.x = gsl_min_fminimizer_x_minimum(s.get());
  out.value = gsl_min_fminimizer_f_minimum(s.get());
  return out;
}

ScalarResult scan_then_golden(const std::function<double(double)>& f, double lo, double hi,
                              double grid_step, double x_tol) {
  const int n = std::max(2, static_cast<int>(std::lround((hi - lo) / grid_step)) + 1);
  std::vector<double> xs(n), ys(n);
  int best = -1;
  for (int i = 0; i < n; ++i) {
    xs[i] = lo + (hi - lo) * i / (n - 1);
    ys[i] = f(xs[i]);
    if (std::isfinite(ys[i]) && (best < 0 || ys[i] < ys[best])) best = i;
  }
  ScalarResult out;
  if (best < 0) {
    out.x = 0.5 * (lo + hi);
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  if (best == 0 || best == n - 1) {
    out.x = xs[best];
    out.value = ys[best];
    out.converged = true;
    return out;
  }
  return golden_section(f, xs[best - 1], xs[best], xs[best + 1], x_tol);
}

}  // namespace polarimetry::optim
