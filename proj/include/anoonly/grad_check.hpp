#pragma once

#include <algorithm>
#include <cmath>

#include "anoonly/matrix.hpp"

namespace anoonly {

struct GradCheckReport {
  double max_abs_diff = 0.0;
  double max_rel_diff = 0.0;
  bool passed = false;
};

struct GradCheckOptions {
  double tol = 1e-5;
  double step = 1e-5;
  // Below this magnitude the relative error degrades into an absolute one.
  double abs_floor = 1e-3;
};

/// Central-difference estimate of df/dparams.
template <typename F>
Matrix numeric_gradient(F&& f, const Matrix& params, double step) {
  Matrix x = params;
  Matrix grad(params.rows(), params.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double fp = f(static_cast<const Matrix&>(x));
    x[i] = orig - step;
    const double fm = f(static_cast<const Matrix&>(x));
    x[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericError("grad_check: non-finite evaluation at entry " + std::to_string(i));
    }
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

inline GradCheckReport compare_gradients(const Matrix& analytic, const Matrix& numeric,
                                         const GradCheckOptions& opts) {
  Matrix::require_same_shape(analytic, numeric, "grad_check");
  GradCheckReport rep;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double diff = std::abs(analytic[i] - numeric[i]);
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), opts.abs_floor});
    rep.max_abs_diff = std::max(rep.max_abs_diff, diff);
    rep.max_rel_diff = std::max(rep.max_rel_diff, diff / scale);
  }
  rep.passed = rep.max_rel_diff < opts.tol;
  return rep;
}

/// Checks an analytic gradient of the scalar function f at params against
/// central finite differences.
template <typename F>
GradCheckReport grad_check(F&& f, const Matrix& params, const Matrix& analytic,
                           const GradCheckOptions& opts = {}) {
  if (!std::isfinite(f(params))) throw NumericError("grad_check: non-finite value at params");
  return compare_gradients(analytic, numeric_gradient(f, params, opts.step), opts);
}

}  // namespace anoonly
