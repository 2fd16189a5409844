#pragma once

// Helpers shared by the test binaries. The finite-difference and matmul
// routines here are deliberately independent of the library versions so
// they can serve as oracles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "anoonly/matrix.hpp"

namespace anoonly::testing {

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(r, c);
  for (auto& v : m.data()) v = g(rng);
  return m;
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double acc = 0.0L;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += static_cast<long double>(a(i, k)) * b(k, j);
      out(i, j) = static_cast<double>(acc);
    }
  return out;
}

// d f / d x by central differences, entry by entry.
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, Matrix x, double step = 1e-5) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double o = x[i];
    x[i] = o + step;
    const double fp = f(x);
    x[i] = o - step;
    const double fm = f(x);
    x[i] = o;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

// Largest |a - b| / max(|a|, |b|, floor).
inline double max_rel_error(const Matrix& a, const Matrix& b, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / s);
  }
  return worst;
}

inline double dot(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace anoonly::testing
