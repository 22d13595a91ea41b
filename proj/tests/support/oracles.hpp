#pragma once

// Test-side oracles, kept independent of the library code under test:
// a dense 2-D grid minimizer and a central-difference gradient. Expected
// values in the test files were produced by these (or by hand) and are
// asserted against library output.

#include <cmath>
#include <functional>
#include <random>

#include "ratiosplit/types.hpp"

namespace testsupport {

using ratiosplit::Vector;

struct GridResult {
  Vector x;
  double value;
};

// Exhaustive scan of [lo1,hi1] x [lo2,hi2] at step `res`; returns the feasible
// grid point with the smallest objective. Throws if no grid point is feasible.
inline GridResult grid_min_2d(const std::function<double(const Vector&)>& obj,
                              const std::function<bool(const Vector&)>& feasible,
                              double lo1, double hi1, double lo2, double hi2,
                              double res) {
  GridResult best;
  best.value = std::numeric_limits<double>::infinity();
  const long n1 = std::lround((hi1 - lo1) / res);
  const long n2 = std::lround((hi2 - lo2) / res);
  Vector q(2);
  for (long i = 0; i <= n1; ++i) {
    q[0] = lo1 + res * static_cast<double>(i);
    for (long j = 0; j <= n2; ++j) {
      q[1] = lo2 + res * static_cast<double>(j);
      if (!feasible(q)) continue;
      const double v = obj(q);
      if (v < best.value) {
        best.value = v;
        best.x = q;
      }
    }
  }
  if (!std::isfinite(best.value)) throw std::runtime_error("grid_min_2d: no feasible point");
  return best;
}

// Nearest feasible point to `target` on the grid.
inline GridResult grid_project_2d(const Vector& target,
                                  const std::function<bool(const Vector&)>& feasible,
                                  double lo1, double hi1, double lo2, double hi2,
                                  double res) {
  return grid_min_2d([&](const Vector& q) { return (q - target).norm(); }, feasible,
                     lo1, hi1, lo2, hi2, res);
}

// Central differences with per-coordinate step scaling.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h0 = 1e-6) {
  Vector g(x.size());
  Vector e = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = h0 * std::max(1.0, std::abs(x[i]));
    e[i] = x[i] + h;
    const double fp = f(e);
    e[i] = x[i] - h;
    const double fm = f(e);
    e[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Deterministic test vectors.
inline Vector rand_vec(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace testsupport
