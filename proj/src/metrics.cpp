#include "ratiosplit/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace ratiosplit {

double metric_rel_obj(double theta_prev, double theta_next) {
  if (theta_prev <= -1.0) {
    throw MetricDomainError("metric_rel_obj: theta_prev <= -1 makes the scale nonpositive");
  }
  return std::abs(theta_next - theta_prev) / (theta_prev + 1.0);
}

double metric_rel_iter(const Vector& x_prev, const Vector& x_next) {
  return (x_next - x_prev).norm() / (x_prev.norm() + 1.0);
}

double metric_rel_feas_linear(const Matrix& A, const Vector& b, const Vector& x_prev,
                              const Vector& x_next) {
  const double r_prev = (A * x_prev - b).norm();
  const double r_next = (A * x_next - b).norm();
  return (r_next - r_prev) / (r_prev + 1.0);
}

double metric_fe_halfspaces(const Matrix& B, const Vector& q_lo, const Vector& q_hi,
                            const Vector& x) {
  if (B.rows() != q_lo.size() || B.rows() != q_hi.size()) {
    throw InvalidSpec("metric_fe_halfspaces: band bound dimensions mismatch");
  }
  const Vector v = B * x;
  double total = 0.0;
  for (Index l = 0; l < B.rows(); ++l) {
    total += std::max(q_lo[l] - v[l], 0.0) + std::max(v[l] - q_hi[l], 0.0);
  }
  return total / (2.0 * static_cast<double>(B.rows()));
}

bool metric_stop_joint(const Vector& x_prev, const Vector& x_next, double F_prev,
                       double F_next, double eps) {
  const double ri = metric_rel_iter(x_prev, x_next);
  const double ro = metric_rel_obj(F_prev, F_next);
  return std::max(ri, ro) <= eps;
}

}  // namespace ratiosplit
