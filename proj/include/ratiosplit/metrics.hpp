#pragma once

// Per-iteration progress metrics shared by the solvers (trace rows) and the
// benchmark harness (curves, stopping). All are pure functions.

#include "ratiosplit/types.hpp"

namespace ratiosplit {

// |theta_next - theta_prev| / (theta_prev + 1).
// Throws MetricDomainError when theta_prev <= -1.
double metric_rel_obj(double theta_prev, double theta_next);

// ||x_next - x_prev|| / (||x_prev|| + 1).
double metric_rel_iter(const Vector& x_prev, const Vector& x_next);

// Relative change of the affine feasibility error r(x) = ||Ax - b||:
// (r(x_next) - r(x_prev)) / (r(x_prev) + 1). Negative values mean progress.
double metric_rel_feas_linear(const Matrix& A, const Vector& b, const Vector& x_prev,
                              const Vector& x_next);

// Mean one-sided violation of the band constraints q_lo <= B x <= q_hi:
//   (1/2p) * sum_l [ max(q_lo[l] - <B_l, x>, 0) + max(<B_l, x> - q_hi[l], 0) ]
// where B is p x k with rows B_l.
double metric_fe_halfspaces(const Matrix& B, const Vector& q_lo, const Vector& q_hi,
                            const Vector& x);

// Joint relative-progress stop test:
//   max( ||x_next - x_prev||/(||x_prev|| + 1), |F_next - F_prev|/(F_prev + 1) ) <= eps
bool metric_stop_joint(const Vector& x_prev, const Vector& x_next, double F_prev,
                       double F_next, double eps);

}  // namespace ratiosplit
