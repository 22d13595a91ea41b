#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <utility>

#include "ratiosplit/metrics.hpp"
#include "ratiosplit/solvers.hpp"

// Shared run-loop plumbing for the solver and baseline drivers. Everything
// here assumes the SolverState was produced by one of the *_init functions.

namespace ratiosplit::detail {

inline double elapsed_seconds(const SolverState& st) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - st.started_at)
      .count();
}

inline constexpr const char* kRelObjDomainWarning =
    "rel_obj undefined (theta_prev <= -1); row marked NaN";

inline double safe_rel_obj(SolverState& st, double theta_next) {
  try {
    return metric_rel_obj(st.theta, theta_next);
  } catch (const MetricDomainError&) {
    auto& w = st.trace.warnings;
    if (std::find(w.begin(), w.end(), kRelObjDomainWarning) == w.end()) {
      w.push_back(kRelObjDomainWarning);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
}

inline bool should_record_iterates(const RunOptions& opts, Index dim) {
  switch (opts.record_iterates) {
    case RunOptions::Iterates::On:
      return true;
    case RunOptions::Iterates::Off:
      return false;
    case RunOptions::Iterates::Auto:
      return dim <= 100;
  }
  return false;
}

// Appends the row for the completed transition x^n -> x_next and advances the
// state. theta/residual/feas columns describe x^n.
inline void record_transition(SolverState& st, double eta, double feas_at_x,
                              Vector&& pre_image, Vector&& x_next, double theta_next,
                              double grad_norm_sq, double inner_disp_sq) {
  TraceRow row;
  row.n = st.n;
  row.theta = st.theta;
  row.residual = st.residual_at_x;
  row.rel_obj = safe_rel_obj(st, theta_next);
  row.rel_iter = metric_rel_iter(st.x, x_next);
  row.feas = feas_at_x;
  row.eta = eta;
  row.grad_norm_sq = grad_norm_sq;
  row.inner_disp_sq = inner_disp_sq;
  row.elapsed_s = elapsed_seconds(st);
  st.trace.rows.push_back(std::move(row));

  st.pre_image = std::move(pre_image);
  st.x = std::move(x_next);
  st.theta = theta_next;
  st.best_theta = std::min(st.best_theta, theta_next);
  st.last_eta = eta;
  st.last_inner_disp_sq = inner_disp_sq;
  st.residual_at_x = residual(*st.monitor, st.x);
  st.n += 1;
  if (st.record_iterates) st.trace.iterates.push_back(st.x);
}

// Budget criteria (iterations, wall clock, residual) are checked before a
// step, tolerance criteria (rel_error) after it, so a stopped state always
// reflects the last recorded row.
enum class Phase { BeforeStep, AfterStep };

inline bool should_stop(const StopRule& stop, SolverState& st, Phase phase) {
  if (phase == Phase::BeforeStep) {
    if (stop.max_iters && static_cast<int>(st.trace.rows.size()) >= *stop.max_iters) {
      st.trace.stop_reason = StopReason::MaxIterations;
      return true;
    }
    if (stop.wall_clock_s && elapsed_seconds(st) >= *stop.wall_clock_s) {
      st.trace.stop_reason = StopReason::WallClock;
      return true;
    }
    if (stop.residual_tol && st.residual_at_x <= *stop.residual_tol) {
      st.trace.stop_reason = StopReason::Residual;
      return true;
    }
    return false;
  }
  const TraceRow& r = st.trace.rows.back();
  if (stop.rel_error_eps && std::max(r.rel_obj, r.rel_iter) <= *stop.rel_error_eps) {
    st.trace.stop_reason = StopReason::RelError;
    return true;
  }
  return false;
}

template <class Program, class StepFn>
SolverState run_loop(const Program& p, SolverState st, const StepSchedule& sched,
                     const StopRule& stop, StepFn step) {
  if (stop.empty()) throw Misuse("run: stop rule has no criteria set");
  for (;;) {
    if (should_stop(stop, st, Phase::BeforeStep)) break;
    step(p, st, sched.eta(st.n));
    if (should_stop(stop, st, Phase::AfterStep)) break;
  }
  st.trace.total_seconds = elapsed_seconds(st);
  st.trace.meta.schedule = sched.describe();
  return st;
}

}  // namespace ratiosplit::detail
