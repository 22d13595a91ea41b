#include "ratiosplit/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "ratiosplit/metrics.hpp"
#include "run_support.hpp"

namespace ratiosplit {

// ---- StepSchedule -----------------------------------------------------------

StepSchedule StepSchedule::constant(double eta0) {
  if (!(eta0 > 0.0)) throw InvalidSpec("schedule: constant step must be positive");
  return StepSchedule(Kind::Constant, eta0, 0.0);
}

StepSchedule StepSchedule::power(double c, double p) {
  if (!(c > 0.0) || !(p > 0.0)) throw InvalidSpec("schedule: power needs c > 0 and p > 0");
  return StepSchedule(Kind::Power, c, p);
}

StepSchedule StepSchedule::harmonic(double c) {
  if (!(c > 0.0)) throw InvalidSpec("schedule: harmonic needs c > 0");
  return StepSchedule(Kind::Harmonic, c, 1.0);
}

double StepSchedule::eta(int n) const {
  if (n < 1) throw Misuse("schedule: iteration index is 1-based");
  switch (kind_) {
    case Kind::Constant:
      return c_;
    case Kind::Harmonic:
      return c_ / static_cast<double>(n + 1);
    case Kind::Power:
      return c_ / std::pow(static_cast<double>(n + 1), p_);
  }
  throw std::logic_error("unreachable schedule kind");
}

bool StepSchedule::diminishing_summable() const {
  if (kind_ == Kind::Harmonic) return true;
  return kind_ == Kind::Power && p_ > 0.5 && p_ <= 1.0;
}

std::string StepSchedule::describe() const {
  char buf[80];
  switch (kind_) {
    case Kind::Constant:
      std::snprintf(buf, sizeof buf, "const:%.17g", c_);
      break;
    case Kind::Harmonic:
      std::snprintf(buf, sizeof buf, "harmonic:%.17g", c_);
      break;
    case Kind::Power:
      std::snprintf(buf, sizeof buf, "power:%.17g:%.17g", c_, p_);
      break;
  }
  return buf;
}

// ---- StopRule ---------------------------------------------------------------

StopRule StopRule::max_iterations(int n) {
  if (n < 0) throw InvalidSpec("stop: negative iteration budget");
  StopRule r;
  r.max_iters = n;
  return r;
}

StopRule StopRule::wall_clock(double seconds) {
  if (!(seconds >= 0.0)) throw InvalidSpec("stop: negative wall-clock budget");
  StopRule r;
  r.wall_clock_s = seconds;
  return r;
}

StopRule StopRule::rel_error(double eps) {
  if (!(eps > 0.0)) throw InvalidSpec("stop: rel_error tolerance must be positive");
  StopRule r;
  r.rel_error_eps = eps;
  return r;
}

StopRule StopRule::residual(double tol) {
  if (!(tol > 0.0)) throw InvalidSpec("stop: residual tolerance must be positive");
  StopRule r;
  r.residual_tol = tol;
  return r;
}

namespace {

// OR-combining two instances of the same criterion keeps the one that
// triggers first.
template <class T, class Cmp>
std::optional<T> merge(const std::optional<T>& a, const std::optional<T>& b, Cmp cmp) {
  if (!a) return b;
  if (!b) return a;
  return cmp(*a, *b) ? a : b;
}

}  // namespace

StopRule StopRule::operator|(const StopRule& other) const {
  StopRule r;
  auto lt = [](auto x, auto y) { return x < y; };
  auto gt = [](auto x, auto y) { return x > y; };
  r.max_iters = merge(max_iters, other.max_iters, lt);
  r.wall_clock_s = merge(wall_clock_s, other.wall_clock_s, lt);
  r.rel_error_eps = merge(rel_error_eps, other.rel_error_eps, gt);
  r.residual_tol = merge(residual_tol, other.residual_tol, gt);
  return r;
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::NotStopped:
      return "not_stopped";
    case StopReason::MaxIterations:
      return "max_iterations";
    case StopReason::WallClock:
      return "wall_clock";
    case StopReason::RelError:
      return "rel_error";
    case StopReason::Residual:
      return "residual";
  }
  return "unknown";
}

// ---- RunTrace / SolverState ---------------------------------------------------

double RunTrace::max_grad_norm_sq() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.grad_norm_sq);
  return m;
}

double RunTrace::min_theta() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) m = std::min(m, r.theta);
  return m;
}

SolverState SolverState::light_copy() const {
  SolverState s;
  s.n = n;
  s.x = x;
  s.theta = theta;
  s.component_thetas = component_thetas;
  s.pre_image = pre_image;
  s.best_theta = best_theta;
  s.last_eta = last_eta;
  s.last_inner_disp_sq = last_inner_disp_sq;
  s.residual_at_x = residual_at_x;
  s.monitor = monitor;
  s.record_iterates = false;
  s.started_at = started_at;
  return s;
}

namespace {

using detail::record_transition;
using detail::run_loop;
using detail::should_record_iterates;

void check_step_args(const SolverState& st, double eta) {
  if (!st.monitor) throw Misuse("step: state was not produced by an init function");
  if (!(eta > 0.0)) throw Misuse("step: eta must be positive");
}

}  // namespace

// ---- Single-ratio solvers -----------------------------------------------------

FractionalProgram with_enclosing_ball(const FractionalProgram& p, const Vector& x1,
                                      double radius) {
  const double r = radius > 0.0 ? radius : 10.0 * (1.0 + x1.norm());
  FractionalProgram q(p.numerator, p.denominator,
                      FixedPointOperator::compose(
                          {p.op, FixedPointOperator::ball(Vector::Zero(p.dim()), r)}),
                      p.denom_upper_bound);
  q.feasibility = p.feasibility;
  q.optimum_x = p.optimum_x;
  q.optimum_theta = p.optimum_theta;
  return q;
}

SolverState fssm_init(const FractionalProgram& p, Vector x1, const RunOptions& opts) {
  validate(p);
  if (x1.size() != p.dim()) throw InvalidSpec("init: x1 dimension mismatch");
  SolverState st;
  st.n = 1;
  st.x = std::move(x1);
  st.theta = ratio_value(p, st.x);  // g(x^1) > 0 is a hard precondition
  st.best_theta = st.theta;
  st.monitor = p.op;
  st.residual_at_x = residual(*st.monitor, st.x);
  st.record_iterates = should_record_iterates(opts, p.dim());
  st.started_at = std::chrono::steady_clock::now();
  st.trace.x1 = st.x;
  st.trace.meta.method = "fssm";
  st.trace.meta.dim = p.dim();
  return st;
}

void fssm_step(const FractionalProgram& p, SolverState& st, double eta) {
  check_step_args(st, eta);
  const Vector fp = p.numerator.subgradient(st.x);
  const Vector hp = p.denominator.subgradient(st.x);
  const Vector d = fp + st.theta * hp;
  Vector y = st.x - eta * d;
  Vector x_next = p.op.apply(y);
  const double theta_next = ratio_value(p, x_next);
  const double feas = feasibility_value(p, st.x);
  record_transition(st, eta, feas, std::move(y), std::move(x_next), theta_next,
                    d.squaredNorm(), 0.0);
}

SolverState fssm_run(const FractionalProgram& p, Vector x1, const StepSchedule& sched,
                     const StopRule& stop, const RunOptions& opts) {
  if (opts.enclosing_ball) {
    const FractionalProgram q = with_enclosing_ball(p, x1, opts.enclosing_ball_radius);
    SolverState st = fssm_init(q, std::move(x1), opts);
    return run_loop(q, std::move(st), sched, stop,
                    [](const FractionalProgram& pp, SolverState& ss, double e) {
                      fssm_step(pp, ss, e);
                    });
  }
  SolverState st = fssm_init(p, std::move(x1), opts);
  return run_loop(p, std::move(st), sched, stop,
                  [](const FractionalProgram& pp, SolverState& ss, double e) {
                    fssm_step(pp, ss, e);
                  });
}

void afssm_step(const FractionalProgram& p, SolverState& st, double eta) {
  check_step_args(st, eta);
  const Vector fp = p.numerator.subgradient(st.x);
  const Vector hp = p.denominator.subgradient(st.x);
  const Vector d = fp + st.theta * hp;
  const double d_sq = d.squaredNorm();
  const double scale = eta / std::max(1.0, std::sqrt(d_sq));
  Vector u = st.x - scale * d;
  Vector x_next = p.op.apply(u);
  const double theta_next = ratio_value(p, x_next);
  const double feas = feasibility_value(p, st.x);
  record_transition(st, eta, feas, std::move(u), std::move(x_next), theta_next, d_sq, 0.0);
}

SolverState afssm_run(const FractionalProgram& p, Vector x1, const StepSchedule& sched,
                      const StopRule& stop, const RunOptions& opts) {
  SolverState st = fssm_init(p, std::move(x1), opts);
  st.trace.meta.method = "afssm";
  if (p.numerator.curvature() != Curvature::StronglyConvex) {
    st.trace.warnings.push_back(
        "afssm: numerator is not strongly convex; unique-solution convergence "
        "guarantees do not apply");
  }
  return run_loop(p, std::move(st), sched, stop,
                  [](const FractionalProgram& pp, SolverState& ss, double e) {
                    afssm_step(pp, ss, e);
                  });
}

// ---- Incremental solver --------------------------------------------------------

SolverState ifssm_init(const SumOfRatiosProgram& p, Vector x1, const RunOptions& opts) {
  validate(p);
  if (x1.size() != p.dim()) throw InvalidSpec("init: x1 dimension mismatch");
  SolverState st;
  st.n = 1;
  st.x = std::move(x1);
  st.component_thetas = component_ratios(p, st.x);
  st.theta = 0.0;
  for (double t : st.component_thetas) st.theta += t;
  st.best_theta = st.theta;
  std::vector<FixedPointOperator> ops;
  ops.reserve(p.components.size());
  for (const auto& comp : p.components) ops.push_back(comp.op);
  st.monitor = FixedPointOperator::compose(std::move(ops));
  st.residual_at_x = residual(*st.monitor, st.x);
  st.record_iterates = should_record_iterates(opts, p.dim());
  st.started_at = std::chrono::steady_clock::now();
  st.trace.x1 = st.x;
  st.trace.meta.method = "ifssm";
  st.trace.meta.dim = p.dim();
  st.trace.meta.components = static_cast<int>(p.components.size());
  return st;
}

void ifssm_step(const SumOfRatiosProgram& p, SolverState& st, double eta) {
  check_step_args(st, eta);
  if (st.component_thetas.size() != p.components.size()) {
    throw Misuse("ifssm_step: state does not match the program's component count");
  }
  Vector inner = st.x;  // x^{0,n}
  Vector pre = st.x;
  double disp_sq = 0.0;
  double grad_sq = 0.0;
  for (std::size_t i = 0; i < p.components.size(); ++i) {
    const auto& comp = p.components[i];
    const Vector fp = comp.numerator.subgradient(inner);
    const Vector hp = comp.denominator.subgradient(inner);
    const Vector d = fp + st.component_thetas[i] * hp;
    grad_sq += d.squaredNorm();
    pre = inner - eta * d;
    Vector next = comp.op.apply(pre);
    disp_sq += (next - inner).squaredNorm();
    inner = std::move(next);
  }
  std::vector<double> thetas_next = component_ratios(p, inner);
  double F_next = 0.0;
  for (double t : thetas_next) F_next += t;
  const double feas = feasibility_value(p, st.x);
  record_transition(st, eta, feas, std::move(pre), std::move(inner), F_next, grad_sq,
                    disp_sq);
  st.component_thetas = std::move(thetas_next);
}

SolverState ifssm_run(const SumOfRatiosProgram& p, Vector x1, const StepSchedule& sched,
                      const StopRule& stop, const RunOptions& opts) {
  SolverState st = ifssm_init(p, std::move(x1), opts);
  return run_loop(p, std::move(st), sched, stop,
                  [](const SumOfRatiosProgram& pp, SolverState& ss, double e) {
                    ifssm_step(pp, ss, e);
                  });
}

// ---- Diagnostics ----------------------------------------------------------------

namespace {

void check_reference_point(const FixedPointOperator& T, const Vector& z, double tol) {
  if (residual(T, z) > tol) {
    throw Misuse("diagnostic: reference point is not a fixed point of T");
  }
}

}  // namespace

double check_descent_lemma(const FractionalProgram& p, const SolverState& before,
                           const SolverState& after, const Vector& z, double rho,
                           double B, double z_residual_tol) {
  check_reference_point(p.op, z, z_residual_tol);
  if (!(rho >= 0.0)) throw Misuse("diagnostic: rho must be nonnegative");
  if (!(B >= 0.0)) throw Misuse("diagnostic: B must be nonnegative");
  if (!(after.last_eta > 0.0)) throw Misuse("diagnostic: after-state has no recorded step");
  const double gz = p.denominator.value(z);
  if (!(gz > 0.0)) throw DenominatorViolation(gz, -1, z);
  const double theta_z = p.numerator.value(z) / gz;
  const double eta = after.last_eta;
  const double lhs = (after.x - z).squaredNorm();
  const double rhs = (before.x - z).squaredNorm() +
                     2.0 * gz * eta * (theta_z - before.theta) + B * eta * eta -
                     rho * (after.x - after.pre_image).squaredNorm();
  return rhs - lhs;
}

double check_rate_bound_constant(const FractionalProgram& p, const RunTrace& trace,
                                 const StepSchedule& sched, const Vector& z, double B,
                                 int K, double z_residual_tol) {
  if (sched.kind() != StepSchedule::Kind::Constant) {
    throw Misuse("rate bound: schedule must be constant");
  }
  if (trace.rows.empty()) throw Misuse("rate bound: empty trace");
  const double eta0 = sched.coeff();
  if (trace.rows.front().eta != eta0) {
    throw Misuse("rate bound: trace was not produced with this schedule");
  }
  if (K < 0) K = static_cast<int>(trace.rows.size());
  if (K == 0 || K > static_cast<int>(trace.rows.size())) {
    throw Misuse("rate bound: K outside the recorded range");
  }
  check_reference_point(p.op, z, z_residual_tol);
  const double gz = p.denominator.value(z);
  if (!(gz > 0.0)) throw DenominatorViolation(gz, -1, z);
  const double theta_z = p.numerator.value(z) / gz;
  double min_theta = std::numeric_limits<double>::infinity();
  for (int i = 0; i < K; ++i) min_theta = std::min(min_theta, trace.rows[i].theta);
  const double bound = (trace.x1 - z).squaredNorm() /
                           (2.0 * gz * eta0 * static_cast<double>(K)) +
                       eta0 * B / (2.0 * gz);
  return bound - (min_theta - theta_z);
}

double check_incremental_descent_lemma(const SumOfRatiosProgram& p,
                                       const SolverState& before, const SolverState& after,
                                       const Vector& z, double L, double E, double H,
                                       double z_residual_tol) {
  for (const auto& comp : p.components) {
    check_reference_point(comp.op, z, z_residual_tol);
  }
  const double N = p.denom_lower_bound;
  const double M = p.denom_upper_bound;
  const auto m = static_cast<double>(p.components.size());
  if (!(N > 0.0) || !(M >= N)) {
    throw Misuse("incremental diagnostic: denominator bounds [N, M] not certified");
  }
  if (!(m + N <= M)) {
    throw Misuse("incremental diagnostic: requires m + N <= M");
  }
  if (!(after.last_eta > 0.0)) throw Misuse("diagnostic: after-state has no recorded step");
  if (before.component_thetas.size() != p.components.size()) {
    throw Misuse("incremental diagnostic: before-state lacks per-component ratios");
  }
  // Ratio gaps are weighed by their own g_i(z); the sum does not collapse to
  // g(z) (F(z) - F(x^n)) unless all g_i(z) coincide.
  double gap = 0.0;
  for (std::size_t i = 0; i < p.components.size(); ++i) {
    const auto& comp = p.components[i];
    const double gi = comp.denominator.value(z);
    if (!(gi > 0.0)) throw DenominatorViolation(gi, static_cast<int>(i), z);
    gap += comp.numerator.value(z) - gi * before.component_thetas[i];
  }
  const double eta = after.last_eta;
  const double C = 4.0 * M * (N + 1.0 / N) * (L * L + E * E * H * H);
  const double lhs = (after.x - z).squaredNorm();
  const double rhs = (before.x - z).squaredNorm() + 2.0 * eta * gap + C * eta * eta -
                     0.5 * after.last_inner_disp_sq;
  return rhs - lhs;
}

}  // namespace ratiosplit
