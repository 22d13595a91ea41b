#include "ratiosplit/baselines.hpp"

#include <cstdio>
#include <utility>

#include "run_support.hpp"

namespace ratiosplit {

Vector hsdm_run(const FixedPointOperator& T, const SubdifferentiableFunction& phi,
                Vector u1, const std::function<double(int)>& alpha, int iters) {
  if (iters < 0) throw Misuse("hsdm: negative iteration count");
  if (u1.size() != T.dim()) throw InvalidSpec("hsdm: start point dimension mismatch");
  if (phi.dim() != T.dim()) throw InvalidSpec("hsdm: objective dimension mismatch");
  if (!alpha) throw InvalidSpec("hsdm: alpha schedule not set");
  Vector u = std::move(u1);
  for (int j = 1; j <= iters; ++j) {
    const double a = alpha(j);
    if (!(a > 0.0)) throw Misuse("hsdm: alpha must be positive");
    const Vector tu = T.apply(u);
    const Vector grad = phi.subgradient(tu);
    if (!grad.allFinite()) throw EvalDomainError("hsdm: non-finite subgradient");
    u = tu - a * grad;
  }
  return u;
}

namespace {

// Default subproblem solver: hsdm_run specialized to the parametric
// objective f - theta * g, whose subgradient is f' + theta * h'.
InnerSolver make_hsdm_inner(const InnerLoopConfig& cfg) {
  if (cfg.inner_iters < 1) throw InvalidSpec("dinkelbach: inner_iters must be >= 1");
  if (!cfg.alpha_rule) throw InvalidSpec("dinkelbach: inner-loop alpha rule not set");
  return [iters = cfg.inner_iters, rule = cfg.alpha_rule](
             const FractionalProgram& p, double theta, const Vector& x0) {
    Vector u = x0;
    for (int j = 1; j <= iters; ++j) {
      const double a = rule(j, theta);
      if (!(a > 0.0)) throw Misuse("dinkelbach: alpha must be positive");
      const Vector tu = p.op.apply(u);
      const Vector grad =
          p.numerator.subgradient(tu) + theta * p.denominator.subgradient(tu);
      if (!grad.allFinite()) throw EvalDomainError("hsdm: non-finite subgradient");
      u = tu - a * grad;
    }
    return u;
  };
}

}  // namespace

SolverState dinkelbach_run(const FractionalProgram& p, Vector x1,
                           const InnerLoopConfig& cfg, const StopRule& outer_stop,
                           const InnerSolver& inner, const RunOptions& opts) {
  if (outer_stop.empty()) throw Misuse("run: stop rule has no criteria set");
  const InnerSolver solve = inner ? inner : make_hsdm_inner(cfg);
  SolverState st = fssm_init(p, std::move(x1), opts);
  st.trace.meta.method = "dinkelbach";
  char sched[48];
  std::snprintf(sched, sizeof sched, "inner:%d", cfg.inner_iters);
  for (;;) {
    if (detail::should_stop(outer_stop, st, detail::Phase::BeforeStep)) break;
    Vector x_next = solve(p, st.theta, st.x);
    if (x_next.size() != p.dim()) {
      throw Misuse("dinkelbach: inner solver returned wrong dimension");
    }
    const double theta_next = ratio_value(p, x_next);
    const double feas = feasibility_value(p, st.x);
    Vector pre = x_next;  // subproblem result, projected already
    detail::record_transition(st, 0.0, feas, std::move(pre), std::move(x_next),
                              theta_next, 0.0, 0.0);
    if (detail::should_stop(outer_stop, st, detail::Phase::AfterStep)) break;
  }
  st.trace.total_seconds = detail::elapsed_seconds(st);
  st.trace.meta.schedule = sched;
  return st;
}

Vector halpern_project(const FixedPointOperator& T, const Vector& z,
                       const std::function<double(int)>& lambda, int iters) {
  if (iters < 0) throw Misuse("halpern: negative iteration count");
  if (z.size() != T.dim()) throw InvalidSpec("halpern: anchor dimension mismatch");
  if (!lambda) throw InvalidSpec("halpern: lambda schedule not set");
  Vector u = z;
  for (int s = 1; s <= iters; ++s) {
    const double l = lambda(s);
    if (!(l > 0.0) || l > 1.0) throw Misuse("halpern: lambda must lie in (0, 1]");
    u = l * z + (1.0 - l) * T.apply(u);
  }
  return u;
}

}  // namespace ratiosplit
