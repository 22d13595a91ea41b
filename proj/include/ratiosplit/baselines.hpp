#pragma once

#include <functional>

#include "ratiosplit/solvers.hpp"

namespace ratiosplit {

// Settings for the nested subgradient loop used by the parametric-ratio
// baseline. alpha_rule maps (inner index j, current ratio value theta) to a
// positive step; j is 1-based and the rule is re-consulted every inner step.
struct InnerLoopConfig {
  int inner_iters = 10;
  std::function<double(int, double)> alpha_rule;
};

// Hybrid steepest descent over a fixed-point set:
//   u^{j+1} = T(u^j) - alpha(j) * phi'(T(u^j)),   j = 1..iters.
// Approximately minimizes the convex function phi over Fix T for suitable
// diminishing alpha. With phi identically zero this is exactly repeated
// application of T.
Vector hsdm_run(const FixedPointOperator& T, const SubdifferentiableFunction& phi,
                Vector u1, const std::function<double(int)>& alpha, int iters);

// Replaceable subproblem solver for dinkelbach_run: given the program, the
// current ratio value theta and a warm-start point, return an approximate
// minimizer of f - theta * g over Fix T.
using InnerSolver =
    std::function<Vector(const FractionalProgram&, double, const Vector&)>;

// Parametric-ratio baseline. With theta_n = f(x^n)/g(x^n), each outer
// iteration approximately solves min_{x in Fix T} f(x) - theta_n g(x)
// (convex: f convex, g concave, theta_n >= 0) and re-evaluates the ratio at
// the result. The default subproblem solver runs cfg.inner_iters steps of
// hsdm_run on the parametric objective, warm-started from the current outer
// iterate; its subgradient is f'(x) + theta_n h'(x) with h' from the
// denominator's oracle. Trace rows record outer transitions in the standard
// schema with the eta column zero (there is no outer subgradient step).
SolverState dinkelbach_run(const FractionalProgram& p, Vector x1,
                           const InnerLoopConfig& cfg, const StopRule& outer_stop,
                           const InnerSolver& inner = {}, const RunOptions& opts = {});

// Anchored fixed-point iteration from u^1 = z:
//   u^{s+1} = lambda(s) * z + (1 - lambda(s)) * T(u^s),   lambda(s) in (0, 1].
// For lambda(s) = 1/(s+1) and nonexpansive T this converges to the metric
// projection of z onto Fix T, giving an approximate projector for operators
// whose fixed-point set has no closed-form projection.
Vector halpern_project(const FixedPointOperator& T, const Vector& z,
                       const std::function<double(int)>& lambda, int iters);

}  // namespace ratiosplit
