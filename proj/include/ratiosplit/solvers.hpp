#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ratiosplit/functions.hpp"

namespace ratiosplit {

// Step-size sequence eta_n, n >= 1.
class StepSchedule {
 public:
  enum class Kind { Constant, Power, Harmonic };

  static StepSchedule constant(double eta0);
  // c / (n+1)^p, c > 0, p > 0.
  static StepSchedule power(double c, double p);
  // c / (n+1); shorthand for power(c, 1).
  static StepSchedule harmonic(double c);

  double eta(int n) const;
  Kind kind() const { return kind_; }
  double coeff() const { return c_; }
  double exponent() const { return p_; }

  // True when sum eta_n diverges while sum eta_n^2 converges, i.e. power
  // schedules with p in (0.5, 1].
  bool diminishing_summable() const;

  std::string describe() const;

 private:
  StepSchedule(Kind k, double c, double p) : kind_(k), c_(c), p_(p) {}
  Kind kind_;
  double c_;
  double p_;
};

// OR-combination of stopping criteria. At least one must be set.
struct StopRule {
  std::optional<int> max_iters;
  std::optional<double> wall_clock_s;
  // max(rel_obj, rel_iter) of the last transition <= eps.
  std::optional<double> rel_error_eps;
  // ||T x^n - x^n|| <= tol.
  std::optional<double> residual_tol;

  static StopRule max_iterations(int n);
  static StopRule wall_clock(double seconds);
  static StopRule rel_error(double eps);
  static StopRule residual(double tol);
  StopRule operator|(const StopRule& other) const;

  bool empty() const {
    return !max_iters && !wall_clock_s && !rel_error_eps && !residual_tol;
  }
};

enum class StopReason { NotStopped, MaxIterations, WallClock, RelError, Residual };

const char* to_string(StopReason r);

// One recorded transition x^n -> x^{n+1}. theta/residual/feas describe x^n;
// rel_obj and rel_iter describe the transition itself.
struct TraceRow {
  int n = 0;
  double theta = 0.0;
  double residual = 0.0;
  double rel_obj = 0.0;
  double rel_iter = 0.0;
  double feas = 0.0;
  double eta = 0.0;
  double elapsed_s = 0.0;

  // Not part of the CSV schema:
  // ||f'(x^n) + theta_n h'(x^n)||^2 (summed over components for sweeps);
  // its running max certifies the B constant a posteriori.
  double grad_norm_sq = 0.0;
  // Incremental sweeps only: sum_i ||x^{i,n} - x^{i-1,n}||^2.
  double inner_disp_sq = 0.0;
};

struct TraceMeta {
  std::string method;
  std::string schedule;
  std::string family;
  std::uint64_t seed = 0;
  Index dim = 0;
  int components = 1;
};

struct RunTrace {
  TraceMeta meta;
  Vector x1;  // initial iterate, always kept
  std::vector<TraceRow> rows;
  // Full iterates x^2, x^3, ... (x^1 lives in x1); recorded when dim <= 100
  // or explicitly requested.
  std::vector<Vector> iterates;
  std::vector<std::string> warnings;
  StopReason stop_reason = StopReason::NotStopped;
  double total_seconds = 0.0;

  double max_grad_norm_sq() const;
  double min_theta() const;  // min over recorded rows (theta_1..theta_K)
};

struct SolverState {
  int n = 1;       // 1-based index of the current iterate
  Vector x;        // x^n
  double theta = 0.0;  // f(x^n)/g(x^n), or F(x^n) for sum-of-ratios runs
  std::vector<double> component_thetas;  // theta_{i,n}, sum-of-ratios only
  Vector pre_image;                      // the point T was applied to last
  double best_theta = std::numeric_limits<double>::infinity();
  double last_eta = 0.0;
  double last_inner_disp_sq = 0.0;
  double residual_at_x = 0.0;  // ||T_mon x^n - x^n|| for the monitor operator
  std::optional<FixedPointOperator> monitor;
  bool record_iterates = false;
  std::chrono::steady_clock::time_point started_at;
  RunTrace trace;

  // Copy without trace rows/iterates; cheap snapshot for per-step diagnostics.
  SolverState light_copy() const;
};

struct RunOptions {
  enum class Iterates { Auto, On, Off };
  Iterates record_iterates = Iterates::Auto;

  // Ask the run functions to wrap the constraint operator as P_ball . T so
  // iterates stay bounded. `enclosing_ball_radius` <= 0 selects the default
  // radius 10 * (1 + ||x^1||); the ball is centered at the origin. Manual
  // steppers apply with_enclosing_ball() themselves.
  bool enclosing_ball = false;
  double enclosing_ball_radius = 0.0;
};

// The program with its operator replaced by compose(T, P_ball); radius <= 0
// selects 10 * (1 + ||x1||), centered at the origin.
FractionalProgram with_enclosing_ball(const FractionalProgram& p, const Vector& x1,
                                      double radius = 0.0);

// ---- Ratio splitting with subgradient steps --------------------------------
//
// One transition of x^{n+1} = T(x^n - eta_n f'(x^n) - eta_n theta_n h'(x^n)),
// theta_n = f(x^n)/g(x^n), h' drawn from the denominator's oracle. Appends a
// trace row and advances the state. Throws DenominatorViolation if the new
// iterate has g <= 0.
void fssm_step(const FractionalProgram& p, SolverState& st, double eta);

SolverState fssm_init(const FractionalProgram& p, Vector x1,
                      const RunOptions& opts = {});

SolverState fssm_run(const FractionalProgram& p, Vector x1, const StepSchedule& sched,
                     const StopRule& stop, const RunOptions& opts = {});

// Normalized variant: the displacement is eta_n * d / max(1, ||d||) with
// d = f' + theta_n h', so ||x^n - u^n|| <= eta_n always.
void afssm_step(const FractionalProgram& p, SolverState& st, double eta);

SolverState afssm_run(const FractionalProgram& p, Vector x1, const StepSchedule& sched,
                      const StopRule& stop, const RunOptions& opts = {});

// Incremental sweep for sum-of-ratios programs. The component ratios
// theta_{i,n} = f_i(x^n)/g_i(x^n) are all evaluated at the OUTER iterate x^n
// before the sweep starts; subgradients are taken at the inner iterates.
void ifssm_step(const SumOfRatiosProgram& p, SolverState& st, double eta);

SolverState ifssm_init(const SumOfRatiosProgram& p, Vector x1,
                       const RunOptions& opts = {});

SolverState ifssm_run(const SumOfRatiosProgram& p, Vector x1, const StepSchedule& sched,
                      const StopRule& stop, const RunOptions& opts = {});

// ---- Descent diagnostics ---------------------------------------------------
//
// Slack (RHS - LHS, >= 0 when the inequality holds) of the per-step bound
//   ||x^{n+1}-z||^2 <= ||x^n-z||^2 + 2 g(z) eta_n (f(z)/g(z) - theta_n)
//                      + B eta_n^2 - rho ||T y^n - y^n||^2
// for a fixed point z of T and B >= ||f'(x^n) + theta_n h'(x^n)||^2.
// `before`/`after` are the states around one fssm_step call.
// Throws Misuse when z is not a fixed point (residual above z_residual_tol).
double check_descent_lemma(const FractionalProgram& p, const SolverState& before,
                           const SolverState& after, const Vector& z, double rho,
                           double B, double z_residual_tol = 1e-6);

// Slack of the constant-step rate bound over the first K recorded steps:
//   min_{1<=n<=K} theta_n - f(z)/g(z) <= ||x^1-z||^2/(2 g(z) eta0 K)
//                                        + eta0 B / (2 g(z)).
// `sched` must be the constant schedule the trace was produced with
// (Misuse otherwise). K defaults to all recorded rows.
double check_rate_bound_constant(const FractionalProgram& p, const RunTrace& trace,
                                 const StepSchedule& sched, const Vector& z, double B,
                                 int K = -1, double z_residual_tol = 1e-6);

// Slack of the incremental per-sweep bound
//   ||x^{n+1}-z||^2 <= ||x^n-z||^2
//                      + 2 eta_n sum_i g_i(z) (f_i(z)/g_i(z) - theta_{i,n})
//                      + 4 M (N + 1/N)(L^2 + E^2 H^2) eta_n^2
//                      - (1/2) sum_i ||x^{i,n} - x^{i-1,n}||^2
// with component denominators in [N, M], m + N <= M, L/E summed subgradient
// bounds and H a bound on |theta_{i,n}|. The middle term weighs each ratio
// gap by its own g_i(z); collapsing it to 2 g(z) eta_n (F(z) - F(x^n)) is
// only valid when the g_i(z) agree. Only meaningful on instances where the
// constants are certifiable; z must be a common fixed point of every
// component operator.
double check_incremental_descent_lemma(const SumOfRatiosProgram& p,
                                       const SolverState& before, const SolverState& after,
                                       const Vector& z, double L, double E, double H,
                                       double z_residual_tol = 1e-6);

}  // namespace ratiosplit
