#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ratiosplit/baselines.hpp"
#include "ratiosplit/problems.hpp"
#include "ratiosplit/solvers.hpp"

namespace ratiosplit {

// One algorithm entry in an experiment. Valid names depend on the family:
//   quadratic_linear:  fssm | afssm | dinkelbach
//   cobb_douglas:      fssm_cyclic | fssm_simultaneous
//   sum_linear_ratios: ifssm
// `schedule` drives the subgradient methods and is ignored by dinkelbach;
// `inner` is dinkelbach-only (an unset alpha_rule falls back to the
// quadratic_linear default alpha = 3e-6 / (1 + theta)).
struct MethodSpec {
  std::string name;
  StepSchedule schedule;
  InnerLoopConfig inner;
};

struct ExperimentConfig {
  InstanceFamily family = InstanceFamily::QuadraticLinear;
  Index k = 0;
  Index m = 0;  // quadratic_linear / sum_linear_ratios
  Index p = 0;  // cobb_douglas / sum_linear_ratios
  std::uint64_t base_seed = 0;  // trial t uses seed base_seed + t
  int trials = 1;
  std::vector<MethodSpec> methods;
  StopRule stop;
  // Start point; empty selects the family default (all 0.1 for
  // quadratic_linear, all 1 otherwise).
  Vector x1;
  // Directory for CSV output; empty writes nothing.
  std::string out_dir;
  // Concurrent trials. Aggregation order is by trial index either way, so
  // results are worker-count independent (timing aside).
  int workers = 1;
};

struct MethodSummary {
  std::string method;
  int trials_ok = 0;
  int trials_failed = 0;
  // Means over the ok trials; NaN when none succeeded.
  double mean_iters = 0.0;
  double mean_time_s = 0.0;
  double mean_final_obj = 0.0;
  double mean_final_feas = 0.0;
  // cobb_douglas only: numerator (cost) and denominator (profit) values at
  // the final iterate.
  std::optional<double> mean_cost;
  std::optional<double> mean_profit;
};

// Per-method averages; iteration-indexed rows carry the count of trials that
// reached the index, time rows resample every trace onto a common 100-point
// elapsed grid (last value carried forward, first value backfilled).
struct MethodCurves {
  std::string method;
  std::vector<int> n;
  std::vector<int> count;
  std::vector<double> mean_theta;
  std::vector<double> mean_rel_obj;
  std::vector<double> mean_rel_iter;
  std::vector<double> mean_feas;
  std::vector<double> mean_residual;

  std::vector<double> grid_t;
  std::vector<double> grid_theta;
  std::vector<double> grid_rel_obj;
  std::vector<double> grid_rel_iter;
  std::vector<double> grid_feas;
  // Traces contributing to the grid rows (empty traces are skipped).
  int grid_trials = 0;
};

struct ExperimentResult {
  // traces[t * methods + m] holds trial t of method m when that run
  // succeeded.
  std::vector<std::optional<RunTrace>> traces;
  std::vector<MethodSummary> summaries;
  std::vector<MethodCurves> curves;
  // One entry per failed (trial, method) run: "trial 3 fssm: <what>".
  std::vector<std::string> errors;
};

// Generates one instance per trial (seed = base_seed + trial), runs every
// method on it, aggregates, and writes CSVs under cfg.out_dir when set:
//   <family>_<method>_t<trial>.csv        trace rows
//   <family>_<method>_curve.csv           iteration-indexed means
//   <family>_<method>_curve_time.csv      time-grid means (timing dependent)
//   <family>_summary.csv                  one row per method
// A failing run is excluded from the averages and recorded in errors; config
// problems throw InvalidSpec instead.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// CSV helpers shared with the command-line tool. Values print with %.17g
// (NaN as "nan") so identical doubles give identical bytes.
void write_trace_csv(std::ostream& os, const RunTrace& trace);
void write_summary_csv(std::ostream& os, const std::vector<MethodSummary>& rows);

}  // namespace ratiosplit
