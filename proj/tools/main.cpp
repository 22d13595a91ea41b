// Command-line front end: generate instances, run a single solve, benchmark
// method sets, and spot-check the library's convergence guarantees.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "ratiosplit/experiment.hpp"
#include "ratiosplit/metrics.hpp"

using namespace ratiosplit;

namespace {

std::string fmt(double v, const char* spec = "%.10g") {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InvalidSpec("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw InvalidSpec("not a number: '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw InvalidSpec("not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw InvalidSpec("not an integer: '" + s + "'");
  return v;
}

// const:ETA | harmonic:C | power:C:P  (the schedule's describe() format).
StepSchedule parse_schedule(const std::string& s) {
  auto parts = split(s, ':');
  if (parts.size() == 2 && parts[0] == "const")
    return StepSchedule::constant(parse_double(parts[1]));
  if (parts.size() == 2 && parts[0] == "harmonic")
    return StepSchedule::harmonic(parse_double(parts[1]));
  if (parts.size() == 3 && parts[0] == "power")
    return StepSchedule::power(parse_double(parts[1]), parse_double(parts[2]));
  throw InvalidSpec("bad step schedule '" + s +
                    "' (expected const:ETA, harmonic:C or power:C:P)");
}

// Comma list of iters:N | wall:SECONDS | rel:EPS | res:TOL, OR-combined.
StopRule parse_stop(const std::string& s) {
  StopRule rule;
  for (const auto& tok : split(s, ',')) {
    auto kv = split(tok, ':');
    if (kv.size() != 2)
      throw InvalidSpec("bad stop criterion '" + tok +
                        "' (expected iters:N, wall:S, rel:EPS or res:TOL)");
    if (kv[0] == "iters")
      rule = rule | StopRule::max_iterations(parse_int(kv[1]));
    else if (kv[0] == "wall")
      rule = rule | StopRule::wall_clock(parse_double(kv[1]));
    else if (kv[0] == "rel")
      rule = rule | StopRule::rel_error(parse_double(kv[1]));
    else if (kv[0] == "res")
      rule = rule | StopRule::residual(parse_double(kv[1]));
    else
      throw InvalidSpec("unknown stop criterion '" + kv[0] + "'");
  }
  if (rule.empty()) throw InvalidSpec("stop rule has no criteria");
  return rule;
}

InnerLoopConfig make_inner(int inner_iters, double da_alpha) {
  InnerLoopConfig inner;
  inner.inner_iters = inner_iters;
  inner.alpha_rule = [da_alpha](int, double theta) {
    return da_alpha / (1.0 + theta);
  };
  return inner;
}

struct GenerateArgs {
  std::string family;
  int k = 0, m = 0, p = 0;
  std::uint64_t seed = 1;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::binary);
    if (!file) throw InvalidSpec("cannot open output file " + a.out);
    os = &file;
  }
  switch (instance_family(a.family)) {
    case InstanceFamily::QuadraticLinear:
      write_instance(*os, gen_quadratic_linear(a.k, a.m, a.seed));
      break;
    case InstanceFamily::CobbDouglas:
      write_instance(*os, gen_cobb_douglas(a.k, a.p, a.seed));
      break;
    case InstanceFamily::SumLinearRatios:
      write_instance(*os, gen_sum_linear_ratios(a.k, a.m, a.p, a.seed));
      break;
  }
  return 0;
}

struct SolveArgs {
  std::string instance;
  std::string analytic;
  std::string method = "fssm";
  std::string eta = "harmonic:0.1";
  std::string stop = "iters:1000";
  double x1_fill = std::numeric_limits<double>::quiet_NaN();
  int inner_iters = 10;
  double da_alpha = 3e-6;
  std::string out;
};

int run_solve(const SolveArgs& a) {
  if (a.instance.empty() == a.analytic.empty())
    throw InvalidSpec("solve needs exactly one of --instance and --analytic");

  const StepSchedule sched = parse_schedule(a.eta);
  const StopRule stop = parse_stop(a.stop);
  RunOptions opts;
  opts.record_iterates = RunOptions::Iterates::Off;

  std::optional<FractionalProgram> single;
  std::optional<SumOfRatiosProgram> sum;
  std::string family = "analytic";
  std::uint64_t seed = 0;
  double default_fill = 1.0;

  if (!a.analytic.empty()) {
    single = gen_analytic(analytic_tag(a.analytic));
    family = a.analytic;
  } else {
    std::ifstream is(a.instance, std::ios::binary);
    if (!is) throw InvalidSpec("cannot open instance file " + a.instance);
    AnyInstance inst = read_instance(is);
    family = to_string(inst.family);
    switch (inst.family) {
      case InstanceFamily::QuadraticLinear:
        single = inst.quadratic_linear->program;
        seed = inst.quadratic_linear->seed;
        default_fill = 0.1;
        break;
      case InstanceFamily::CobbDouglas:
        seed = inst.cobb_douglas->seed;
        if (a.method == "fssm_simultaneous")
          single = inst.cobb_douglas->simultaneous;
        else if (a.method == "fssm_cyclic" || a.method == "fssm" ||
                 a.method == "afssm")
          single = inst.cobb_douglas->cyclic;
        else
          throw InvalidSpec("method '" + a.method + "' does not fit a cobb_douglas instance");
        break;
      case InstanceFamily::SumLinearRatios:
        sum = inst.sum_linear_ratios->program;
        seed = inst.sum_linear_ratios->seed;
        break;
    }
  }

  const Index dim = single ? single->dim() : sum->dim();
  const double fill = std::isnan(a.x1_fill) ? default_fill : a.x1_fill;
  const Vector x1 = Vector::Constant(dim, fill);

  SolverState st;
  if (sum) {
    if (a.method != "ifssm")
      throw InvalidSpec("sum-of-ratios instances solve with --method ifssm");
    st = ifssm_run(*sum, x1, sched, stop, opts);
  } else if (a.method == "dinkelbach") {
    st = dinkelbach_run(*single, x1, make_inner(a.inner_iters, a.da_alpha), stop, {},
                        opts);
  } else if (a.method == "afssm") {
    st = afssm_run(*single, x1, sched, stop, opts);
  } else if (a.method == "fssm" || a.method == "fssm_cyclic" ||
             a.method == "fssm_simultaneous") {
    st = fssm_run(*single, x1, sched, stop, opts);
  } else {
    throw InvalidSpec("unknown method '" + a.method + "'");
  }

  for (const auto& w : st.trace.warnings) std::cerr << "warning: " << w << "\n";
  if (!a.out.empty()) {
    std::ofstream os(a.out, std::ios::binary);
    if (!os) throw InvalidSpec("cannot open output file " + a.out);
    st.trace.meta.family = family;
    st.trace.meta.seed = seed;
    write_trace_csv(os, st.trace);
  }

  std::cout << "method=" << a.method << "\n"
            << "family=" << family << "\n"
            << "dim=" << dim << "\n"
            << "schedule=" << st.trace.meta.schedule << "\n"
            << "iters=" << st.trace.rows.size() << "\n"
            << "stop=" << to_string(st.trace.stop_reason) << "\n"
            << "theta=" << fmt(st.theta, "%.17g") << "\n";
  if (single) {
    std::cout << "feas=" << fmt(feasibility_value(*single, st.x), "%.17g") << "\n";
    if (single->optimum_theta)
      std::cout << "theta_gap=" << fmt(st.theta - *single->optimum_theta, "%.17g")
                << "\n";
  } else {
    std::cout << "feas=" << fmt(feasibility_value(*sum, st.x), "%.17g") << "\n";
  }
  std::cout << "time_s=" << fmt(st.trace.total_seconds) << "\n";
  return 0;
}

struct BenchArgs {
  std::string family;
  int k = 0, m = 0, p = 0;
  std::uint64_t seed = 1;
  int trials = 1;
  int workers = 1;
  std::vector<std::string> methods;
  std::string eta = "harmonic:0.1";
  std::string stop;
  double x1_fill = std::numeric_limits<double>::quiet_NaN();
  int inner_iters = 10;
  double da_alpha = 0.0;  // 0 keeps the harness default
  std::string out;
};

int run_bench(const BenchArgs& a) {
  ExperimentConfig cfg;
  cfg.family = instance_family(a.family);
  cfg.k = a.k;
  cfg.m = a.m;
  cfg.p = a.p;
  cfg.base_seed = a.seed;
  cfg.trials = a.trials;
  cfg.workers = a.workers;
  cfg.stop = parse_stop(a.stop);
  cfg.out_dir = a.out;
  const StepSchedule sched = parse_schedule(a.eta);
  for (const auto& name : a.methods) {
    MethodSpec ms{name, sched, {}};
    ms.inner.inner_iters = a.inner_iters;
    if (a.da_alpha > 0.0) {
      const double c = a.da_alpha;
      ms.inner.alpha_rule = [c](int, double theta) { return c / (1.0 + theta); };
    }
    cfg.methods.push_back(std::move(ms));
  }
  if (!std::isnan(a.x1_fill)) cfg.x1 = Vector::Constant(cfg.k, a.x1_fill);

  const ExperimentResult res = run_experiment(cfg);
  for (const auto& e : res.errors) std::cerr << "error: " << e << "\n";
  write_summary_csv(std::cout, res.summaries);

  for (const auto& s : res.summaries)
    if (s.trials_ok == 0) return 3;
  return 0;
}

// ---- verify: spot checks of the library's guarantees ------------------------

bool report(const char* name, bool ok, const std::string& detail) {
  std::printf("%-22s %s  %s\n", name, ok ? "PASS" : "FAIL", detail.c_str());
  return ok;
}

bool verify_operators(std::uint64_t seed, int reps) {
  std::mt19937_64 rng(seed);
  auto draw = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  double worst = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const Index dim = 1 + static_cast<Index>(rng() % 6);
    Vector a(dim), x(dim), y(dim);
    for (Index i = 0; i < dim; ++i) {
      a(i) = draw(-2.0, 2.0);
      x(i) = draw(-5.0, 5.0);
      y(i) = draw(-5.0, 5.0);
    }
    if (a.norm() < 1e-6) a(0) = 1.0;
    std::vector<FixedPointOperator> ops;
    ops.push_back(FixedPointOperator::halfspace(a, draw(-1.0, 1.0)));
    ops.push_back(FixedPointOperator::hyperplane(a, draw(-1.0, 1.0)));
    ops.push_back(FixedPointOperator::box(dim, draw(-2.0, 0.0), draw(0.1, 2.0)));
    ops.push_back(FixedPointOperator::ball(Vector::Zero(dim), draw(0.5, 3.0)));
    for (const auto& T : ops) {
      const Vector tx = T(x), ty = T(y);
      // Firm nonexpansiveness and idempotence of the projections.
      worst = std::max(worst, (tx - ty).squaredNorm() - (tx - ty).dot(x - y));
      worst = std::max(worst, residual(T, tx));
    }
    // Composition and average are SQNE around a shared fixed point (origin).
    const auto C = FixedPointOperator::compose(
        {FixedPointOperator::box(dim, -1.0, 2.0),
         FixedPointOperator::ball(Vector::Zero(dim), 3.0)});
    const auto A = FixedPointOperator::average(
        {FixedPointOperator::halfspace(a, 0.5), FixedPointOperator::box(dim, -1.0, 2.0)});
    const Vector z = Vector::Zero(dim);
    for (const auto& T : {C, A}) {
      const Vector tx = T(x);
      const double viol = (tx - z).squaredNorm() -
                          ((x - z).squaredNorm() -
                           T.sqne_modulus() * (tx - x).squaredNorm());
      worst = std::max(worst, viol);
    }
  }
  char detail[96];
  std::snprintf(detail, sizeof(detail), "worst violation %.3g over %d rounds", worst,
                reps);
  return report("operators", worst <= 1e-10, detail);
}

bool verify_descent_step(int steps) {
  const FractionalProgram p = gen_analytic(AnalyticTag::Ratio2DGrid);
  const Vector z = *p.optimum_x;
  const StepSchedule sched = StepSchedule::harmonic(0.1);
  SolverState st = fssm_init(p, Vector::Ones(p.dim()));
  double min_slack = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= steps; ++n) {
    const SolverState before = st.light_copy();
    fssm_step(p, st, sched.eta(n));
    const double B = st.trace.rows.back().grad_norm_sq;
    min_slack = std::min(min_slack,
                         check_descent_lemma(p, before, st, z, p.op.sqne_modulus(), B));
  }
  char detail[96];
  std::snprintf(detail, sizeof(detail), "min slack %.3g over %d steps", min_slack,
                steps);
  return report("descent-step", min_slack >= -1e-9, detail);
}

bool verify_rate_bound() {
  const FractionalProgram p = gen_analytic(AnalyticTag::Ratio2DGrid);
  const StepSchedule sched = StepSchedule::constant(1e-2);
  const SolverState st = fssm_run(p, Vector::Ones(p.dim()), sched,
                                  StopRule::max_iterations(500));
  const double B = st.trace.max_grad_norm_sq();
  const double slack = check_rate_bound_constant(p, st.trace, sched, *p.optimum_x, B);
  char detail[96];
  std::snprintf(detail, sizeof(detail), "slack %.3g after %zu steps", slack,
                st.trace.rows.size());
  return report("rate-bound", slack >= 0.0, detail);
}

bool verify_incremental_step(std::uint64_t seed, int sweeps) {
  const auto inst = gen_sum_linear_ratios(6, 3, 2, seed);
  const SumOfRatiosProgram& p = inst.program;
  // Every cut has a strictly positive offset, so the origin lies in all of
  // them and in the box: a common fixed point with known ratio data.
  const Vector z = Vector::Zero(6);
  double L = 0.0, E = 0.0;
  for (int i = 0; i < inst.C.rows(); ++i) {
    L += inst.C.row(i).norm();
    E += inst.D.row(i).norm();
  }
  const StepSchedule sched = StepSchedule::harmonic(0.5);
  SolverState st = ifssm_init(p, Vector::Ones(6));
  double H = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= sweeps; ++n) {
    const SolverState before = st.light_copy();
    for (double th : before.component_thetas) H = std::max(H, std::abs(th));
    ifssm_step(p, st, sched.eta(n));
    min_slack = std::min(min_slack,
                         check_incremental_descent_lemma(p, before, st, z, L, E, H));
  }
  char detail[96];
  std::snprintf(detail, sizeof(detail), "min slack %.3g over %d sweeps", min_slack,
                sweeps);
  return report("incremental-step", min_slack >= -1e-9, detail);
}

int run_verify(std::uint64_t seed, int reps) {
  bool ok = true;
  ok &= verify_operators(seed, reps);
  ok &= verify_descent_step(200);
  ok &= verify_rate_bound();
  ok &= verify_incremental_step(seed, 200);
  std::printf("verify: %s\n", ok ? "all checks passed" : "FAILED");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Splitting methods for fractional programs over fixed-point sets"};
  app.require_subcommand(1);
  int rc = 0;

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Write a random instance file");
  gen->add_option("--family", ga.family,
                  "quadratic_linear | cobb_douglas | sum_linear_ratios")
      ->required();
  gen->add_option("--k", ga.k, "Variable dimension")->required();
  gen->add_option("--m", ga.m, "Equality rows / ratio count");
  gen->add_option("--p", ga.p, "Band / halfspace count");
  gen->add_option("--seed", ga.seed, "Generator seed")->capture_default_str();
  gen->add_option("--out", ga.out, "Output file (default stdout)");
  gen->callback([&] { rc = run_generate(ga); });

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Run one method on one instance");
  solve->add_option("--instance", sa.instance, "Instance file from `generate`");
  solve->add_option("--analytic", sa.analytic,
                    "quad_over_one_1d | quad_over_x_1d | ratio_2d_grid");
  solve->add_option("--method", sa.method,
                    "fssm | afssm | dinkelbach | fssm_cyclic | fssm_simultaneous | ifssm")->capture_default_str();
  solve->add_option("--eta", sa.eta, "Step schedule: const:E, harmonic:C, power:C:P")->capture_default_str();
  solve->add_option("--stop", sa.stop,
                    "Comma list of iters:N, wall:S, rel:EPS, res:TOL")->capture_default_str();
  solve->add_option("--x1", sa.x1_fill, "Fill value for the start point");
  solve->add_option("--inner-iters", sa.inner_iters, "dinkelbach inner steps")->capture_default_str();
  solve->add_option("--da-alpha", sa.da_alpha,
                    "dinkelbach inner step scale c in c/(1+theta)")->capture_default_str();
  solve->add_option("--out", sa.out, "Trace CSV path");
  solve->callback([&] { rc = run_solve(sa); });

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run a multi-trial benchmark");
  bench->set_config("--config", "", "Plain-text key=value config; flags override");
  bench->add_option("--family", ba.family,
                    "quadratic_linear | cobb_douglas | sum_linear_ratios")
      ->required();
  bench->add_option("--k", ba.k, "Variable dimension")->required();
  bench->add_option("--m", ba.m, "Equality rows / ratio count");
  bench->add_option("--p", ba.p, "Band / halfspace count");
  bench->add_option("--seed", ba.seed, "Base seed; trial t uses seed+t")->capture_default_str();
  bench->add_option("--trials", ba.trials, "Trial count")->capture_default_str();
  bench->add_option("--workers", ba.workers, "Concurrent trials")->capture_default_str();
  bench->add_option("--method", ba.methods, "Methods to run (repeat or comma list)")
      ->required()
      ->delimiter(',');
  bench->add_option("--eta", ba.eta, "Step schedule shared by the methods")->capture_default_str();
  bench->add_option("--stop", ba.stop, "Comma list of iters:N, wall:S, rel:EPS, res:TOL")
      ->required();
  bench->add_option("--x1", ba.x1_fill, "Fill value for the start point");
  bench->add_option("--inner-iters", ba.inner_iters, "dinkelbach inner steps")->capture_default_str();
  bench->add_option("--da-alpha", ba.da_alpha,
                    "dinkelbach inner step scale (default 3e-6)");
  bench->add_option("--out", ba.out, "Directory for CSV output");
  bench->callback([&] { rc = run_bench(ba); });

  std::uint64_t vseed = 2026;
  int vreps = 300;
  auto* verify = app.add_subcommand("verify", "Spot-check solver guarantees");
  verify->add_option("--seed", vseed, "Sampling seed")->capture_default_str();
  verify->add_option("--reps", vreps, "Operator sampling rounds")->capture_default_str();
  verify->callback([&] { rc = run_verify(vseed, vreps); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
