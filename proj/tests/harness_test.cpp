#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ratiosplit/experiment.hpp"
#include "ratiosplit/metrics.hpp"
#include "support/oracles.hpp"

using namespace ratiosplit;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "ratiosplit_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE_MESSAGE(bool(is), "missing file " << p.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

// Equality of two CSV files with the named columns blanked out (timing).
void check_equal_modulo(const fs::path& a, const fs::path& b,
                        const std::vector<std::string>& ignored) {
  auto la = read_lines(a);
  auto lb = read_lines(b);
  REQUIRE(la.size() == lb.size());
  REQUIRE(!la.empty());
  CHECK(la[0] == lb[0]);
  auto header = split(la[0]);
  std::vector<bool> keep(header.size(), true);
  for (std::size_t c = 0; c < header.size(); ++c)
    for (const auto& ig : ignored)
      if (header[c] == ig) keep[c] = false;
  for (std::size_t i = 1; i < la.size(); ++i) {
    auto ca = split(la[i]);
    auto cb = split(lb[i]);
    REQUIRE(ca.size() == header.size());
    REQUIRE(cb.size() == header.size());
    for (std::size_t c = 0; c < header.size(); ++c)
      if (keep[c]) CHECK_MESSAGE(ca[c] == cb[c], a.string() << " line " << i
                                                 << " column " << header[c]);
  }
}

ExperimentConfig small_ql(int trials, int iters) {
  ExperimentConfig cfg;
  cfg.family = InstanceFamily::QuadraticLinear;
  cfg.k = 8;
  cfg.m = 2;
  cfg.base_seed = 41;
  cfg.trials = trials;
  cfg.methods.push_back({"fssm", StepSchedule::harmonic(1e-4), {}});
  cfg.stop = StopRule::max_iterations(iters);
  return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config validation rejects bad setups") {
  ExperimentConfig cfg = small_ql(1, 5);
  CHECK_NOTHROW(run_experiment(cfg));

  auto bad = cfg;
  bad.trials = 0;
  CHECK_THROWS_AS(run_experiment(bad), InvalidSpec);
  bad = cfg;
  bad.workers = 0;
  CHECK_THROWS_AS(run_experiment(bad), InvalidSpec);
  bad = cfg;
  bad.methods.clear();
  CHECK_THROWS_AS(run_experiment(bad), InvalidSpec);
  bad = cfg;
  bad.stop = StopRule{};
  CHECK_THROWS_AS(run_experiment(bad), InvalidSpec);
  bad = cfg;
  bad.methods.push_back({"fssm", StepSchedule::harmonic(1e-4), {}});
  CHECK_THROWS_AS(run_experiment(bad), InvalidSpec);  // duplicate name
  bad = cfg;
  bad.methods[0].name = "ifssm";  // wrong family
  CHECK_THROWS_AS(run_experiment(bad), InvalidSpec);
  bad = cfg;
  bad.methods[0].name = "nope";
  CHECK_THROWS_AS(run_experiment(bad), InvalidSpec);
  bad = cfg;
  bad.m = 8;  // needs m < k
  CHECK_THROWS_AS(run_experiment(bad), InvalidSpec);
  bad = cfg;
  bad.x1 = Vector::Ones(3);
  CHECK_THROWS_AS(run_experiment(bad), InvalidSpec);
}

TEST_CASE("single trial produces the documented files") {
  auto dir = fresh_dir("structural");
  ExperimentConfig cfg = small_ql(1, 10);
  cfg.out_dir = dir.string();
  auto res = run_experiment(cfg);

  REQUIRE(res.summaries.size() == 1);
  CHECK(res.summaries[0].method == "fssm");
  CHECK(res.summaries[0].trials_ok == 1);
  CHECK(res.summaries[0].trials_failed == 0);
  CHECK(res.summaries[0].mean_iters == 10.0);
  CHECK(res.errors.empty());
  REQUIRE(res.traces.size() == 1);
  REQUIRE(res.traces[0].has_value());
  CHECK(res.traces[0]->meta.method == "fssm");
  CHECK(res.traces[0]->meta.family == std::string("quadratic_linear"));
  CHECK(res.traces[0]->meta.seed == 41);
  CHECK(res.traces[0]->rows.size() == 10);
  CHECK(res.traces[0]->iterates.empty());  // harness runs never record iterates

  auto trace = read_lines(dir / "quadratic_linear_fssm_t0.csv");
  REQUIRE(trace.size() == 11);
  CHECK(trace[0] == "n,theta,residual,rel_obj,rel_iter,feas,eta,elapsed_s");
  auto first = split(trace[1]);
  REQUIRE(first.size() == 8);
  CHECK(first[0] == "1");
  CHECK(std::stod(first[6]) == doctest::Approx(1e-4 / 2).epsilon(1e-12));

  auto curve = read_lines(dir / "quadratic_linear_fssm_curve.csv");
  REQUIRE(curve.size() == 11);
  CHECK(curve[0] == "n,count,mean_theta,mean_rel_obj,mean_rel_iter,mean_feas,mean_residual");
  // With one trial the curve is the trace itself.
  for (std::size_t j = 1; j < curve.size(); ++j) {
    auto cr = split(curve[j]);
    auto tr = split(trace[j]);
    CHECK(cr[0] == tr[0]);
    CHECK(cr[1] == "1");
    CHECK(cr[2] == tr[1]);  // theta
    CHECK(cr[3] == tr[3]);  // rel_obj
    CHECK(cr[4] == tr[4]);  // rel_iter
    CHECK(cr[5] == tr[5]);  // feas
    CHECK(cr[6] == tr[2]);  // residual
  }

  auto timed = read_lines(dir / "quadratic_linear_fssm_curve_time.csv");
  REQUIRE(timed.size() == 101);
  CHECK(timed[0] == "t,count,mean_theta,mean_rel_obj,mean_rel_iter,mean_feas");
  double prev = 0.0;
  for (std::size_t j = 1; j < timed.size(); ++j) {
    auto row = split(timed[j]);
    REQUIRE(row.size() == 6);
    const double t = std::stod(row[0]);
    CHECK(t > prev);
    prev = t;
    CHECK(row[1] == "1");
  }

  auto summary = read_lines(dir / "quadratic_linear_summary.csv");
  REQUIRE(summary.size() == 2);
  CHECK(summary[0] ==
        "method,trials_ok,trials_failed,mean_iters,mean_time_s,mean_final_obj,"
        "mean_final_feas");
  auto srow = split(summary[1]);
  CHECK(srow[0] == "fssm");
  CHECK(srow[1] == "1");
  CHECK(srow[2] == "0");
  CHECK(std::stod(srow[3]) == 10.0);
}

TEST_CASE("summary means match independently rerun trials") {
  ExperimentConfig cfg = small_ql(5, 30);
  cfg.base_seed = 97;
  auto res = run_experiment(cfg);
  REQUIRE(res.summaries[0].trials_ok == 5);

  double sum_theta = 0.0, sum_feas = 0.0, sum_iters = 0.0;
  RunOptions opts;
  opts.record_iterates = RunOptions::Iterates::Off;
  for (int t = 0; t < 5; ++t) {
    auto inst = gen_quadratic_linear(8, 2, 97 + static_cast<std::uint64_t>(t));
    auto st = fssm_run(inst.program, Vector::Constant(8, 0.1),
                       StepSchedule::harmonic(1e-4), StopRule::max_iterations(30),
                       opts);
    sum_theta += st.theta;
    sum_feas += feasibility_value(inst.program, st.x);
    sum_iters += static_cast<double>(st.trace.rows.size());

    // The stored trace is the same run.
    const auto& tr = res.traces[static_cast<std::size_t>(t)];
    REQUIRE(tr.has_value());
    REQUIRE(tr->rows.size() == st.trace.rows.size());
    for (std::size_t j = 0; j < st.trace.rows.size(); ++j) {
      CHECK(tr->rows[j].theta == st.trace.rows[j].theta);
      CHECK(tr->rows[j].rel_iter == st.trace.rows[j].rel_iter);
    }
  }
  CHECK(std::abs(res.summaries[0].mean_final_obj - sum_theta / 5.0) <= 1e-12);
  CHECK(std::abs(res.summaries[0].mean_final_feas - sum_feas / 5.0) <= 1e-12);
  CHECK(std::abs(res.summaries[0].mean_iters - sum_iters / 5.0) <= 1e-12);
}

TEST_CASE("iteration curves are the averages of the stored traces") {
  ExperimentConfig cfg = small_ql(3, 8);
  auto res = run_experiment(cfg);
  const auto& c = res.curves[0];
  REQUIRE(c.n.size() == 8);
  for (std::size_t j = 0; j < c.n.size(); ++j) {
    CHECK(c.n[j] == static_cast<int>(j) + 1);
    CHECK(c.count[j] == 3);
    double th = 0.0, ri = 0.0;
    for (int t = 0; t < 3; ++t) {
      th += res.traces[static_cast<std::size_t>(t)]->rows[j].theta;
      ri += res.traces[static_cast<std::size_t>(t)]->rows[j].rel_iter;
    }
    CHECK(c.mean_theta[j] == th / 3.0);
    CHECK(c.mean_rel_iter[j] == ri / 3.0);
  }
  CHECK(c.grid_t.size() == 100);
  CHECK(c.grid_trials == 3);
}

TEST_CASE("failing runs are excluded and accounted for") {
  ExperimentConfig cfg = small_ql(3, 10);
  MethodSpec bad{"dinkelbach", StepSchedule::harmonic(1e-4), {}};
  bad.inner.alpha_rule = [](int, double) { return -1.0; };  // hsdm rejects it
  cfg.methods.push_back(bad);
  auto dir = fresh_dir("excluded");
  cfg.out_dir = dir.string();

  auto res = run_experiment(cfg);
  REQUIRE(res.summaries.size() == 2);
  const auto& ok = res.summaries[0];
  const auto& failed = res.summaries[1];
  CHECK(ok.trials_ok == 3);
  CHECK(ok.trials_failed == 0);
  CHECK(failed.method == "dinkelbach");
  CHECK(failed.trials_ok == 0);
  CHECK(failed.trials_failed == 3);
  CHECK(failed.trials_ok + failed.trials_failed == cfg.trials);
  CHECK(std::isnan(failed.mean_final_obj));
  CHECK(std::isnan(failed.mean_iters));
  REQUIRE(res.errors.size() == 3);
  CHECK(res.errors[0].find("trial 0 dinkelbach:") == 0);

  for (int t = 0; t < 3; ++t) {
    CHECK(res.traces[static_cast<std::size_t>(t) * 2].has_value());
    CHECK(!res.traces[static_cast<std::size_t>(t) * 2 + 1].has_value());
    CHECK(fs::exists(dir / ("quadratic_linear_fssm_t" + std::to_string(t) + ".csv")));
    CHECK(!fs::exists(dir / ("quadratic_linear_dinkelbach_t" + std::to_string(t) + ".csv")));
  }
  // The failed method still appears in the summary file.
  auto summary = read_lines(dir / "quadratic_linear_summary.csv");
  REQUIRE(summary.size() == 3);
  auto row = split(summary[2]);
  CHECK(row[0] == "dinkelbach");
  CHECK(row[1] == "0");
  CHECK(row[2] == "3");
  CHECK(row[5] == "nan");
}

TEST_CASE("bench output is deterministic modulo timing columns") {
  auto dir1 = fresh_dir("det1");
  auto dir2 = fresh_dir("det2");
  ExperimentConfig cfg;
  cfg.family = InstanceFamily::QuadraticLinear;
  cfg.k = 10;
  cfg.m = 3;
  cfg.base_seed = 7;
  cfg.trials = 3;
  cfg.methods.push_back({"fssm", StepSchedule::constant(5e-5), {}});
  cfg.methods.push_back({"afssm", StepSchedule::harmonic(1e-3), {}});
  MethodSpec da{"dinkelbach", StepSchedule::constant(5e-5), {}};
  da.inner.alpha_rule = [](int j, double theta) {
    return 3e-6 / (static_cast<double>(j) * (1.0 + theta));
  };
  cfg.methods.push_back(da);
  cfg.stop = StopRule::max_iterations(25);

  cfg.out_dir = dir1.string();
  run_experiment(cfg);
  cfg.out_dir = dir2.string();
  run_experiment(cfg);

  for (const char* method : {"fssm", "afssm", "dinkelbach"}) {
    for (int t = 0; t < 3; ++t) {
      const std::string name =
          "quadratic_linear_" + std::string(method) + "_t" + std::to_string(t) + ".csv";
      check_equal_modulo(dir1 / name, dir2 / name, {"elapsed_s"});
    }
    const std::string curve = "quadratic_linear_" + std::string(method) + "_curve.csv";
    check_equal_modulo(dir1 / curve, dir2 / curve, {});
  }
  check_equal_modulo(dir1 / "quadratic_linear_summary.csv",
                     dir2 / "quadratic_linear_summary.csv", {"mean_time_s"});
}

TEST_CASE("worker count does not change results") {
  ExperimentConfig cfg = small_ql(6, 20);
  cfg.base_seed = 3;
  auto seq = run_experiment(cfg);
  cfg.workers = 4;
  auto par = run_experiment(cfg);

  REQUIRE(seq.traces.size() == par.traces.size());
  for (std::size_t i = 0; i < seq.traces.size(); ++i) {
    REQUIRE(seq.traces[i].has_value());
    REQUIRE(par.traces[i].has_value());
    CHECK(seq.traces[i]->meta.seed == par.traces[i]->meta.seed);
    REQUIRE(seq.traces[i]->rows.size() == par.traces[i]->rows.size());
    for (std::size_t j = 0; j < seq.traces[i]->rows.size(); ++j) {
      CHECK(seq.traces[i]->rows[j].theta == par.traces[i]->rows[j].theta);
      CHECK(seq.traces[i]->rows[j].rel_iter == par.traces[i]->rows[j].rel_iter);
      CHECK(seq.traces[i]->rows[j].feas == par.traces[i]->rows[j].feas);
    }
  }
  CHECK(seq.summaries[0].mean_final_obj == par.summaries[0].mean_final_obj);
}

TEST_CASE("cobb-douglas experiments report cost and profit") {
  auto dir = fresh_dir("cobb");
  ExperimentConfig cfg;
  cfg.family = InstanceFamily::CobbDouglas;
  cfg.k = 6;
  cfg.p = 3;
  cfg.base_seed = 11;
  cfg.trials = 2;
  cfg.methods.push_back({"fssm_cyclic", StepSchedule::harmonic(0.1), {}});
  cfg.methods.push_back({"fssm_simultaneous", StepSchedule::harmonic(0.1), {}});
  cfg.stop = StopRule::max_iterations(15);
  cfg.out_dir = dir.string();

  auto res = run_experiment(cfg);
  REQUIRE(res.summaries.size() == 2);
  for (const auto& s : res.summaries) {
    CHECK(s.trials_ok == 2);
    REQUIRE(s.mean_cost.has_value());
    REQUIRE(s.mean_profit.has_value());
    CHECK(*s.mean_cost > 0.0);
    CHECK(*s.mean_profit > 0.0);
  }
  auto summary = read_lines(dir / "cobb_douglas_summary.csv");
  CHECK(summary[0] ==
        "method,trials_ok,trials_failed,mean_iters,mean_time_s,mean_final_obj,"
        "mean_final_feas,mean_cost,mean_profit");
  REQUIRE(summary.size() == 3);
  CHECK(split(summary[1])[0] == "fssm_cyclic");
  CHECK(split(summary[2])[0] == "fssm_simultaneous");

  // Verify cost/profit against the instance functions at a rerun final point.
  auto inst = gen_cobb_douglas(6, 3, 11);
  RunOptions opts;
  opts.record_iterates = RunOptions::Iterates::Off;
  auto st = fssm_run(inst.cyclic, Vector::Ones(6), StepSchedule::harmonic(0.1),
                     StopRule::max_iterations(15), opts);
  auto st2 = fssm_run(gen_cobb_douglas(6, 3, 12).cyclic, Vector::Ones(6),
                      StepSchedule::harmonic(0.1), StopRule::max_iterations(15), opts);
  const double want_cost =
      0.5 * (inst.cyclic.numerator.value(st.x) +
             gen_cobb_douglas(6, 3, 12).cyclic.numerator.value(st2.x));
  CHECK(std::abs(*res.summaries[0].mean_cost - want_cost) <= 1e-12);
}

TEST_CASE("sum-of-ratios experiments run the incremental method") {
  ExperimentConfig cfg;
  cfg.family = InstanceFamily::SumLinearRatios;
  cfg.k = 4;
  cfg.m = 2;
  cfg.p = 3;
  cfg.base_seed = 5;
  cfg.trials = 2;
  cfg.methods.push_back({"ifssm", StepSchedule::harmonic(1.0), {}});
  cfg.stop = StopRule::max_iterations(20);

  auto res = run_experiment(cfg);
  REQUIRE(res.summaries.size() == 1);
  CHECK(res.summaries[0].trials_ok == 2);
  CHECK(res.summaries[0].mean_iters == 20.0);
  CHECK(!res.summaries[0].mean_cost.has_value());
  CHECK(res.summaries[0].mean_final_obj > 0.0);
  REQUIRE(res.traces[0].has_value());
  CHECK(res.traces[0]->meta.components == 4);  // padded to p + 1 operators
  CHECK(res.traces[0]->meta.method == "ifssm");
}

TEST_CASE("wall-clock stop yields a full time grid") {
  ExperimentConfig cfg = small_ql(2, 0);
  cfg.stop = StopRule::wall_clock(0.05);
  auto res = run_experiment(cfg);
  REQUIRE(res.summaries[0].trials_ok == 2);
  const auto& c = res.curves[0];
  CHECK(res.traces[0]->stop_reason == StopReason::WallClock);
  REQUIRE(c.grid_t.size() == 100);
  CHECK(c.grid_trials == 2);
  // Grid end matches the slowest trace.
  double t_end = 0.0;
  for (int t = 0; t < 2; ++t)
    t_end = std::max(t_end, res.traces[static_cast<std::size_t>(t)]->rows.back().elapsed_s);
  CHECK(c.grid_t.back() == doctest::Approx(t_end).epsilon(1e-12));
  // LOCF means stay within the observed theta range.
  const double lo = *std::min_element(c.grid_theta.begin(), c.grid_theta.end());
  CHECK(std::isfinite(lo));
}

TEST_CASE("metric helpers match a naive reimplementation") {
  std::mt19937_64 rng(2026);
  for (int rep = 0; rep < 50; ++rep) {
    const double prev = testsupport::rand_vec(rng, 1, 0.0, 5.0)(0);
    const double next = testsupport::rand_vec(rng, 1, 0.0, 5.0)(0);
    CHECK(std::abs(metric_rel_obj(prev, next) -
                   std::abs(next - prev) / (prev + 1.0)) <= 1e-12);

    Vector a = testsupport::rand_vec(rng, 6, -2.0, 2.0);
    Vector b = testsupport::rand_vec(rng, 6, -2.0, 2.0);
    CHECK(std::abs(metric_rel_iter(a, b) - (b - a).norm() / (a.norm() + 1.0)) <= 1e-12);

    Matrix A(3, 6);
    for (int i = 0; i < 3; ++i) A.row(i) = testsupport::rand_vec(rng, 6, -1.0, 1.0);
    Vector rhs = testsupport::rand_vec(rng, 3, -1.0, 1.0);
    const double want_feas =
        ((A * b - rhs).norm() - (A * a - rhs).norm()) / ((A * a - rhs).norm() + 1.0);
    CHECK(std::abs(metric_rel_feas_linear(A, rhs, a, b) - want_feas) <= 1e-12);

    Matrix B(4, 6);
    for (int i = 0; i < 4; ++i) B.row(i) = testsupport::rand_vec(rng, 6, -1.0, 1.0);
    Vector qlo = testsupport::rand_vec(rng, 4, -2.0, 0.0);
    Vector qhi = testsupport::rand_vec(rng, 4, 0.0, 2.0);
    double fe = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double v = B.row(i).dot(a);
      fe += std::max(qlo(i) - v, 0.0) + std::max(v - qhi(i), 0.0);
    }
    fe /= 2.0 * 4.0;
    CHECK(std::abs(metric_fe_halfspaces(B, qlo, qhi, a) - fe) <= 1e-12);

    const double F_prev = prev, F_next = next;
    const bool want = (b - a).norm() / (a.norm() + 1.0) <= 0.25 &&
                      std::abs(F_next - F_prev) / (F_prev + 1.0) <= 0.25;
    CHECK(metric_stop_joint(a, b, F_prev, F_next, 0.25) == want);
  }
}

}  // TEST_SUITE
