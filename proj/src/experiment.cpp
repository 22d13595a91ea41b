#include "ratiosplit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <thread>
#include <utility>

namespace ratiosplit {
namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

enum class MethodKind { Fssm, Afssm, Dinkelbach, FssmCyclic, FssmSimultaneous, Ifssm };

MethodKind method_kind(const std::string& name) {
  if (name == "fssm") return MethodKind::Fssm;
  if (name == "afssm") return MethodKind::Afssm;
  if (name == "dinkelbach") return MethodKind::Dinkelbach;
  if (name == "fssm_cyclic") return MethodKind::FssmCyclic;
  if (name == "fssm_simultaneous") return MethodKind::FssmSimultaneous;
  if (name == "ifssm") return MethodKind::Ifssm;
  throw InvalidSpec("config: unknown method '" + name + "'");
}

bool method_fits_family(InstanceFamily f, MethodKind k) {
  switch (f) {
    case InstanceFamily::QuadraticLinear:
      return k == MethodKind::Fssm || k == MethodKind::Afssm ||
             k == MethodKind::Dinkelbach;
    case InstanceFamily::CobbDouglas:
      return k == MethodKind::FssmCyclic || k == MethodKind::FssmSimultaneous;
    case InstanceFamily::SumLinearRatios:
      return k == MethodKind::Ifssm;
  }
  return false;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw InvalidSpec("config: trials must be >= 1");
  if (cfg.workers < 1) throw InvalidSpec("config: workers must be >= 1");
  if (cfg.methods.empty()) throw InvalidSpec("config: no methods listed");
  if (cfg.stop.empty()) throw InvalidSpec("config: stop rule has no criteria");
  if (cfg.k < 1) throw InvalidSpec("config: k must be >= 1");
  switch (cfg.family) {
    case InstanceFamily::QuadraticLinear:
      if (cfg.m < 1 || cfg.m >= cfg.k)
        throw InvalidSpec("config: quadratic_linear needs 1 <= m < k");
      break;
    case InstanceFamily::CobbDouglas:
      if (cfg.p < 1) throw InvalidSpec("config: cobb_douglas needs p >= 1");
      break;
    case InstanceFamily::SumLinearRatios:
      if (cfg.m < 1 || cfg.p < 1)
        throw InvalidSpec("config: sum_linear_ratios needs m >= 1 and p >= 1");
      break;
  }
  if (cfg.x1.size() != 0 && cfg.x1.size() != cfg.k)
    throw InvalidSpec("config: start point dimension does not match k");
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    const auto& name = cfg.methods[i].name;
    if (!method_fits_family(cfg.family, method_kind(name)))
      throw InvalidSpec("config: method '" + name + "' does not apply to family " +
                        std::string(to_string(cfg.family)));
    for (std::size_t j = i + 1; j < cfg.methods.size(); ++j)
      if (cfg.methods[j].name == name)
        throw InvalidSpec("config: duplicate method '" + name + "'");
  }
}

Vector start_point(const ExperimentConfig& cfg) {
  if (cfg.x1.size() != 0) return cfg.x1;
  if (cfg.family == InstanceFamily::QuadraticLinear)
    return Vector::Constant(cfg.k, 0.1);
  return Vector::Ones(cfg.k);
}

InnerLoopConfig with_default_alpha(InnerLoopConfig inner) {
  if (!inner.alpha_rule)
    inner.alpha_rule = [](int, double theta) { return 3e-6 / (1.0 + theta); };
  return inner;
}

AnyInstance generate(const ExperimentConfig& cfg, std::uint64_t seed) {
  AnyInstance inst;
  inst.family = cfg.family;
  switch (cfg.family) {
    case InstanceFamily::QuadraticLinear:
      inst.quadratic_linear = gen_quadratic_linear(cfg.k, cfg.m, seed);
      break;
    case InstanceFamily::CobbDouglas:
      inst.cobb_douglas = gen_cobb_douglas(cfg.k, cfg.p, seed);
      break;
    case InstanceFamily::SumLinearRatios:
      inst.sum_linear_ratios = gen_sum_linear_ratios(cfg.k, cfg.m, cfg.p, seed);
      break;
  }
  return inst;
}

struct RunOutcome {
  RunTrace trace;
  double final_theta = 0.0;
  double final_feas = 0.0;
  std::optional<double> final_cost;
  std::optional<double> final_profit;
};

RunOutcome run_one(const ExperimentConfig& cfg, const AnyInstance& inst,
                   const MethodSpec& ms, const Vector& x1) {
  RunOptions opts;
  opts.record_iterates = RunOptions::Iterates::Off;

  RunOutcome out;
  switch (method_kind(ms.name)) {
    case MethodKind::Fssm: {
      const auto& p = inst.quadratic_linear->program;
      auto st = fssm_run(p, x1, ms.schedule, cfg.stop, opts);
      out.final_theta = st.theta;
      out.final_feas = feasibility_value(p, st.x);
      out.trace = std::move(st.trace);
      break;
    }
    case MethodKind::Afssm: {
      const auto& p = inst.quadratic_linear->program;
      auto st = afssm_run(p, x1, ms.schedule, cfg.stop, opts);
      out.final_theta = st.theta;
      out.final_feas = feasibility_value(p, st.x);
      out.trace = std::move(st.trace);
      break;
    }
    case MethodKind::Dinkelbach: {
      const auto& p = inst.quadratic_linear->program;
      auto st = dinkelbach_run(p, x1, with_default_alpha(ms.inner), cfg.stop, {}, opts);
      out.final_theta = st.theta;
      out.final_feas = feasibility_value(p, st.x);
      out.trace = std::move(st.trace);
      break;
    }
    case MethodKind::FssmCyclic:
    case MethodKind::FssmSimultaneous: {
      const auto& cd = *inst.cobb_douglas;
      const auto& p = method_kind(ms.name) == MethodKind::FssmCyclic ? cd.cyclic
                                                                     : cd.simultaneous;
      auto st = fssm_run(p, x1, ms.schedule, cfg.stop, opts);
      out.final_theta = st.theta;
      out.final_feas = feasibility_value(p, st.x);
      out.final_cost = p.numerator.value(st.x);
      out.final_profit = p.denominator.value(st.x);
      out.trace = std::move(st.trace);
      break;
    }
    case MethodKind::Ifssm: {
      const auto& p = inst.sum_linear_ratios->program;
      auto st = ifssm_run(p, x1, ms.schedule, cfg.stop, opts);
      out.final_theta = st.theta;
      out.final_feas = feasibility_value(p, st.x);
      out.trace = std::move(st.trace);
      break;
    }
  }
  out.trace.meta.method = ms.name;
  out.trace.meta.family = to_string(cfg.family);
  return out;
}

struct Slot {
  std::optional<RunOutcome> outcome;
  std::string error;
};

MethodSummary summarize(const std::string& name, const std::vector<Slot>& slots,
                        std::size_t methods, std::size_t mi, int trials) {
  MethodSummary s;
  s.method = name;
  double iters = 0.0, time_s = 0.0, obj = 0.0, feas = 0.0;
  double cost = 0.0, profit = 0.0;
  bool has_cp = false;
  for (int t = 0; t < trials; ++t) {
    const Slot& sl = slots[static_cast<std::size_t>(t) * methods + mi];
    if (!sl.outcome) {
      ++s.trials_failed;
      continue;
    }
    ++s.trials_ok;
    const RunOutcome& o = *sl.outcome;
    iters += static_cast<double>(o.trace.rows.size());
    time_s += o.trace.total_seconds;
    obj += o.final_theta;
    feas += o.final_feas;
    if (o.final_cost) {
      has_cp = true;
      cost += *o.final_cost;
      profit += *o.final_profit;
    }
  }
  const double ok = static_cast<double>(s.trials_ok);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.mean_iters = s.trials_ok ? iters / ok : nan;
  s.mean_time_s = s.trials_ok ? time_s / ok : nan;
  s.mean_final_obj = s.trials_ok ? obj / ok : nan;
  s.mean_final_feas = s.trials_ok ? feas / ok : nan;
  if (has_cp) {
    s.mean_cost = cost / ok;
    s.mean_profit = profit / ok;
  }
  return s;
}

MethodCurves build_curves(const std::string& name, const std::vector<Slot>& slots,
                          std::size_t methods, std::size_t mi, int trials) {
  MethodCurves c;
  c.method = name;

  std::vector<const RunTrace*> traces;
  for (int t = 0; t < trials; ++t) {
    const Slot& sl = slots[static_cast<std::size_t>(t) * methods + mi];
    if (sl.outcome) traces.push_back(&sl.outcome->trace);
  }

  std::size_t max_rows = 0;
  for (const auto* tr : traces) max_rows = std::max(max_rows, tr->rows.size());
  for (std::size_t j = 0; j < max_rows; ++j) {
    int cnt = 0;
    double th = 0.0, ro = 0.0, ri = 0.0, fe = 0.0, re = 0.0;
    for (const auto* tr : traces) {
      if (tr->rows.size() <= j) continue;
      const TraceRow& r = tr->rows[j];
      ++cnt;
      th += r.theta;
      ro += r.rel_obj;
      ri += r.rel_iter;
      fe += r.feas;
      re += r.residual;
    }
    const double d = static_cast<double>(cnt);
    c.n.push_back(static_cast<int>(j) + 1);
    c.count.push_back(cnt);
    c.mean_theta.push_back(th / d);
    c.mean_rel_obj.push_back(ro / d);
    c.mean_rel_iter.push_back(ri / d);
    c.mean_feas.push_back(fe / d);
    c.mean_residual.push_back(re / d);
  }

  // Time alignment: resample each nonempty trace onto a shared 100-point
  // elapsed grid, carrying the last row forward (and the first row backward
  // for grid points before a trace's first record).
  std::vector<const RunTrace*> timed;
  double t_end = 0.0;
  for (const auto* tr : traces) {
    if (tr->rows.empty()) continue;
    timed.push_back(tr);
    t_end = std::max(t_end, tr->rows.back().elapsed_s);
  }
  c.grid_trials = static_cast<int>(timed.size());
  if (timed.empty() || !(t_end > 0.0)) {
    c.grid_trials = 0;
    return c;
  }
  std::vector<std::size_t> cursor(timed.size(), 0);
  for (int i = 0; i < 100; ++i) {
    const double tg = t_end * static_cast<double>(i + 1) / 100.0;
    double th = 0.0, ro = 0.0, ri = 0.0, fe = 0.0;
    for (std::size_t s = 0; s < timed.size(); ++s) {
      const auto& rows = timed[s]->rows;
      while (cursor[s] + 1 < rows.size() && rows[cursor[s] + 1].elapsed_s <= tg)
        ++cursor[s];
      const TraceRow& r = rows[cursor[s]];
      th += r.theta;
      ro += r.rel_obj;
      ri += r.rel_iter;
      fe += r.feas;
    }
    const double d = static_cast<double>(timed.size());
    c.grid_t.push_back(tg);
    c.grid_theta.push_back(th / d);
    c.grid_rel_obj.push_back(ro / d);
    c.grid_rel_iter.push_back(ri / d);
    c.grid_feas.push_back(fe / d);
  }
  return c;
}

void write_curves_csv(std::ostream& os, const MethodCurves& c) {
  os << "n,count,mean_theta,mean_rel_obj,mean_rel_iter,mean_feas,mean_residual\n";
  for (std::size_t j = 0; j < c.n.size(); ++j) {
    os << c.n[j] << ',' << c.count[j] << ',' << fmt(c.mean_theta[j]) << ','
       << fmt(c.mean_rel_obj[j]) << ',' << fmt(c.mean_rel_iter[j]) << ','
       << fmt(c.mean_feas[j]) << ',' << fmt(c.mean_residual[j]) << '\n';
  }
}

void write_time_curves_csv(std::ostream& os, const MethodCurves& c) {
  os << "t,count,mean_theta,mean_rel_obj,mean_rel_iter,mean_feas\n";
  for (std::size_t j = 0; j < c.grid_t.size(); ++j) {
    os << fmt(c.grid_t[j]) << ',' << c.grid_trials << ',' << fmt(c.grid_theta[j])
       << ',' << fmt(c.grid_rel_obj[j]) << ',' << fmt(c.grid_rel_iter[j]) << ','
       << fmt(c.grid_feas[j]) << '\n';
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidSpec("cannot open output file " + path.string());
  return os;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  const std::string fam = to_string(cfg.family);

  const std::size_t methods = cfg.methods.size();
  for (int t = 0; t < cfg.trials; ++t) {
    for (std::size_t mi = 0; mi < methods; ++mi) {
      const auto& tr = res.traces[static_cast<std::size_t>(t) * methods + mi];
      if (!tr) continue;
      char name[160];
      std::snprintf(name, sizeof(name), "%s_%s_t%d.csv", fam.c_str(),
                    cfg.methods[mi].name.c_str(), t);
      auto os = open_out(dir / name);
      write_trace_csv(os, *tr);
    }
  }
  for (const auto& c : res.curves) {
    auto os = open_out(dir / (fam + "_" + c.method + "_curve.csv"));
    write_curves_csv(os, c);
    auto ot = open_out(dir / (fam + "_" + c.method + "_curve_time.csv"));
    write_time_curves_csv(ot, c);
  }
  auto os = open_out(dir / (fam + "_summary.csv"));
  write_summary_csv(os, res.summaries);
}

}  // namespace

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << "n,theta,residual,rel_obj,rel_iter,feas,eta,elapsed_s\n";
  for (const TraceRow& r : trace.rows) {
    os << r.n << ',' << fmt(r.theta) << ',' << fmt(r.residual) << ','
       << fmt(r.rel_obj) << ',' << fmt(r.rel_iter) << ',' << fmt(r.feas) << ','
       << fmt(r.eta) << ',' << fmt(r.elapsed_s) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<MethodSummary>& rows) {
  bool extra = false;
  for (const auto& r : rows)
    if (r.mean_cost) extra = true;
  os << "method,trials_ok,trials_failed,mean_iters,mean_time_s,mean_final_obj,"
        "mean_final_feas";
  if (extra) os << ",mean_cost,mean_profit";
  os << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows) {
    os << r.method << ',' << r.trials_ok << ',' << r.trials_failed << ','
       << fmt(r.mean_iters) << ',' << fmt(r.mean_time_s) << ','
       << fmt(r.mean_final_obj) << ',' << fmt(r.mean_final_feas);
    if (extra)
      os << ',' << fmt(r.mean_cost.value_or(nan)) << ','
         << fmt(r.mean_profit.value_or(nan));
    os << '\n';
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Vector x1 = start_point(cfg);
  const std::size_t methods = cfg.methods.size();
  const std::size_t total = static_cast<std::size_t>(cfg.trials) * methods;

  std::vector<Slot> slots(total);
  auto run_trial = [&](int t) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(t);
    const std::size_t base = static_cast<std::size_t>(t) * methods;
    AnyInstance inst;
    try {
      inst = generate(cfg, seed);
    } catch (const std::exception& e) {
      for (std::size_t mi = 0; mi < methods; ++mi)
        slots[base + mi].error = "trial " + std::to_string(t) + " " +
                                 cfg.methods[mi].name + ": generation: " + e.what();
      return;
    }
    for (std::size_t mi = 0; mi < methods; ++mi) {
      try {
        RunOutcome out = run_one(cfg, inst, cfg.methods[mi], x1);
        out.trace.meta.seed = seed;
        slots[base + mi].outcome = std::move(out);
      } catch (const std::exception& e) {
        slots[base + mi].error = "trial " + std::to_string(t) + " " +
                                 cfg.methods[mi].name + ": " + e.what();
      }
    }
  };

  if (cfg.workers == 1 || cfg.trials == 1) {
    for (int t = 0; t < cfg.trials; ++t) run_trial(t);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1))
        run_trial(t);
    };
    const int nthreads = std::min(cfg.workers, cfg.trials);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult res;
  for (std::size_t mi = 0; mi < methods; ++mi) {
    res.summaries.push_back(
        summarize(cfg.methods[mi].name, slots, methods, mi, cfg.trials));
    res.curves.push_back(
        build_curves(cfg.methods[mi].name, slots, methods, mi, cfg.trials));
  }
  for (int t = 0; t < cfg.trials; ++t)
    for (std::size_t mi = 0; mi < methods; ++mi) {
      Slot& sl = slots[static_cast<std::size_t>(t) * methods + mi];
      if (!sl.error.empty()) res.errors.push_back(std::move(sl.error));
    }
  res.traces.resize(total);
  for (std::size_t i = 0; i < total; ++i)
    if (slots[i].outcome) res.traces[i] = std::move(slots[i].outcome->trace);

  if (!cfg.out_dir.empty()) write_outputs(cfg, res);
  return res;
}

}  // namespace ratiosplit
