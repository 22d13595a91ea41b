#include "ratiosplit/problems.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "ratiosplit/metrics.hpp"

namespace ratiosplit {

// ---- BlockRng -----------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

BlockRng::BlockRng(std::uint64_t seed, std::uint64_t block)
    : engine_(splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (block + 1)))) {}

double BlockRng::uniform(double lo, double hi) {
  if (!(hi > lo)) throw InvalidSpec("rng: uniform interval is empty");
  // (bits >> 11) spans [0, 2^53); the half offset keeps both endpoints out.
  const double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  double v = lo + (hi - lo) * u;
  if (v <= lo) v = std::nextafter(lo, hi);
  if (v >= hi) v = std::nextafter(hi, lo);
  return v;
}

Vector BlockRng::uniform_vec(Index n, double lo, double hi) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
  return v;
}

Matrix BlockRng::uniform_mat(Index rows, Index cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
  }
  return m;
}

// ---- Quadratic over linear ------------------------------------------------------

namespace {

constexpr double kHugeBoxLo = 1e-8;
constexpr double kHugeBoxHi = 1e8;

QuadraticLinearInstance make_quadratic_linear(Index k, Index m, std::uint64_t seed,
                                              Matrix P, Vector s, Matrix A, Vector b,
                                              std::vector<std::string> notes) {
  Matrix Q = P.transpose() * P +
             static_cast<double>(k) * Matrix::Identity(k, k);
  auto numerator =
      SubdifferentiableFunction::quadratic_form(std::move(Q), static_cast<double>(k));
  auto denominator = SubdifferentiableFunction::linear(s, Curvature::Concave);
  auto op = FixedPointOperator::compose(
      {FixedPointOperator::affine(A, b), FixedPointOperator::box(k, kHugeBoxLo, kHugeBoxHi)});
  FractionalProgram prog(std::move(numerator), std::move(denominator), std::move(op),
                         kHugeBoxHi * s.sum());
  prog.feasibility = [A, b](const Vector& x) { return (A * x - b).norm(); };
  return QuadraticLinearInstance{k,           m,
                                 seed,        std::move(P),
                                 std::move(s), std::move(A),
                                 std::move(b), std::move(notes),
                                 std::move(prog)};
}

}  // namespace

QuadraticLinearInstance gen_quadratic_linear(Index k, Index m, std::uint64_t seed) {
  if (k < 1 || m < 1) throw InvalidSpec("quadratic_linear: dimensions must be positive");
  if (m >= k) throw InvalidSpec("quadratic_linear: needs m < k (underdetermined system)");
  std::vector<std::string> notes;
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t s_eff = seed + attempt;
    Matrix P = BlockRng(s_eff, 0).uniform_mat(k, k, 0.0, 1.0);
    Vector s = BlockRng(s_eff, 1).uniform_vec(k, 0.0, 1.0);
    Matrix A = BlockRng(s_eff, 2).uniform_mat(m, k, 0.0, 1.0);
    Vector b = BlockRng(s_eff, 3).uniform_vec(m, 0.0, 1.0);
    try {
      return make_quadratic_linear(k, m, seed, std::move(P), std::move(s), std::move(A),
                                   std::move(b), std::move(notes));
    } catch (const RankDeficient&) {
      if (attempt >= 100) throw;
      char msg[96];
      std::snprintf(msg, sizeof msg,
                    "rank-deficient A at seed %llu; redrew with seed %llu",
                    static_cast<unsigned long long>(s_eff),
                    static_cast<unsigned long long>(s_eff + 1));
      notes.push_back(msg);
    }
  }
}

// ---- Cobb-Douglas ----------------------------------------------------------------

namespace {

CobbDouglasInstance make_cobb_douglas(Index k, Index p, std::uint64_t seed, Vector c,
                                      double c0, Vector a_raw, double a0, Matrix B,
                                      Vector q_lo, Vector q_hi) {
  Vector a = a_raw / a_raw.sum();
  auto numerator = SubdifferentiableFunction::affine(c, c0, Curvature::Convex);
  auto denominator = SubdifferentiableFunction::cobb_douglas(a0, a);

  std::vector<FixedPointOperator> cuts;
  cuts.reserve(2 * static_cast<std::size_t>(p));
  for (Index l = 0; l < p; ++l) {
    cuts.push_back(FixedPointOperator::halfspace(-B.row(l).transpose(), -q_lo(l)));
  }
  for (Index l = 0; l < p; ++l) {
    cuts.push_back(FixedPointOperator::halfspace(B.row(l).transpose(), q_hi(l)));
  }
  auto box = FixedPointOperator::box(k, kHugeBoxLo, kHugeBoxHi);

  std::vector<FixedPointOperator> chain = cuts;
  chain.push_back(box);
  // sum(a) = 1, so the Cobb-Douglas maximum over the box is a0 * hi.
  const double M = a0 * kHugeBoxHi;
  FractionalProgram cyclic(numerator, denominator,
                           FixedPointOperator::compose(std::move(chain)), M);
  FractionalProgram simultaneous(
      std::move(numerator), std::move(denominator),
      FixedPointOperator::compose({FixedPointOperator::average(std::move(cuts)), box}), M);

  auto fe = [B, q_lo, q_hi](const Vector& x) {
    return metric_fe_halfspaces(B, q_lo, q_hi, x);
  };
  cyclic.feasibility = fe;
  simultaneous.feasibility = fe;

  return CobbDouglasInstance{k,
                             p,
                             seed,
                             std::move(c),
                             c0,
                             std::move(a_raw),
                             std::move(a),
                             a0,
                             std::move(B),
                             std::move(q_lo),
                             std::move(q_hi),
                             std::move(cyclic),
                             std::move(simultaneous)};
}

}  // namespace

CobbDouglasInstance gen_cobb_douglas(Index k, Index p, std::uint64_t seed) {
  if (k < 1 || p < 1) throw InvalidSpec("cobb_douglas: dimensions must be positive");
  Vector c = BlockRng(seed, 0).uniform_vec(k, 0.0, static_cast<double>(k));
  const double c0 = BlockRng(seed, 1).uniform(1.0, 10.0);
  Vector a_raw = BlockRng(seed, 2).uniform_vec(k, 0.0, static_cast<double>(k));
  const double a0 = BlockRng(seed, 3).uniform(1.0, 10.0);
  Matrix B = BlockRng(seed, 4).uniform_mat(p, k, 0.0, 1.0);
  BlockRng qrng(seed, 5);
  Vector q_lo(p), q_hi(p);
  for (Index l = 0; l < p; ++l) {
    const double bnorm = B.row(l).norm();
    q_lo(l) = qrng.uniform(0.0, 25.0 * bnorm);
    q_hi(l) = qrng.uniform(75.0 * bnorm, 100.0 * bnorm);
  }
  return make_cobb_douglas(k, p, seed, std::move(c), c0, std::move(a_raw), a0,
                           std::move(B), std::move(q_lo), std::move(q_hi));
}

// ---- Sum of linear ratios --------------------------------------------------------

namespace {

SumLinearRatiosInstance make_sum_linear_ratios(Index k, Index m, Index p,
                                               std::uint64_t seed, Matrix C, Vector r,
                                               Matrix D, Vector s, Matrix Ah, Vector bh) {
  const Index total = std::max(m, p + 1);
  SumOfRatiosProgram prog;
  prog.components.reserve(static_cast<std::size_t>(total));
  double N = std::numeric_limits<double>::infinity();
  double M = 0.0;
  for (Index i = 0; i < total; ++i) {
    const bool real_ratio = i < m;
    auto num = real_ratio
                   ? SubdifferentiableFunction::affine(C.row(i).transpose(), r(i),
                                                       Curvature::Convex)
                   : SubdifferentiableFunction::zero(k);
    auto den = real_ratio
                   ? SubdifferentiableFunction::affine(D.row(i).transpose(), s(i),
                                                       Curvature::Concave)
                   : SubdifferentiableFunction::affine(Vector::Zero(k), 1.0,
                                                       Curvature::Concave);
    // d_ij > 0 over [0, 100]^k makes these interval bounds exact.
    const double g_lo = real_ratio ? s(i) : 1.0;
    const double g_hi = real_ratio ? s(i) + 100.0 * D.row(i).sum() : 1.0;
    N = std::min(N, g_lo);
    M = std::max(M, g_hi);
    auto op = i < p ? FixedPointOperator::halfspace(Ah.row(i).transpose(), bh(i))
                    : (i == p ? FixedPointOperator::box(k, 0.0, 100.0)
                              : FixedPointOperator::identity(k));
    prog.components.push_back({std::move(num), std::move(den), std::move(op)});
  }
  prog.denom_lower_bound = N;
  prog.denom_upper_bound = M;
  return SumLinearRatiosInstance{k,           m,
                                 p,           seed,
                                 std::move(C), std::move(r),
                                 std::move(D), std::move(s),
                                 std::move(Ah), std::move(bh),
                                 std::move(prog)};
}

}  // namespace

SumLinearRatiosInstance gen_sum_linear_ratios(Index k, Index m, Index p,
                                              std::uint64_t seed) {
  if (k < 1 || m < 1 || p < 1) {
    throw InvalidSpec("sum_linear_ratios: dimensions must be positive");
  }
  Matrix C = BlockRng(seed, 0).uniform_mat(m, k, 0.1, 10.0);
  Vector r = BlockRng(seed, 1).uniform_vec(m, 0.0, 1.0);
  Matrix D = BlockRng(seed, 2).uniform_mat(m, k, 0.1, 10.0);
  Vector s = BlockRng(seed, 3).uniform_vec(m, 0.0, 1.0);
  Matrix Ah = BlockRng(seed, 4).uniform_mat(p, k, -10.0, 10.0);
  Vector bh = BlockRng(seed, 5).uniform_vec(p, 0.0, 10.0);
  return make_sum_linear_ratios(k, m, p, seed, std::move(C), std::move(r), std::move(D),
                                std::move(s), std::move(Ah), std::move(bh));
}

// ---- Analytic instances ----------------------------------------------------------

const char* to_string(AnalyticTag t) {
  switch (t) {
    case AnalyticTag::QuadOverOne1D:
      return "quad_over_one_1d";
    case AnalyticTag::QuadOverX1D:
      return "quad_over_x_1d";
    case AnalyticTag::Ratio2DGrid:
      return "ratio_2d_grid";
  }
  return "unknown";
}

AnalyticTag analytic_tag(const std::string& name) {
  if (name == "quad_over_one_1d") return AnalyticTag::QuadOverOne1D;
  if (name == "quad_over_x_1d") return AnalyticTag::QuadOverX1D;
  if (name == "ratio_2d_grid") return AnalyticTag::Ratio2DGrid;
  throw InvalidSpec("analytic: unknown instance tag '" + name + "'");
}

namespace {

FractionalProgram make_quad_over_one() {
  FractionalProgram p(
      SubdifferentiableFunction::quadratic_form(Matrix::Constant(1, 1, 2.0), 2.0),
      SubdifferentiableFunction::affine(Vector::Zero(1), 1.0, Curvature::Concave),
      FixedPointOperator::box(1, 1.0, 2.0), 1.0);
  p.optimum_x = Vector::Ones(1);
  p.optimum_theta = 1.0;
  return p;
}

FractionalProgram make_quad_over_x() {
  FractionalProgram p(
      SubdifferentiableFunction::quadratic_form(Matrix::Constant(1, 1, 2.0), 2.0),
      SubdifferentiableFunction::linear(Vector::Ones(1), Curvature::Concave),
      FixedPointOperator::box(1, 1.0, 2.0), 2.0);
  p.optimum_x = Vector::Ones(1);
  p.optimum_theta = 1.0;
  return p;
}

FractionalProgram make_ratio_2d() {
  // f = (x1-4)^2 + (x2-1)^2 = 0.5 <x, 2I x> + <(-8,-2), x> + 17
  // g = 6 - x1 - 0.5 x2, positive on [0.5, 3]^2 (min 1.5, max 5.25).
  Vector s(2), gs(2);
  s << -8.0, -2.0;
  gs << -1.0, -0.5;
  FractionalProgram p(
      SubdifferentiableFunction::quadratic(2.0 * Matrix::Identity(2, 2), s, 17.0, 2.0),
      SubdifferentiableFunction::affine(gs, 6.0, Curvature::Concave),
      FixedPointOperator::box(2, 0.5, 3.0), 5.25);

  // Dense scan locates the stored optimum; the objective is restated in
  // scalar form here so the scan is cheap.
  const double lo = 0.5, hi = 3.0, res = 1e-3;
  const long steps = std::lround((hi - lo) / res);
  double best = std::numeric_limits<double>::infinity();
  double bx1 = lo, bx2 = lo;
  for (long i = 0; i <= steps; ++i) {
    const double x1 = lo + res * static_cast<double>(i);
    const double f1 = (x1 - 4.0) * (x1 - 4.0);
    for (long j = 0; j <= steps; ++j) {
      const double x2 = lo + res * static_cast<double>(j);
      const double v =
          (f1 + (x2 - 1.0) * (x2 - 1.0)) / (6.0 - x1 - 0.5 * x2);
      if (v < best) {
        best = v;
        bx1 = x1;
        bx2 = x2;
      }
    }
  }
  Vector opt(2);
  opt << bx1, bx2;
  p.optimum_x = opt;
  p.optimum_theta = best;
  return p;
}

}  // namespace

FractionalProgram gen_analytic(AnalyticTag which) {
  switch (which) {
    case AnalyticTag::QuadOverOne1D:
      return make_quad_over_one();
    case AnalyticTag::QuadOverX1D:
      return make_quad_over_x();
    case AnalyticTag::Ratio2DGrid:
      return make_ratio_2d();
  }
  throw InvalidSpec("analytic: unknown instance tag");
}

// ---- Serialization ---------------------------------------------------------------

const char* to_string(InstanceFamily f) {
  switch (f) {
    case InstanceFamily::QuadraticLinear:
      return "quadratic_linear";
    case InstanceFamily::CobbDouglas:
      return "cobb_douglas";
    case InstanceFamily::SumLinearRatios:
      return "sum_linear_ratios";
  }
  return "unknown";
}

InstanceFamily instance_family(const std::string& name) {
  if (name == "quadratic_linear") return InstanceFamily::QuadraticLinear;
  if (name == "cobb_douglas") return InstanceFamily::CobbDouglas;
  if (name == "sum_linear_ratios") return InstanceFamily::SumLinearRatios;
  throw InvalidSpec("instance: unknown family '" + name + "'");
}

namespace {

constexpr const char* kMagic = "ratiosplit-instance v1";

std::string hexfloat(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void write_block(std::ostream& os, const char* name, const Matrix& m) {
  os << "block " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << hexfloat(m(i, j));
    }
    os << '\n';
  }
}

void write_block(std::ostream& os, const char* name, const Vector& v) {
  write_block(os, name, Matrix(v.transpose()));
}

void write_header(std::ostream& os, InstanceFamily f, std::uint64_t seed) {
  os << kMagic << '\n' << "family " << to_string(f) << '\n' << "seed " << seed << '\n';
}

void write_dim(std::ostream& os, const char* name, Index v) {
  os << "dim " << name << ' ' << v << '\n';
}

void write_scalar(std::ostream& os, const char* name, double v) {
  os << "scalar " << name << ' ' << hexfloat(v) << '\n';
}

// Parsed file content before family dispatch.
struct RawInstance {
  InstanceFamily family = InstanceFamily::QuadraticLinear;
  std::uint64_t seed = 0;
  std::map<std::string, Index> dims;
  std::map<std::string, double> scalars;
  std::map<std::string, Matrix> blocks;
  std::vector<std::string> notes;

  Index dim(const std::string& name) const {
    auto it = dims.find(name);
    if (it == dims.end()) throw InvalidSpec("instance: missing dim " + name);
    return it->second;
  }
  double scalar(const std::string& name) const {
    auto it = scalars.find(name);
    if (it == scalars.end()) throw InvalidSpec("instance: missing scalar " + name);
    return it->second;
  }
  const Matrix& block(const std::string& name, Index rows, Index cols) const {
    auto it = blocks.find(name);
    if (it == blocks.end()) throw InvalidSpec("instance: missing block " + name);
    if (it->second.rows() != rows || it->second.cols() != cols) {
      throw InvalidSpec("instance: block " + name + " has the wrong shape");
    }
    return it->second;
  }
  Vector vec(const std::string& name, Index n) const {
    return block(name, 1, n).row(0).transpose();
  }
};

double parse_hexfloat(const std::string& tok) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + tok.size()) {
    throw InvalidSpec("instance: bad float token '" + tok + "'");
  }
  return v;
}

RawInstance parse_instance(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMagic) {
    throw InvalidSpec("instance: missing or unsupported format header");
  }
  RawInstance raw;
  bool have_family = false, ended = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "family") {
      std::string name;
      ls >> name;
      raw.family = instance_family(name);
      have_family = true;
    } else if (key == "seed") {
      if (!(ls >> raw.seed)) throw InvalidSpec("instance: bad seed line");
    } else if (key == "dim") {
      std::string name;
      long long v = 0;
      if (!(ls >> name >> v) || v < 1) throw InvalidSpec("instance: bad dim line");
      raw.dims[name] = static_cast<Index>(v);
    } else if (key == "scalar") {
      std::string name, tok;
      if (!(ls >> name >> tok)) throw InvalidSpec("instance: bad scalar line");
      raw.scalars[name] = parse_hexfloat(tok);
    } else if (key == "note") {
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
      raw.notes.push_back(rest);
    } else if (key == "block") {
      std::string name;
      long long rows = 0, cols = 0;
      if (!(ls >> name >> rows >> cols) || rows < 1 || cols < 1) {
        throw InvalidSpec("instance: bad block line");
      }
      Matrix m(rows, cols);
      std::string tok;
      for (long long i = 0; i < rows; ++i) {
        if (!std::getline(is, line)) throw InvalidSpec("instance: truncated block " + name);
        std::istringstream row(line);
        for (long long j = 0; j < cols; ++j) {
          if (!(row >> tok)) throw InvalidSpec("instance: short row in block " + name);
          m(i, j) = parse_hexfloat(tok);
        }
      }
      raw.blocks[name] = std::move(m);
    } else if (key == "end") {
      ended = true;
      break;
    } else {
      throw InvalidSpec("instance: unknown line '" + key + "'");
    }
  }
  if (!ended) throw InvalidSpec("instance: missing end marker");
  if (!have_family) throw InvalidSpec("instance: missing family");
  return raw;
}

}  // namespace

void write_instance(std::ostream& os, const QuadraticLinearInstance& inst) {
  write_header(os, InstanceFamily::QuadraticLinear, inst.seed);
  write_dim(os, "k", inst.k);
  write_dim(os, "m", inst.m);
  for (const auto& n : inst.notes) os << "note " << n << '\n';
  write_block(os, "P", inst.P);
  write_block(os, "s", inst.s);
  write_block(os, "A", inst.A);
  write_block(os, "b", inst.b);
  os << "end\n";
}

void write_instance(std::ostream& os, const CobbDouglasInstance& inst) {
  write_header(os, InstanceFamily::CobbDouglas, inst.seed);
  write_dim(os, "k", inst.k);
  write_dim(os, "p", inst.p);
  write_scalar(os, "c0", inst.c0);
  write_scalar(os, "a0", inst.a0);
  write_block(os, "c", inst.c);
  write_block(os, "a_raw", inst.a_raw);
  write_block(os, "B", inst.B);
  write_block(os, "q_lo", inst.q_lo);
  write_block(os, "q_hi", inst.q_hi);
  os << "end\n";
}

void write_instance(std::ostream& os, const SumLinearRatiosInstance& inst) {
  write_header(os, InstanceFamily::SumLinearRatios, inst.seed);
  write_dim(os, "k", inst.k);
  write_dim(os, "m", inst.m);
  write_dim(os, "p", inst.p);
  write_block(os, "C", inst.C);
  write_block(os, "r", inst.r);
  write_block(os, "D", inst.D);
  write_block(os, "s", inst.s);
  write_block(os, "A", inst.Ah);
  write_block(os, "b", inst.bh);
  os << "end\n";
}

AnyInstance read_instance(std::istream& is) {
  RawInstance raw = parse_instance(is);
  AnyInstance out{raw.family, std::nullopt, std::nullopt, std::nullopt};
  switch (raw.family) {
    case InstanceFamily::QuadraticLinear: {
      const Index k = raw.dim("k"), m = raw.dim("m");
      out.quadratic_linear.emplace(make_quadratic_linear(
          k, m, raw.seed, raw.block("P", k, k), raw.vec("s", k), raw.block("A", m, k),
          raw.vec("b", m), std::move(raw.notes)));
      break;
    }
    case InstanceFamily::CobbDouglas: {
      const Index k = raw.dim("k"), p = raw.dim("p");
      out.cobb_douglas.emplace(make_cobb_douglas(
          k, p, raw.seed, raw.vec("c", k), raw.scalar("c0"), raw.vec("a_raw", k),
          raw.scalar("a0"), raw.block("B", p, k), raw.vec("q_lo", p), raw.vec("q_hi", p)));
      break;
    }
    case InstanceFamily::SumLinearRatios: {
      const Index k = raw.dim("k"), m = raw.dim("m"), p = raw.dim("p");
      out.sum_linear_ratios.emplace(make_sum_linear_ratios(
          k, m, p, raw.seed, raw.block("C", m, k), raw.vec("r", m), raw.block("D", m, k),
          raw.vec("s", m), raw.block("A", p, k), raw.vec("b", p)));
      break;
    }
  }
  return out;
}

}  // namespace ratiosplit
