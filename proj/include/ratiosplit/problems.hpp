#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ratiosplit/functions.hpp"

namespace ratiosplit {

// Deterministic splittable random streams. Each coefficient block of a
// generated instance draws from its own engine, seeded by mixing (seed,
// block index), so adding a block to a family never perturbs the draws of
// the existing ones. Draws are strictly inside the open interval.
class BlockRng {
 public:
  BlockRng(std::uint64_t seed, std::uint64_t block);

  double uniform(double lo, double hi);
  Vector uniform_vec(Index n, double lo, double hi);
  // Row-major fill: row 0 first, left to right.
  Matrix uniform_mat(Index rows, Index cols, double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

// minimize 0.5 <x, Qx> / <s, x>  over  {Ax = b} intersected with a huge box,
// Q = P^T P + k I (so the numerator is k-strongly convex), all raw entries
// drawn in (0, 1), m < k. The operator applies the affine projection first,
// then the box. feasibility(x) reports ||Ax - b||.
struct QuadraticLinearInstance {
  Index k;
  Index m;
  std::uint64_t seed;
  Matrix P;
  Vector s;
  Matrix A;
  Vector b;
  std::vector<std::string> notes;  // generation events (rank-deficient redraws)
  FractionalProgram program;
};

QuadraticLinearInstance gen_quadratic_linear(Index k, Index m, std::uint64_t seed);

// minimize (<c, x> + c0) / (a0 * prod_j x_j^{a_j})  over p two-sided funding
// constraints q_lo_l <= <b_l, x> <= q_hi_l plus a huge positive box. Two
// operator arrangements are built for the same data: `cyclic` sweeps the 2p
// halfspace projections in order then the box; `simultaneous` averages the
// 2p halfspace projections and then applies the box. feasibility(x) is the
// mean halfspace violation (see metric_fe_halfspaces).
struct CobbDouglasInstance {
  Index k;
  Index p;
  std::uint64_t seed;
  Vector c;
  double c0;
  Vector a_raw;  // exponent draws in (0, k) before normalization
  Vector a;      // a_raw / sum(a_raw), so sum(a) = 1
  double a0;
  Matrix B;  // p x k, row l is b_l
  Vector q_lo;
  Vector q_hi;
  FractionalProgram cyclic;
  FractionalProgram simultaneous;
};

CobbDouglasInstance gen_cobb_douglas(Index k, Index p, std::uint64_t seed);

// minimize sum_i (<c_i, x> + r_i) / (<d_i, x> + s_i)  over p halfspaces
// <a_l, x> <= b_l plus the box [0, 100]^k, one operator per component. The
// component count is equalized to max(m, p+1): missing numerators are padded
// with the zero function over the constant denominator 1, missing operators
// with the identity. Denominator bounds [N, M] are exact interval bounds of
// the g_i over the box.
struct SumLinearRatiosInstance {
  Index k;
  Index m;  // ratio count before padding
  Index p;  // halfspace count (the operator list has p+1 entries)
  std::uint64_t seed;
  Matrix C;   // m x k
  Vector r;   // m
  Matrix D;   // m x k
  Vector s;   // m
  Matrix Ah;  // p x k, halfspace normals
  Vector bh;  // p
  SumOfRatiosProgram program;
};

SumLinearRatiosInstance gen_sum_linear_ratios(Index k, Index m, Index p,
                                              std::uint64_t seed);

// Hand-built single-ratio instances with known optima stored on the program
// (optimum_x / optimum_theta):
//   quad_over_one_1d  f = x^2, g = 1, Fix T = [1, 2]; optimum (1, 1).
//   quad_over_x_1d    f = x^2, g = x, Fix T = [1, 2]; optimum (1, 1).
//   ratio_2d_grid     f = (x1-4)^2 + (x2-1)^2, g = 6 - x1 - 0.5 x2 over
//                     [0.5, 3]^2; optimum located by a dense 1e-3 grid scan
//                     at construction.
enum class AnalyticTag { QuadOverOne1D, QuadOverX1D, Ratio2DGrid };

const char* to_string(AnalyticTag t);
// Accepts the to_string names: quad_over_one_1d, quad_over_x_1d,
// ratio_2d_grid. Unknown names throw InvalidSpec.
AnalyticTag analytic_tag(const std::string& name);

FractionalProgram gen_analytic(AnalyticTag which);

// ---- Instance files ---------------------------------------------------------
//
// Versioned plain-text format, byte-exact round trip:
//
//   ratiosplit-instance v1
//   family <quadratic_linear|cobb_douglas|sum_linear_ratios>
//   seed <uint64>
//   dim <name> <positive int>          (one line per dimension)
//   scalar <name> <hexfloat>           (one line per scalar coefficient)
//   note <free text>                   (optional, generation events)
//   block <name> <rows> <cols>         (then `rows` lines of `cols` hexfloats)
//   end
//
// Coefficients are written with printf "%a" so values survive the round trip
// bitwise; programs are rebuilt from the blocks on read, never re-drawn.

enum class InstanceFamily { QuadraticLinear, CobbDouglas, SumLinearRatios };

const char* to_string(InstanceFamily f);
InstanceFamily instance_family(const std::string& name);

struct AnyInstance {
  InstanceFamily family;
  std::optional<QuadraticLinearInstance> quadratic_linear;
  std::optional<CobbDouglasInstance> cobb_douglas;
  std::optional<SumLinearRatiosInstance> sum_linear_ratios;
};

void write_instance(std::ostream& os, const QuadraticLinearInstance& inst);
void write_instance(std::ostream& os, const CobbDouglasInstance& inst);
void write_instance(std::ostream& os, const SumLinearRatiosInstance& inst);

AnyInstance read_instance(std::istream& is);

}  // namespace ratiosplit
