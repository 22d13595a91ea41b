#pragma once

#include <memory>
#include <vector>

#include "ratiosplit/types.hpp"

namespace ratiosplit {

enum class OperatorKind {
  Identity,
  HalfspaceProjection,
  HyperplaneProjection,
  AffineProjection,
  BoxProjection,
  BallProjection,
  Composition,
  ConvexCombination,
};

// A fixed-point operator T: R^k -> R^k together with the strong
// quasi-nonexpansiveness modulus used by the descent diagnostics.
//
// Instances are immutable after construction and cheap to copy; copies share
// the underlying (read-only) parameter blocks, so concurrent apply() calls
// are safe.
//
// Moduli: every metric projection is a cutter, i.e. 1-SQNE, so single
// projections carry modulus 1 exactly. Compositions carry
// (sum_i 1/rho_i)^-1 and convex combinations carry min_i rho_i; both are
// conservative lower bounds, not tight values.
class FixedPointOperator {
 public:
  static FixedPointOperator identity(Index dim);

  // P_{<a,x> <= b}. Throws InvalidSpec if a == 0.
  static FixedPointOperator halfspace(Vector a, double b);

  // P_{<a,x> = b}. Throws InvalidSpec if a == 0.
  static FixedPointOperator hyperplane(Vector a, double b);

  // P_{Ax = b} via x - A^T (A A^T)^-1 (Ax - b). The SPD factorization of
  // A A^T is computed once here; apply() only triangular-solves. Throws
  // RankDeficient when a pivot falls below 1e-12 times the largest pivot.
  static FixedPointOperator affine(Matrix A, Vector b);

  // Componentwise clamp onto [lo, hi]; entries of lo/hi may be +-infinity.
  // Throws InvalidSpec if lo[i] > hi[i] for some i.
  static FixedPointOperator box(Vector lo, Vector hi);
  static FixedPointOperator box(Index dim, double lo, double hi);

  // Projection onto the closed ball B(center, radius), radius > 0.
  static FixedPointOperator ball(Vector center, double radius);

  // apply(x) = ops[last](...(ops[0](x))...); written P_m ... P_1 in operator
  // notation, so ops are listed innermost first.
  static FixedPointOperator compose(std::vector<FixedPointOperator> ops);

  // apply(x) = sum_i w_i ops[i](x); weights must be positive and sum to 1
  // within 1e-12. Equal weights if `weights` is empty.
  static FixedPointOperator average(std::vector<FixedPointOperator> ops,
                                    std::vector<double> weights = {});

  Vector apply(const Vector& x) const;
  Vector operator()(const Vector& x) const { return apply(x); }

  Index dim() const;
  OperatorKind kind() const;
  double sqne_modulus() const;
  // True when sqne_modulus() is exact (single projections / identity) rather
  // than a conservative composite bound.
  bool modulus_exact() const;

  // Children of a composition / convex combination; empty otherwise.
  const std::vector<FixedPointOperator>& children() const;

  struct Impl;

 private:
  explicit FixedPointOperator(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

// ||T(x) - x||. Zero iff x is a fixed point (up to arithmetic noise).
double residual(const FixedPointOperator& T, const Vector& x);

}  // namespace ratiosplit
