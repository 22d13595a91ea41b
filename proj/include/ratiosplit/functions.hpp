#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ratiosplit/operators.hpp"
#include "ratiosplit/types.hpp"

namespace ratiosplit {

enum class FunctionKind {
  Linear,         // <s, x>
  Affine,         // <s, x> + c
  Quadratic,      // 0.5 <x, Q x> + <s, x> + c
  CobbDouglas,    // a0 * prod_j x_j^{a_j}, positive orthant only
  NegCobbDouglas, // -a0 * prod_j x_j^{a_j}
};

enum class Curvature { Convex, StronglyConvex, Concave };

// Convex or concave function with a value / subgradient oracle.
//
// Sign convention for concave instances: value(x) returns the function's own
// value, while subgradient(x) returns an element of the subdifferential of
// the NEGATION. That is exactly the h' = (-g)' vector the splitting updates
// consume for a denominator g, so solvers never negate anything themselves.
class SubdifferentiableFunction {
 public:
  static SubdifferentiableFunction linear(Vector s, Curvature c = Curvature::Convex);
  static SubdifferentiableFunction affine(Vector s, double c,
                                          Curvature curv = Curvature::Convex);

  // 0.5 <x, Q x> + <s, x> + c with Q symmetrized on input. Pass sigma when a
  // strong-convexity modulus is known (e.g. Q = P^T P + k I has sigma >= k);
  // otherwise the smallest eigenvalue is computed. Q must be positive
  // semidefinite.
  static SubdifferentiableFunction quadratic(Matrix Q, Vector s, double c,
                                             std::optional<double> sigma = std::nullopt);
  static SubdifferentiableFunction quadratic_form(Matrix Q,
                                                  std::optional<double> sigma = std::nullopt);

  // a0 * prod x_j^{a_j} as a concave function (a0 > 0, a_j > 0, sum a_j <= 1).
  // subgradient() yields the gradient of the negation, per the convention
  // above. Evaluation off the open positive orthant throws EvalDomainError.
  static SubdifferentiableFunction cobb_douglas(double a0, Vector a);

  // -a0 * prod x_j^{a_j} as a convex function on the positive orthant.
  static SubdifferentiableFunction neg_cobb_douglas(double a0, Vector a);

  // Constant zero; convex. Used to pad sum-of-ratios numerators.
  static SubdifferentiableFunction zero(Index dim);

  double value(const Vector& x) const;
  Vector subgradient(const Vector& x) const;

  FunctionKind kind() const;
  Curvature curvature() const;
  // Strong convexity modulus; 0 unless curvature() == StronglyConvex.
  double strong_modulus() const;
  Index dim() const;

  struct Impl;

 private:
  explicit SubdifferentiableFunction(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

// min f(x)/g(x) over Fix T: convex nonnegative numerator, concave positive
// denominator, fixed-point constraint operator.
struct FractionalProgram {
  FractionalProgram(SubdifferentiableFunction numerator_, SubdifferentiableFunction denominator_,
                    FixedPointOperator op_, double denom_upper_bound_ = 0.0)
      : numerator(std::move(numerator_)),
        denominator(std::move(denominator_)),
        op(std::move(op_)),
        denom_upper_bound(denom_upper_bound_) {}

  SubdifferentiableFunction numerator;
  SubdifferentiableFunction denominator;
  FixedPointOperator op;

  // Upper bound M for the denominator on Im T; diagnostic metadata only.
  double denom_upper_bound = 0.0;

  // Instance-specific feasibility error (e.g. ||Ax - b||). Falls back to
  // residual(op, x) when unset.
  std::function<double(const Vector&)> feasibility;

  // Known optimum, present on hand-built instances.
  std::optional<Vector> optimum_x;
  std::optional<double> optimum_theta;

  Index dim() const { return op.dim(); }
};

struct RatioComponent {
  SubdifferentiableFunction numerator;
  SubdifferentiableFunction denominator;
  FixedPointOperator op;
};

// min sum_i f_i(x)/g_i(x) over the intersection of Fix T_i.
struct SumOfRatiosProgram {
  std::vector<RatioComponent> components;

  // Bounds 0 < N <= g_i <= M on the common image; diagnostic metadata only.
  double denom_lower_bound = 0.0;
  double denom_upper_bound = 0.0;

  std::function<double(const Vector&)> feasibility;

  std::optional<Vector> optimum_x;
  std::optional<double> optimum_theta;

  Index dim() const { return components.front().op.dim(); }
  Index m() const { return static_cast<Index>(components.size()); }
};

// Throws InvalidSpec on dimension or curvature-class violations.
void validate(const FractionalProgram& p);
void validate(const SumOfRatiosProgram& p);

// f(x)/g(x); throws DenominatorViolation when g(x) <= 0. Never clamps.
double ratio_value(const FractionalProgram& p, const Vector& x);

// sum_i f_i(x)/g_i(x) with per-component positivity checks.
double sum_ratio_value(const SumOfRatiosProgram& p, const Vector& x);

// The individual theta_i = f_i(x)/g_i(x), checked like sum_ratio_value.
std::vector<double> component_ratios(const SumOfRatiosProgram& p, const Vector& x);

double feasibility_value(const FractionalProgram& p, const Vector& x);
double feasibility_value(const SumOfRatiosProgram& p, const Vector& x);

}  // namespace ratiosplit
