#include "ratiosplit/functions.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <utility>

namespace ratiosplit {

struct SubdifferentiableFunction::Impl {
  FunctionKind kind;
  Curvature curvature = Curvature::Convex;
  double sigma = 0.0;
  Index dim = 0;

  Vector s;      // linear / affine coefficient, quadratic linear term
  double c = 0;  // offset
  Matrix Q;      // quadratic term
  double a0 = 0; // Cobb-Douglas scale
  Vector a;      // Cobb-Douglas exponents

  // a0 * prod x_j^{a_j}; domain check shared by both Cobb-Douglas kinds.
  double cd_value(const Vector& x) const {
    double log_sum = 0.0;
    for (Index j = 0; j < dim; ++j) {
      if (!(x[j] > 0.0)) {
        throw EvalDomainError("cobb_douglas: coordinate " + std::to_string(j) +
                              " not strictly positive");
      }
      log_sum += a[j] * std::log(x[j]);
    }
    return a0 * std::exp(log_sum);
  }

  double value(const Vector& x) const {
    switch (kind) {
      case FunctionKind::Linear:
        return s.dot(x);
      case FunctionKind::Affine:
        return s.dot(x) + c;
      case FunctionKind::Quadratic:
        return 0.5 * x.dot(Q * x) + s.dot(x) + c;
      case FunctionKind::CobbDouglas:
        return cd_value(x);
      case FunctionKind::NegCobbDouglas:
        return -cd_value(x);
    }
    throw std::logic_error("unreachable function kind");
  }

  Vector subgradient(const Vector& x) const {
    const double sign = curvature == Curvature::Concave ? -1.0 : 1.0;
    switch (kind) {
      case FunctionKind::Linear:
      case FunctionKind::Affine:
        return sign * s;
      case FunctionKind::Quadratic:
        return Q * x + s;
      case FunctionKind::CobbDouglas: {
        // gradient of -g; g's own gradient is g(x) * a_j / x_j
        const double g = cd_value(x);
        return (-g) * a.cwiseQuotient(x);
      }
      case FunctionKind::NegCobbDouglas: {
        const double g = cd_value(x);
        return (-g) * a.cwiseQuotient(x);
      }
    }
    throw std::logic_error("unreachable function kind");
  }
};

SubdifferentiableFunction::SubdifferentiableFunction(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

SubdifferentiableFunction SubdifferentiableFunction::linear(Vector s, Curvature c) {
  if (s.size() == 0) throw InvalidSpec("linear: empty coefficient vector");
  if (c == Curvature::StronglyConvex) {
    throw InvalidSpec("linear: cannot be strongly convex");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionKind::Linear;
  impl->curvature = c;
  impl->dim = s.size();
  impl->s = std::move(s);
  return SubdifferentiableFunction(std::move(impl));
}

SubdifferentiableFunction SubdifferentiableFunction::affine(Vector s, double c,
                                                            Curvature curv) {
  if (s.size() == 0) throw InvalidSpec("affine: empty coefficient vector");
  if (curv == Curvature::StronglyConvex) {
    throw InvalidSpec("affine: cannot be strongly convex");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionKind::Affine;
  impl->curvature = curv;
  impl->dim = s.size();
  impl->s = std::move(s);
  impl->c = c;
  return SubdifferentiableFunction(std::move(impl));
}

SubdifferentiableFunction SubdifferentiableFunction::quadratic(Matrix Q, Vector s, double c,
                                                               std::optional<double> sigma) {
  if (Q.rows() == 0 || Q.rows() != Q.cols()) throw InvalidSpec("quadratic: Q must be square");
  if (s.size() != Q.rows()) throw InvalidSpec("quadratic: linear term dimension mismatch");
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionKind::Quadratic;
  impl->dim = Q.rows();
  impl->Q = 0.5 * (Q + Q.transpose());
  impl->s = std::move(s);
  impl->c = c;
  double sig;
  if (sigma) {
    sig = *sigma;
    if (sig < 0.0) throw InvalidSpec("quadratic: negative strong-convexity modulus");
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(impl->Q, Eigen::EigenvaluesOnly);
    sig = es.eigenvalues().minCoeff();
    if (sig < -1e-10 * std::max(1.0, impl->Q.norm())) {
      throw InvalidSpec("quadratic: Q is not positive semidefinite");
    }
    sig = std::max(0.0, sig);
  }
  impl->sigma = sig;
  impl->curvature = sig > 0.0 ? Curvature::StronglyConvex : Curvature::Convex;
  return SubdifferentiableFunction(std::move(impl));
}

SubdifferentiableFunction SubdifferentiableFunction::quadratic_form(
    Matrix Q, std::optional<double> sigma) {
  Vector s = Vector::Zero(Q.rows());
  return quadratic(std::move(Q), std::move(s), 0.0, sigma);
}

namespace {

void check_cd_params(double a0, const Vector& a) {
  if (a.size() == 0) throw InvalidSpec("cobb_douglas: empty exponent vector");
  if (!(a0 > 0.0)) throw InvalidSpec("cobb_douglas: scale a0 must be positive");
  double sum = 0.0;
  for (Index j = 0; j < a.size(); ++j) {
    if (!(a[j] > 0.0)) throw InvalidSpec("cobb_douglas: exponents must be positive");
    sum += a[j];
  }
  if (sum > 1.0 + 1e-9) {
    throw InvalidSpec("cobb_douglas: exponents must sum to at most 1 for concavity");
  }
}

}  // namespace

SubdifferentiableFunction SubdifferentiableFunction::cobb_douglas(double a0, Vector a) {
  check_cd_params(a0, a);
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionKind::CobbDouglas;
  impl->curvature = Curvature::Concave;
  impl->dim = a.size();
  impl->a0 = a0;
  impl->a = std::move(a);
  return SubdifferentiableFunction(std::move(impl));
}

SubdifferentiableFunction SubdifferentiableFunction::neg_cobb_douglas(double a0, Vector a) {
  check_cd_params(a0, a);
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionKind::NegCobbDouglas;
  impl->curvature = Curvature::Convex;
  impl->dim = a.size();
  impl->a0 = a0;
  impl->a = std::move(a);
  return SubdifferentiableFunction(std::move(impl));
}

SubdifferentiableFunction SubdifferentiableFunction::zero(Index dim) {
  return linear(Vector::Zero(dim), Curvature::Convex);
}

double SubdifferentiableFunction::value(const Vector& x) const {
  if (x.size() != impl_->dim) throw InvalidSpec("value: dimension mismatch");
  return impl_->value(x);
}

Vector SubdifferentiableFunction::subgradient(const Vector& x) const {
  if (x.size() != impl_->dim) throw InvalidSpec("subgradient: dimension mismatch");
  return impl_->subgradient(x);
}

FunctionKind SubdifferentiableFunction::kind() const { return impl_->kind; }
Curvature SubdifferentiableFunction::curvature() const { return impl_->curvature; }
double SubdifferentiableFunction::strong_modulus() const { return impl_->sigma; }
Index SubdifferentiableFunction::dim() const { return impl_->dim; }

void validate(const FractionalProgram& p) {
  if (p.numerator.dim() != p.op.dim() || p.denominator.dim() != p.op.dim()) {
    throw InvalidSpec("program: function/operator dimension mismatch");
  }
  if (p.numerator.curvature() == Curvature::Concave) {
    throw InvalidSpec("program: numerator must be convex");
  }
  if (p.denominator.curvature() != Curvature::Concave) {
    throw InvalidSpec("program: denominator must be concave");
  }
}

void validate(const SumOfRatiosProgram& p) {
  if (p.components.empty()) throw InvalidSpec("program: needs at least one component");
  const Index k = p.components.front().op.dim();
  for (const auto& comp : p.components) {
    if (comp.op.dim() != k || comp.numerator.dim() != k || comp.denominator.dim() != k) {
      throw InvalidSpec("program: component dimension mismatch");
    }
    if (comp.numerator.curvature() == Curvature::Concave) {
      throw InvalidSpec("program: component numerators must be convex");
    }
    if (comp.denominator.curvature() != Curvature::Concave) {
      throw InvalidSpec("program: component denominators must be concave");
    }
  }
}

double ratio_value(const FractionalProgram& p, const Vector& x) {
  const double g = p.denominator.value(x);
  if (!(g > 0.0)) throw DenominatorViolation(g, -1, x);
  return p.numerator.value(x) / g;
}

double sum_ratio_value(const SumOfRatiosProgram& p, const Vector& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.components.size(); ++i) {
    const double g = p.components[i].denominator.value(x);
    if (!(g > 0.0)) throw DenominatorViolation(g, static_cast<int>(i), x);
    total += p.components[i].numerator.value(x) / g;
  }
  return total;
}

std::vector<double> component_ratios(const SumOfRatiosProgram& p, const Vector& x) {
  std::vector<double> thetas(p.components.size());
  for (std::size_t i = 0; i < p.components.size(); ++i) {
    const double g = p.components[i].denominator.value(x);
    if (!(g > 0.0)) throw DenominatorViolation(g, static_cast<int>(i), x);
    thetas[i] = p.components[i].numerator.value(x) / g;
  }
  return thetas;
}

double feasibility_value(const FractionalProgram& p, const Vector& x) {
  if (p.feasibility) return p.feasibility(x);
  return residual(p.op, x);
}

double feasibility_value(const SumOfRatiosProgram& p, const Vector& x) {
  if (p.feasibility) return p.feasibility(x);
  double worst = 0.0;
  for (const auto& comp : p.components) worst = std::max(worst, residual(comp.op, x));
  return worst;
}

}  // namespace ratiosplit
