#include "ratiosplit/operators.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <utility>

namespace ratiosplit {

namespace {

void check_dim(const char* who, Index expected, Index got) {
  if (expected != got) {
    throw InvalidSpec(std::string(who) + ": expected dimension " +
                      std::to_string(expected) + ", got " + std::to_string(got));
  }
}

}  // namespace

struct FixedPointOperator::Impl {
  OperatorKind kind;
  Index dim = 0;
  double modulus = 1.0;
  bool modulus_exact = true;

  // Halfspace / hyperplane: a, b, 1/||a||^2.
  Vector a;
  double b = 0.0;
  double inv_a_sq = 0.0;

  // Affine set: A, rhs, cached LDLT of A A^T.
  Matrix A;
  Vector rhs;
  Eigen::LDLT<Matrix> ldlt;

  // Box.
  Vector lo, hi;

  // Ball.
  Vector center;
  double radius = 0.0;

  // Composite.
  std::vector<FixedPointOperator> children;
  std::vector<double> weights;

  Vector apply(const Vector& x) const {
    switch (kind) {
      case OperatorKind::Identity:
        return x;
      case OperatorKind::HalfspaceProjection: {
        const double viol = a.dot(x) - b;
        if (viol <= 0.0) return x;
        return x - (viol * inv_a_sq) * a;
      }
      case OperatorKind::HyperplaneProjection:
        return x - ((a.dot(x) - b) * inv_a_sq) * a;
      case OperatorKind::AffineProjection:
        return x - A.transpose() * ldlt.solve(A * x - rhs);
      case OperatorKind::BoxProjection:
        return x.cwiseMax(lo).cwiseMin(hi);
      case OperatorKind::BallProjection: {
        Vector d = x - center;
        const double n = d.norm();
        if (n <= radius) return x;
        return center + (radius / n) * d;
      }
      case OperatorKind::Composition: {
        Vector y = x;
        for (const auto& op : children) y = op.apply(y);
        return y;
      }
      case OperatorKind::ConvexCombination: {
        Vector y = weights[0] * children[0].apply(x);
        for (std::size_t i = 1; i < children.size(); ++i) {
          y += weights[i] * children[i].apply(x);
        }
        return y;
      }
    }
    throw std::logic_error("unreachable operator kind");
  }
};

FixedPointOperator::FixedPointOperator(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

FixedPointOperator FixedPointOperator::identity(Index dim) {
  if (dim <= 0) throw InvalidSpec("identity: dimension must be positive");
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::Identity;
  impl->dim = dim;
  return FixedPointOperator(std::move(impl));
}

FixedPointOperator FixedPointOperator::halfspace(Vector a, double b) {
  const double asq = a.squaredNorm();
  if (a.size() == 0 || asq == 0.0) {
    throw InvalidSpec("halfspace: normal vector must be nonzero");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::HalfspaceProjection;
  impl->dim = a.size();
  impl->a = std::move(a);
  impl->b = b;
  impl->inv_a_sq = 1.0 / asq;
  return FixedPointOperator(std::move(impl));
}

FixedPointOperator FixedPointOperator::hyperplane(Vector a, double b) {
  const double asq = a.squaredNorm();
  if (a.size() == 0 || asq == 0.0) {
    throw InvalidSpec("hyperplane: normal vector must be nonzero");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::HyperplaneProjection;
  impl->dim = a.size();
  impl->a = std::move(a);
  impl->b = b;
  impl->inv_a_sq = 1.0 / asq;
  return FixedPointOperator(std::move(impl));
}

FixedPointOperator FixedPointOperator::affine(Matrix A, Vector b) {
  if (A.rows() == 0 || A.cols() == 0) throw InvalidSpec("affine: A must be nonempty");
  check_dim("affine: rhs rows", A.rows(), b.size());
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::AffineProjection;
  impl->dim = A.cols();
  impl->ldlt.compute(A * A.transpose());
  if (impl->ldlt.info() != Eigen::Success) {
    throw RankDeficient("affine: factorization of A A^T failed");
  }
  const Vector d = impl->ldlt.vectorD();
  const double dmax = d.maxCoeff();
  if (dmax <= 0.0 || d.minCoeff() < 1e-12 * dmax) {
    throw RankDeficient("affine: A A^T is numerically rank deficient");
  }
  impl->A = std::move(A);
  impl->rhs = std::move(b);
  return FixedPointOperator(std::move(impl));
}

FixedPointOperator FixedPointOperator::box(Vector lo, Vector hi) {
  if (lo.size() == 0) throw InvalidSpec("box: bounds must be nonempty");
  check_dim("box: bounds", lo.size(), hi.size());
  for (Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) {
      throw InvalidSpec("box: lo > hi at coordinate " + std::to_string(i));
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::BoxProjection;
  impl->dim = lo.size();
  impl->lo = std::move(lo);
  impl->hi = std::move(hi);
  return FixedPointOperator(std::move(impl));
}

FixedPointOperator FixedPointOperator::box(Index dim, double lo, double hi) {
  return box(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
}

FixedPointOperator FixedPointOperator::ball(Vector center, double radius) {
  if (center.size() == 0) throw InvalidSpec("ball: center must be nonempty");
  if (!(radius > 0.0)) throw InvalidSpec("ball: radius must be positive");
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::BallProjection;
  impl->dim = center.size();
  impl->center = std::move(center);
  impl->radius = radius;
  return FixedPointOperator(std::move(impl));
}

FixedPointOperator FixedPointOperator::compose(std::vector<FixedPointOperator> ops) {
  if (ops.empty()) throw InvalidSpec("compose: needs at least one operator");
  const Index dim = ops.front().dim();
  double inv_sum = 0.0;
  bool exact = ops.size() == 1 && ops.front().modulus_exact();
  for (const auto& op : ops) {
    check_dim("compose: operand dimension", dim, op.dim());
    inv_sum += 1.0 / op.sqne_modulus();
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::Composition;
  impl->dim = dim;
  impl->modulus = 1.0 / inv_sum;
  impl->modulus_exact = exact;
  impl->children = std::move(ops);
  return FixedPointOperator(std::move(impl));
}

FixedPointOperator FixedPointOperator::average(std::vector<FixedPointOperator> ops,
                                               std::vector<double> weights) {
  if (ops.empty()) throw InvalidSpec("average: needs at least one operator");
  if (weights.empty()) {
    weights.assign(ops.size(), 1.0 / static_cast<double>(ops.size()));
  }
  if (weights.size() != ops.size()) {
    throw InvalidSpec("average: weight count does not match operator count");
  }
  const Index dim = ops.front().dim();
  double wsum = 0.0;
  double modulus = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ops.size(); ++i) {
    check_dim("average: operand dimension", dim, ops[i].dim());
    if (!(weights[i] > 0.0)) throw InvalidSpec("average: weights must be positive");
    wsum += weights[i];
    modulus = std::min(modulus, ops[i].sqne_modulus());
  }
  if (std::abs(wsum - 1.0) > 1e-12) {
    throw InvalidSpec("average: weights must sum to 1");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::ConvexCombination;
  impl->dim = dim;
  impl->modulus = modulus;
  impl->modulus_exact = ops.size() == 1 && ops.front().modulus_exact();
  impl->children = std::move(ops);
  impl->weights = std::move(weights);
  return FixedPointOperator(std::move(impl));
}

Vector FixedPointOperator::apply(const Vector& x) const {
  check_dim("apply: input", impl_->dim, x.size());
  return impl_->apply(x);
}

Index FixedPointOperator::dim() const { return impl_->dim; }
OperatorKind FixedPointOperator::kind() const { return impl_->kind; }
double FixedPointOperator::sqne_modulus() const { return impl_->modulus; }
bool FixedPointOperator::modulus_exact() const { return impl_->modulus_exact; }

const std::vector<FixedPointOperator>& FixedPointOperator::children() const {
  return impl_->children;
}

double residual(const FixedPointOperator& T, const Vector& x) {
  return (T.apply(x) - x).norm();
}

}  // namespace ratiosplit
