#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ratiosplit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Construction-time rejection: bad parameters, dimension mismatches,
// ill-posed generator specs.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// AA^T (or another factored matrix) is numerically rank deficient.
class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluation outside a function's domain (e.g. Cobb-Douglas at x <= 0).
class EvalDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A solver visited a point where a denominator is not strictly positive.
// Runs abort on this; values are never clamped.
class DenominatorViolation : public std::runtime_error {
 public:
  DenominatorViolation(double value, int component, Vector at)
      : std::runtime_error(component < 0
                               ? "denominator not positive: g(x) = " + std::to_string(value)
                               : "denominator " + std::to_string(component) +
                                     " not positive: g_i(x) = " + std::to_string(value)),
        value_(value),
        component_(component),
        at_(std::move(at)) {}

  double value() const { return value_; }
  // -1 for single-ratio programs, 0-based component index otherwise.
  int component() const { return component_; }
  const Vector& at() const { return at_; }

 private:
  double value_;
  int component_;
  Vector at_;
};

// API misuse that is detectable at call time: mismatched step schedules in a
// diagnostic, anchor weights outside (0,1], reference points that are not
// fixed points, and similar.
class Misuse : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A metric was asked to evaluate outside its domain (e.g. theta_prev <= -1).
class MetricDomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ratiosplit
