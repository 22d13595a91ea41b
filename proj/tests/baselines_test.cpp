#include <doctest.h>

#include <cmath>
#include <random>

#include "ratiosplit/baselines.hpp"
#include "support/oracles.hpp"

using namespace ratiosplit;
using testsupport::grid_project_2d;

TEST_SUITE_BEGIN("baselines");

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

std::function<double(int)> harmonic_alpha(double c) {
  return [c](int j) { return c / static_cast<double>(j + 1); };
}

// f(x) = x^2, g(x) = x on [1, 2]; theta* = 1 at x* = 1.
FractionalProgram quad_over_x() {
  return FractionalProgram(
      SubdifferentiableFunction::quadratic_form(Matrix::Constant(1, 1, 2.0), 2.0),
      SubdifferentiableFunction::linear(Vector::Ones(1), Curvature::Concave),
      FixedPointOperator::box(1, 1.0, 2.0), 2.0);
}

}  // namespace

TEST_CASE("hsdm with zero iterations returns the start point") {
  auto T = FixedPointOperator::box(1, 0.0, 2.0);
  auto phi = SubdifferentiableFunction::zero(1);
  Vector u = hsdm_run(T, phi, scalar(7.5), harmonic_alpha(0.1), 0);
  CHECK(u(0) == 7.5);
}

TEST_CASE("hsdm minimizes a quadratic over an interval") {
  // phi(x) = (x - 3)^2 over Fix P_{[0,2]} = [0, 2]; constrained minimum at 2.
  Matrix Q = Matrix::Constant(1, 1, 2.0);
  auto phi = SubdifferentiableFunction::quadratic(Q, Vector::Constant(1, -6.0), 9.0, 2.0);
  auto T = FixedPointOperator::box(1, 0.0, 2.0);
  Vector u = hsdm_run(T, phi, scalar(0.0), harmonic_alpha(0.1), 500);
  CHECK(std::abs(u(0) - 2.0) <= 1e-2);
}

TEST_CASE("hsdm with a zero objective is the bare fixed-point iteration") {
  std::mt19937_64 rng(4242);
  Vector a(3);
  a << 1.0, -2.0, 0.5;
  auto T = FixedPointOperator::compose(
      {FixedPointOperator::halfspace(a, 0.5), FixedPointOperator::box(3, -1.0, 1.0)});
  auto phi = SubdifferentiableFunction::zero(3);
  for (int rep = 0; rep < 5; ++rep) {
    Vector start = testsupport::rand_vec(rng, 3, -4.0, 4.0);
    Vector via_hsdm = hsdm_run(T, phi, start, [](int) { return 1.0; }, 20);
    Vector direct = start;
    for (int j = 0; j < 20; ++j) direct = T.apply(direct);
    for (int i = 0; i < 3; ++i) CHECK(via_hsdm(i) == direct(i));
  }
}

TEST_CASE("hsdm rejects bad arguments") {
  auto T = FixedPointOperator::box(1, 0.0, 1.0);
  auto phi = SubdifferentiableFunction::zero(1);
  CHECK_THROWS_AS(hsdm_run(T, phi, scalar(0.0), harmonic_alpha(0.1), -1), Misuse);
  CHECK_THROWS_AS(hsdm_run(T, phi, Vector::Zero(2), harmonic_alpha(0.1), 1), InvalidSpec);
  CHECK_THROWS_AS(
      hsdm_run(T, SubdifferentiableFunction::zero(2), scalar(0.0), harmonic_alpha(0.1), 1),
      InvalidSpec);
  CHECK_THROWS_AS(hsdm_run(T, phi, scalar(0.0), [](int) { return 0.0; }, 1), Misuse);
  CHECK_THROWS_AS(hsdm_run(T, phi, scalar(0.0), {}, 1), InvalidSpec);
}

TEST_CASE("hsdm flags a non-finite subgradient") {
  // Overflowing quadratic: grad = Q x with Q, x ~ 1e200 overflows to inf.
  Matrix Q = Matrix::Constant(1, 1, 1e200);
  auto phi = SubdifferentiableFunction::quadratic_form(Q, 1e200);
  auto T = FixedPointOperator::identity(1);
  CHECK_THROWS_AS(hsdm_run(T, phi, scalar(1e200), [](int) { return 1.0; }, 1),
                  EvalDomainError);
}

TEST_CASE("dinkelbach with exact inner solves settles in two outer iterations") {
  auto p = quad_over_x();
  // argmin_{[1,2]} x^2 - theta x = clamp(theta/2).
  InnerSolver exact = [](const FractionalProgram&, double theta, const Vector&) {
    return scalar(std::min(2.0, std::max(1.0, theta / 2.0)));
  };
  InnerLoopConfig cfg;
  cfg.alpha_rule = [](int, double) { return 1.0; };  // unused with a custom inner
  SolverState st =
      dinkelbach_run(p, scalar(2.0), cfg, StopRule::max_iterations(3), exact);

  REQUIRE(st.trace.rows.size() == 3);
  CHECK(st.trace.rows[0].theta == 2.0);  // f(2)/g(2) = 4/2
  CHECK(st.trace.rows[1].theta == 1.0);  // inner argmin hits x* = 1 at once
  CHECK(st.trace.rows[2].theta == 1.0);
  CHECK(std::abs(st.theta - 1.0) <= 1e-9);
  CHECK(st.x(0) == 1.0);
  for (std::size_t i = 1; i < st.trace.rows.size(); ++i) {
    CHECK(st.trace.rows[i].theta <= st.trace.rows[i - 1].theta);
  }

  // With a relative-error stop the run ends right after theta stalls.
  SolverState early = dinkelbach_run(
      p, scalar(2.0), cfg, StopRule::rel_error(1e-9) | StopRule::max_iterations(50),
      exact);
  CHECK(early.trace.rows.size() == 2);
  CHECK(early.trace.stop_reason == StopReason::RelError);
}

TEST_CASE("dinkelbach zero outer budget returns the initial state") {
  auto p = quad_over_x();
  InnerLoopConfig cfg;
  cfg.alpha_rule = [](int, double) { return 0.05; };
  SolverState st = dinkelbach_run(p, scalar(2.0), cfg, StopRule::max_iterations(0));
  CHECK(st.trace.rows.empty());
  CHECK(st.x(0) == 2.0);
  CHECK(st.theta == 2.0);
  CHECK(st.trace.stop_reason == StopReason::MaxIterations);
  CHECK(st.trace.meta.method == "dinkelbach");
}

TEST_CASE("dinkelbach default inner loop converges on the interval ratio") {
  auto p = quad_over_x();
  InnerLoopConfig cfg;
  cfg.inner_iters = 10;
  // The last inner step is an unprojected gradient step, so the outer
  // iterate carries a bias of about alpha * |phi'|; diminishing alpha over
  // the inner index keeps that below the tolerance here.
  cfg.alpha_rule = [](int j, double theta) { return 0.1 / (j * (1.0 + theta)); };
  SolverState st = dinkelbach_run(p, scalar(2.0), cfg, StopRule::max_iterations(200));
  CHECK(std::abs(st.theta - 1.0) <= 1e-2);
  CHECK(st.best_theta <= 2.0);
  CHECK(st.trace.warnings.empty());
  CHECK(st.trace.meta.schedule == "inner:10");
}

TEST_CASE("dinkelbach validates its configuration") {
  auto p = quad_over_x();
  InnerLoopConfig cfg;
  cfg.alpha_rule = [](int, double) { return 0.05; };
  CHECK_THROWS_AS(dinkelbach_run(p, scalar(2.0), cfg, StopRule{}), Misuse);
  InnerLoopConfig no_alpha;
  CHECK_THROWS_AS(
      dinkelbach_run(p, scalar(2.0), no_alpha, StopRule::max_iterations(1)),
      InvalidSpec);
  InnerLoopConfig zero_inner = cfg;
  zero_inner.inner_iters = 0;
  CHECK_THROWS_AS(
      dinkelbach_run(p, scalar(2.0), zero_inner, StopRule::max_iterations(1)),
      InvalidSpec);
}

TEST_CASE("halpern anchored at an identity operator stays at the anchor") {
  Vector z(2);
  z << 0.3, -0.7;
  Vector u = halpern_project(FixedPointOperator::identity(2), z,
                             [](int s) { return 1.0 / (s + 1); }, 50);
  CHECK(u(0) == z(0));
  CHECK(u(1) == z(1));
}

TEST_CASE("halpern projects onto an interval") {
  auto T = FixedPointOperator::box(1, 0.0, 1.0);
  auto lam = [](int s) { return 1.0 / (s + 1); };
  Vector z = scalar(2.0);
  Vector coarse = halpern_project(T, z, lam, 100);
  Vector fine = halpern_project(T, z, lam, 10000);
  CHECK(std::abs(fine(0) - 1.0) <= 1e-2);
  CHECK(std::abs(fine(0) - 1.0) < std::abs(coarse(0) - 1.0));
}

TEST_CASE("halpern approximates the projection onto a halfspace intersection") {
  Vector a1(2), a2(2);
  a1 << 1.0, 1.0;
  a2 << 1.0, -1.0;
  const double b1 = 1.0, b2 = 0.5;
  auto T = FixedPointOperator::compose(
      {FixedPointOperator::halfspace(a1, b1), FixedPointOperator::halfspace(a2, b2)});
  Vector z(2);
  z << 2.0, 0.8;

  auto feasible = [&](const Vector& q) {
    return q(0) + q(1) <= b1 + 1e-12 && q(0) - q(1) <= b2 + 1e-12;
  };
  Vector oracle = grid_project_2d(z, feasible, -1.5, 2.5, -1.5, 2.5, 1e-3).x;

  auto lam = [](int s) { return 1.0 / (s + 1); };
  Vector coarse = halpern_project(T, z, lam, 100);
  Vector fine = halpern_project(T, z, lam, 10000);
  CHECK((fine - oracle).norm() <= 1e-2);
  CHECK((fine - oracle).norm() < (coarse - oracle).norm());
}

TEST_CASE("halpern rejects lambda outside the unit interval") {
  auto T = FixedPointOperator::box(1, 0.0, 1.0);
  Vector z = scalar(2.0);
  CHECK_THROWS_AS(halpern_project(T, z, [](int) { return 1.5; }, 1), Misuse);
  CHECK_THROWS_AS(halpern_project(T, z, [](int) { return 0.0; }, 1), Misuse);
  CHECK_THROWS_AS(halpern_project(T, z, [](int) { return -0.2; }, 1), Misuse);
  // lambda = 1 is allowed and pins the iterate at the anchor.
  Vector u = halpern_project(T, z, [](int) { return 1.0; }, 3);
  CHECK(u(0) == 2.0);
}

TEST_SUITE_END();
