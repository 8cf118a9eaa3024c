#include "desketch/losses.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "desketch/errors.hpp"
#include "desketch/rng.hpp"
#include "doctest.h"

using namespace desketch;

namespace {

Eigen::MatrixXd seeded_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  RngStream rng(seed);
  Eigen::MatrixXd A(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) A(i, j) = rng.gaussian();
  return A;
}

Eigen::VectorXd seeded_vector(Eigen::Index n, std::uint64_t seed) {
  RngStream rng(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.gaussian();
  return v;
}

Eigen::VectorXd binary_labels(Eigen::Index n, std::uint64_t seed) {
  RngStream rng(seed);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return y;
}

void check_gradient_fd(const LossModel& loss, const Eigen::VectorXd& x) {
  const Eigen::VectorXd g = loss.gradient(x);
  const double eps = 1e-6;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd lo = x, hi = x;
    lo[j] -= eps;
    hi[j] += eps;
    const double fd = (loss.value(hi) - loss.value(lo)) / (2 * eps);
    CHECK(g[j] == doctest::Approx(fd).epsilon(1e-4));
  }
}

void check_hessian_fd(const LossModel& loss, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd H = loss.hessian(x);
  const double eps = 1e-5;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd lo = x, hi = x;
    lo[j] -= eps;
    hi[j] += eps;
    const Eigen::VectorXd fd = (loss.gradient(hi) - loss.gradient(lo)) / (2 * eps);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      CHECK(H(i, j) == doctest::Approx(fd[i]).epsilon(1e-4));
    }
  }
}

void check_local_model_identities(const LossModel& loss, const Eigen::VectorXd& x) {
  const LocalModel lm = local_model(loss, x);
  const Eigen::MatrixXd H = loss.hessian(x);
  const Eigen::VectorXd g = loss.gradient(x);
  CHECK((lm.hessian() - H).norm() <= 1e-10 * H.norm());
  CHECK((lm.gradient() - g).norm() <= 1e-10 * g.norm() + 1e-12);
}

}  // namespace

TEST_CASE("quadratic local model is the data itself") {
  const Eigen::MatrixXd A = seeded_matrix(12, 4, 1);
  const Eigen::VectorXd b = seeded_vector(12, 2);
  const LossModel loss = LossModel::quadratic(A, b, 0.5);
  const Eigen::VectorXd x = seeded_vector(4, 3);
  const LocalModel lm = local_model(loss, x);
  CHECK((lm.A_t - A).norm() == doctest::Approx(0.0));
  CHECK((lm.b_t - (A * x - b)).norm() <= 1e-14);
  CHECK(lm.ridge == doctest::Approx(0.5));
  CHECK(lm.grad_extra.norm() == doctest::Approx(0.0));
  check_local_model_identities(loss, x);
}

TEST_CASE("logistic at zero has curvature 1/4") {
  const Eigen::MatrixXd A = seeded_matrix(15, 3, 4);
  const LossModel loss = LossModel::logistic(A, binary_labels(15, 5), 0.3);
  const Eigen::MatrixXd H = loss.hessian(Eigen::VectorXd::Zero(3));
  const Eigen::MatrixXd expected =
      A.transpose() * A / (4.0 * 15.0) + 0.3 * Eigen::MatrixXd::Identity(3, 3);
  CHECK((H - expected).norm() <= 1e-12 * expected.norm());
  check_local_model_identities(loss, Eigen::VectorXd::Zero(3));
}

TEST_CASE("derivatives match finite differences for all loss kinds") {
  const Eigen::MatrixXd A = seeded_matrix(20, 4, 6);
  const Eigen::VectorXd x = 0.3 * seeded_vector(4, 7);

  const LossModel quad = LossModel::quadratic(A, seeded_vector(20, 8), 0.7);
  check_gradient_fd(quad, x);
  check_hessian_fd(quad, x);
  check_local_model_identities(quad, x);

  const LossModel logi = LossModel::logistic(A, binary_labels(20, 9), 0.05);
  check_gradient_fd(logi, x);
  check_hessian_fd(logi, x);
  check_local_model_identities(logi, x);

  const LossModel barrier =
      LossModel::log_barrier(A, /*t=*/8.0, 0.2 * seeded_vector(4, 10), 0.4);
  REQUIRE(barrier.in_domain(x));
  check_gradient_fd(barrier, x);
  check_hessian_fd(barrier, x);
  check_local_model_identities(barrier, x);
}

TEST_CASE("log-barrier gradient at the origin is -2 lambda c") {
  const Eigen::MatrixXd A = seeded_matrix(10, 3, 11);
  const Eigen::VectorXd c = seeded_vector(3, 12);
  const double lambda = 0.9;
  const LossModel barrier = LossModel::log_barrier(A, 5.0, c, lambda);
  const Eigen::VectorXd g = barrier.gradient(Eigen::VectorXd::Zero(3));
  CHECK((g + 2.0 * lambda * c).norm() <= 1e-12);
}

TEST_CASE("logistic objective decreases along a separating direction") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4);
  const LossModel loss = LossModel::logistic(A, Eigen::VectorXd::Ones(4), 1e-6);
  const Eigen::VectorXd dir = Eigen::VectorXd::Ones(4);
  double prev = loss.value(0.1 * dir);
  for (const double t : {0.5, 1.0, 2.0, 4.0}) {
    const double cur = loss.value(t * dir);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("saturated logistic rows are clamped into grad_extra") {
  Eigen::MatrixXd A(3, 2);
  A << 60.0, 0.0, 0.0, 1.0, 1.0, 1.0;  // first row saturates at x = (1, 0)
  Eigen::VectorXd y(3);
  y << 0, 0, 1;  // mislabeled saturated row keeps a nonzero gradient term
  const LossModel loss = LossModel::logistic(A, y, 0.2);
  Eigen::VectorXd x(2);
  x << 1.0, 0.0;
  const LocalModel lm = local_model(loss, x);
  CHECK(lm.A_t.row(0).norm() == doctest::Approx(0.0));
  CHECK(lm.grad_extra.norm() > 0.0);
  check_local_model_identities(loss, x);
}

TEST_CASE("line search accepts the full Newton step on quadratics") {
  const Eigen::MatrixXd A = seeded_matrix(10, 3, 13);
  const LossModel quad = LossModel::quadratic(A, seeded_vector(10, 14), 0.5);
  const Eigen::VectorXd x = seeded_vector(3, 15);
  Eigen::LLT<Eigen::MatrixXd> llt(quad.hessian(x));
  const Eigen::VectorXd dir = -llt.solve(quad.gradient(x));
  CHECK(backtracking_line_search(quad, x, dir) == doctest::Approx(1.0));
}

TEST_CASE("line search on f(x) = x^2 from x = 1") {
  // f(x) = x^2 as a quadratic loss: A = [sqrt(2 - lambda)], b = 0.
  const double lambda = 1e-9;
  Eigen::MatrixXd A(1, 1);
  A << std::sqrt(2.0 - lambda);
  const LossModel f = LossModel::quadratic(A, Eigen::VectorXd::Zero(1), lambda);
  Eigen::VectorXd x(1), newton(1);
  x << 1.0;
  newton << -1.0;  // -f'/f'' at x = 1
  CHECK(backtracking_line_search(f, x, newton) == doctest::Approx(1.0));
  // An overshooting doubled step fails the sufficient-decrease test at
  // alpha = 1 and halves once.
  Eigen::VectorXd doubled(1);
  doubled << -2.0;
  CHECK(backtracking_line_search(f, x, doubled) == doctest::Approx(0.5));
}

TEST_CASE("armijo condition holds for every returned step") {
  const Eigen::MatrixXd A = seeded_matrix(15, 4, 16);
  const LossModel loss = LossModel::logistic(A, binary_labels(15, 17), 0.2);
  RngStream rng(18);
  const LineSearchParams params;
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::VectorXd x = 0.5 * seeded_vector(4, 19 + trial);
    Eigen::VectorXd g = loss.gradient(x);
    Eigen::VectorXd dir = -g;
    for (int j = 0; j < 4; ++j) dir[j] *= 0.5 + rng.uniform();  // still descent
    const double slope = g.dot(dir);
    REQUIRE(slope < 0.0);
    const double alpha = backtracking_line_search(loss, x, dir, params);
    CHECK(loss.value(x + alpha * dir) <= loss.value(x) + params.c * alpha * slope + 1e-12);
  }
}

TEST_CASE("infeasible full steps are shrunk strictly inside the domain") {
  Eigen::MatrixXd A(2, 1);
  A << 1.0, -1.0;
  const double t = 1.0;
  const LossModel barrier = LossModel::log_barrier(A, t, Eigen::VectorXd::Zero(1), 0.5);
  Eigen::VectorXd x(1);
  x << 0.3;
  const Eigen::VectorXd g = barrier.gradient(x);
  Eigen::VectorXd dir(1);
  dir << (g[0] < 0.0 ? 4.0 : -4.0);  // descent but crosses the boundary
  REQUIRE(g.dot(dir) < 0.0);
  const double alpha = backtracking_line_search(barrier, x, dir);
  // Bisection oracle for the feasibility boundary along dir.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (barrier.in_domain(x + mid * dir) ? lo : hi) = mid;
  }
  CHECK(alpha < hi);
  CHECK(barrier.in_domain(x + alpha * dir));
}

TEST_CASE("non-descent directions fall back to a non-increasing step") {
  const Eigen::MatrixXd A = seeded_matrix(10, 2, 30);
  const LossModel quad = LossModel::quadratic(A, seeded_vector(10, 31), 1.0);
  const Eigen::VectorXd x = seeded_vector(2, 32);
  const Eigen::VectorXd ascent = quad.gradient(x);
  const double alpha = backtracking_line_search(quad, x, ascent);
  CHECK(alpha > 0.0);
  CHECK(quad.value(x + alpha * ascent) <= quad.value(x));
}

TEST_CASE("steps that can never regain feasibility exhaust the halving budget") {
  Eigen::MatrixXd A(2, 1);
  A << 1.0, -1.0;
  const LossModel barrier = LossModel::log_barrier(A, 1.0, Eigen::VectorXd::Zero(1), 0.5);
  Eigen::VectorXd x(1), dir(1);
  x << 0.3;
  const Eigen::VectorXd g = barrier.gradient(x);
  dir << (g[0] < 0.0 ? 1e30 : -1e30);  // descent, but every trial is infeasible
  REQUIRE(g.dot(dir) < 0.0);
  CHECK_THROWS_AS(backtracking_line_search(barrier, x, dir), SolverError);
}

TEST_CASE("domain violations raise errors") {
  Eigen::MatrixXd A(1, 1);
  A << 1.0;
  const LossModel barrier = LossModel::log_barrier(A, 1.0, Eigen::VectorXd::Zero(1), 1.0);
  Eigen::VectorXd outside(1);
  outside << 2.0;
  CHECK_THROWS_AS(barrier.value(outside), SolverError);
  CHECK_THROWS_AS(local_model(barrier, outside), SolverError);
  CHECK_FALSE(barrier.in_domain(outside));
}

TEST_CASE("input validation") {
  Eigen::MatrixXd A = seeded_matrix(5, 2, 40);
  Eigen::VectorXd bad_labels(5);
  bad_labels << 0, 1, 2, 0, 1;
  CHECK_THROWS_AS(LossModel::logistic(A, bad_labels, 1.0), InputError);
  CHECK_THROWS_AS(LossModel::quadratic(A, seeded_vector(4, 41), 1.0), InputError);
  CHECK_THROWS_AS(LossModel::log_barrier(A, -1.0, Eigen::VectorXd::Zero(2), 1.0), InputError);
}
