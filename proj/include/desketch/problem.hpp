#pragma once
// Regularized least-squares problem, Hessian/gradient assembly, effective
// dimension, scaled local regularization and the Mahalanobis norm.
//
// Everything here is a pure function of its inputs; Problem and Hessian are
// immutable after construction and safe to share read-only across threads.

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

namespace desketch {

// min_x 1/2 ||Ax - b||^2 + lambda/2 ||x||^2
struct Problem {
  Eigen::MatrixXd A;  // n x d, rows are data points
  Eigen::VectorXd b;  // length n
  double lambda = 0.0;

  Problem(Eigen::MatrixXd A_in, Eigen::VectorXd b_in, double lambda_in);

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index d() const { return A.cols(); }
};

// H = A^T A + lambda I together with its spectral summary. lambda_min is the
// smallest eigenvalue (>= lambda), kappa the condition number.
struct Hessian {
  Eigen::MatrixXd mat;
  double lambda_min = 0.0;
  double kappa = 1.0;
};

// Local regularizer lambda' = lambda * (1 - d_lambda / m) together with the
// quantities it is built from. gamma = m - d_lambda is the expected number of
// i.i.d. rows in a surrogate sketch of nominal size m.
struct ScaledRegularizer {
  double lambda_prime = 0.0;
  double d_lambda = 0.0;
  int m = 0;
  double gamma = 0.0;
};

// tr(A^T A (A^T A + lambda I)^-1), the lambda-effective dimension.
// Computed from the eigenvalues of A^T A; result lies in [0, min(n, d)].
double effective_dimension(const Eigen::MatrixXd& A, double lambda);

// Requires m > d_lambda >= 0; throws InfeasibleError otherwise.
ScaledRegularizer scaled_regularizer(double lambda, double d_lambda, int m);

// H = A^T A + lambda I and g = A^T (Ax - b) + lambda x.
std::pair<Hessian, Eigen::VectorXd> hessian_and_gradient(const Problem& p,
                                                         const Eigen::VectorXd& x);

// sqrt(v^T M v) for symmetric PSD M. A quadratic form below
// -tol * (scale of M) * |v|^2 raises InputError; small negative values from
// roundoff clamp to zero.
double mahalanobis_norm(const Eigen::VectorXd& v, const Eigen::MatrixXd& M,
                        double tol = 1e-8);

// x* = (A^T A + lambda I)^-1 A^T b via Cholesky (SPD is guaranteed by
// lambda > 0), with one step of iterative refinement.
Eigen::VectorXd solve_exact(const Problem& p);

namespace detail {
void require_finite(const Eigen::MatrixXd& M, const char* what);
void require_finite(const Eigen::VectorXd& v, const char* what);
}  // namespace detail

}  // namespace desketch
