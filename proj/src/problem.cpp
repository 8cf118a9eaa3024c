#include "desketch/problem.hpp"

#include <cmath>

#include "desketch/errors.hpp"

namespace desketch {

namespace detail {

void require_finite(const Eigen::MatrixXd& M, const char* what) {
  if (!M.allFinite()) throw InputError(std::string(what) + ": non-finite entries");
}

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw InputError(std::string(what) + ": non-finite entries");
}

}  // namespace detail

Problem::Problem(Eigen::MatrixXd A_in, Eigen::VectorXd b_in, double lambda_in)
    : A(std::move(A_in)), b(std::move(b_in)), lambda(lambda_in) {
  if (A.rows() < 1 || A.cols() < 1) throw InputError("Problem: empty data matrix");
  if (b.size() != A.rows()) throw InputError("Problem: b length must equal row count");
  if (!(lambda > 0.0)) throw InputError("Problem: lambda must be positive");
  detail::require_finite(A, "Problem.A");
  detail::require_finite(b, "Problem.b");
}

double effective_dimension(const Eigen::MatrixXd& A, double lambda) {
  if (!(lambda > 0.0)) throw InputError("effective_dimension: lambda must be positive");
  detail::require_finite(A, "effective_dimension.A");
  const Eigen::MatrixXd gram = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  double d_lambda = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double ev = std::max(0.0, eig.eigenvalues()[i]);
    d_lambda += ev / (ev + lambda);
  }
  return d_lambda;
}

ScaledRegularizer scaled_regularizer(double lambda, double d_lambda, int m) {
  if (!(lambda > 0.0)) throw InputError("scaled_regularizer: lambda must be positive");
  if (!(d_lambda >= 0.0)) throw InputError("scaled_regularizer: d_lambda must be >= 0");
  if (!(static_cast<double>(m) > d_lambda)) {
    throw InfeasibleError("scaled_regularizer: sketch size m must exceed d_lambda");
  }
  ScaledRegularizer r;
  r.d_lambda = d_lambda;
  r.m = m;
  r.gamma = static_cast<double>(m) - d_lambda;
  r.lambda_prime = lambda * (1.0 - d_lambda / static_cast<double>(m));
  return r;
}

std::pair<Hessian, Eigen::VectorXd> hessian_and_gradient(const Problem& p,
                                                         const Eigen::VectorXd& x) {
  if (x.size() != p.d()) throw InputError("hessian_and_gradient: x has wrong dimension");
  Hessian h;
  h.mat = p.A.transpose() * p.A;
  h.mat.diagonal().array() += p.lambda;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h.mat, Eigen::EigenvaluesOnly);
  h.lambda_min = eig.eigenvalues().minCoeff();
  h.kappa = eig.eigenvalues().maxCoeff() / h.lambda_min;
  Eigen::VectorXd g = p.A.transpose() * (p.A * x - p.b) + p.lambda * x;
  return {std::move(h), std::move(g)};
}

double mahalanobis_norm(const Eigen::VectorXd& v, const Eigen::MatrixXd& M, double tol) {
  if (M.rows() != M.cols() || M.rows() != v.size()) {
    throw InputError("mahalanobis_norm: dimension mismatch");
  }
  const double quad = v.dot(M.selfadjointView<Eigen::Lower>() * v);
  const double scale = M.diagonal().cwiseAbs().maxCoeff() * v.squaredNorm();
  if (quad < -tol * std::max(scale, 1e-300)) {
    throw InputError("mahalanobis_norm: matrix is not PSD on this vector");
  }
  return std::sqrt(std::max(0.0, quad));
}

Eigen::VectorXd solve_exact(const Problem& p) {
  Eigen::MatrixXd H = p.A.transpose() * p.A;
  H.diagonal().array() += p.lambda;
  const Eigen::VectorXd rhs = p.A.transpose() * p.b;
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    throw SolverError("solve_exact: Cholesky factorization failed");
  }
  Eigen::VectorXd x = llt.solve(rhs);
  // One refinement pass keeps the residual near machine precision even for
  // moderately ill-conditioned Hessians.
  x += llt.solve(rhs - H.selfadjointView<Eigen::Lower>() * x);
  return x;
}

}  // namespace desketch
