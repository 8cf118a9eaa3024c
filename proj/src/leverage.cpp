#include "desketch/leverage.hpp"

#include <cmath>
#include <vector>

#include "desketch/errors.hpp"
#include "desketch/problem.hpp"
#include "desketch/rng.hpp"
#include "desketch/sketches.hpp"

namespace desketch {

namespace {

constexpr int kSignProjectionRows = 256;

Eigen::VectorXd exact_forms(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C) {
  Eigen::MatrixXd shifted = C;
  shifted.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) throw SolverError("precompute_leverage: C + I not SPD");
  Eigen::VectorXd l(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const Eigen::VectorXd row = A.row(i).transpose();
    l[i] = row.dot(llt.solve(row));
  }
  return l;
}

double trace_ridge(const Eigen::MatrixXd& C) {
  Eigen::MatrixXd shifted = C;
  shifted.diagonal().array() += 1.0;
  // tr(C (C+I)^-1) = d - tr((C+I)^-1)
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(C.rows(), C.cols()));
  return static_cast<double>(C.rows()) - inv.trace();
}

}  // namespace

bool spectral_sandwich_holds(const Eigen::MatrixXd& C, const Eigen::MatrixXd& gram,
                             double slack) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double ev_max = eig.eigenvalues().maxCoeff();
  if (ev_max <= 0.0) return C.norm() <= 1e-12;
  const double rank_tol = 1e-12 * ev_max;
  std::vector<Eigen::Index> range, null;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    (eig.eigenvalues()[i] > rank_tol ? range : null).push_back(i);
  }
  // C must vanish on the null space of the gram matrix.
  for (Eigen::Index i : null) {
    const Eigen::VectorXd v = eig.eigenvectors().col(i);
    if (std::abs(v.dot(C * v)) > 1e-10 * ev_max) return false;
  }
  Eigen::MatrixXd basis(gram.rows(), static_cast<Eigen::Index>(range.size()));
  for (std::size_t k = 0; k < range.size(); ++k) {
    basis.col(static_cast<Eigen::Index>(k)) =
        eig.eigenvectors().col(range[k]) / std::sqrt(eig.eigenvalues()[range[k]]);
  }
  const Eigen::MatrixXd pencil = basis.transpose() * C * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> peig(pencil, Eigen::EigenvaluesOnly);
  return peig.eigenvalues().minCoeff() >= 1.0 - slack &&
         peig.eigenvalues().maxCoeff() <= 1.0 + slack;
}

LeveragePrecompute precompute_leverage(const Eigen::MatrixXd& A, LeverageMode mode,
                                       int sketch_rows, std::uint64_t seed, bool verify) {
  detail::require_finite(A, "precompute_leverage.A");
  const Eigen::Index d = A.cols();
  LeveragePrecompute pre;

  if (mode == LeverageMode::exact) {
    pre.C = A.transpose() * A;
    pre.l_tilde = exact_forms(A, pre.C);
    pre.s = pre.l_tilde.sum();
    pre.s_tilde = trace_ridge(pre.C);
    return pre;
  }

  if (sketch_rows < d) throw InputError("precompute_leverage: sketch_rows must be >= d");
  const double slack = 1.0 / (4.0 * std::sqrt(static_cast<double>(d)));
  const Eigen::MatrixXd gram = verify ? (A.transpose() * A).eval() : Eigen::MatrixXd();

  int rows = sketch_rows;
  for (int attempt = 0; attempt < 5; ++attempt, rows *= 2) {
    RngStream rng = RngStream::derive(seed, {0x1e7e, static_cast<std::uint64_t>(attempt)});
    const SketchSample sk = draw_sketch(SketchSpec::rademacher(rows, seed), A.rows(), rng);
    const Eigen::MatrixXd SA = sk.dense * A;
    pre.C = SA.transpose() * SA;
    if (verify && !spectral_sandwich_holds(pre.C, gram, slack)) continue;

    // Sign-projection estimate of ||(C+I)^{-1/2} a_i||^2: rows of G L^{-T}
    // hit every a_i at O(d) cost. Unbiased with relative sd sqrt(2/k).
    Eigen::MatrixXd shifted = pre.C;
    shifted.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) throw SolverError("precompute_leverage: C + I not SPD");
    const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(kSignProjectionRows));
    Eigen::MatrixXd G(kSignProjectionRows, d);
    for (Eigen::Index i = 0; i < G.rows(); ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        G(i, j) = (rng.next_u64() & 1u) ? inv_sqrt_k : -inv_sqrt_k;
    // P = G L^{-1}: solve L^T P^T = G^T.
    const Eigen::MatrixXd Pt = llt.matrixL().transpose().solve(G.transpose());
    pre.l_tilde = (A * Pt).rowwise().squaredNorm();
    pre.s = pre.l_tilde.sum();
    pre.s_tilde = trace_ridge(pre.C);
    return pre;
  }
  throw SamplerError("precompute_leverage: spectral sandwich failed after retries");
}

}  // namespace desketch
