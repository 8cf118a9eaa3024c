#pragma once
// Determinantal point process samplers over row subsets of a matrix.
//
// The process of interest is the L-ensemble S ~ DPP((1/lambda) A A^T):
//   Pr(S) proportional to det((1/lambda) A_S A_S^T),
// whose marginals Pr(i in S) are the lambda-ridge leverage scores and whose
// expected size is the lambda-effective dimension of A.
//
// Two samplers are provided. The spectral sampler is exact and is the
// default at desk scale. The rejection sampler draws an oversampled
// intermediate index pool from approximate leverage scores, thins it, and
// accepts with a determinant ratio; it has identical output distribution and
// exists for large-n settings. Both are deterministic given an RngStream.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "desketch/leverage.hpp"
#include "desketch/rng.hpp"

namespace desketch {

enum class DppMethod { spectral, rejection };

struct DppDraw {
  std::vector<Eigen::Index> indices;  // sorted, no duplicates
  DppMethod method = DppMethod::spectral;
  int rejection_rounds = 0;  // 0 for spectral draws
};

struct RejectionConfig {
  // Oversampling parameter. <= 0 means auto: max(1, s_tilde) from the
  // precompute, which keeps the per-round acceptance rate near exp(-1/2).
  double r = 0.0;
  int max_rounds = 1000;
};

// Prepared sampler for S ~ DPP(B B^T) given an explicit factor B (n x d).
// Preprocessing is one thin SVD; each draw costs O(n k^2) for k = |S|.
class DppSpectral {
 public:
  explicit DppSpectral(const Eigen::MatrixXd& B);

  std::vector<Eigen::Index> draw(RngStream& rng) const;

  // Eigenvalues of B B^T restricted to its range (squared singular values).
  const Eigen::VectorXd& kernel_eigenvalues() const { return eigenvalues_; }
  // E|S| = sum_j s_j / (1 + s_j).
  double expected_size() const;
  Eigen::Index ground_set_size() const { return eigenvectors_.rows(); }

 private:
  Eigen::MatrixXd eigenvectors_;  // n x r, orthonormal columns
  Eigen::VectorXd eigenvalues_;   // r
};

// Rejection sampler for S ~ DPP(B B^T), with a leverage precompute built on
// the same B. Draws are const and thread-safe given per-thread streams.
class DppRejection {
 public:
  DppRejection(Eigen::MatrixXd B, LeveragePrecompute pre, RejectionConfig cfg = {});

  std::vector<Eigen::Index> draw(RngStream& rng, int* rounds_out = nullptr) const;

  double oversampling_r() const { return r_; }
  double poisson_mean() const { return poisson_mean_; }

 private:
  Eigen::MatrixXd B_;
  LeveragePrecompute pre_;
  Eigen::VectorXd exact_forms_;  // b_i^T (C+I)^-1 b_i, computed up front
  double r_ = 1.0;
  int max_rounds_ = 1000;
  double poisson_mean_ = 0.0;
  double log_det_ic_ = 0.0;  // log det(I + C)
  bool degenerate_ = false;  // zero kernel: S = {} almost surely
  std::optional<CategoricalSampler> proposal_;
};

// One-shot draws from DPP((1/lambda) A A^T).
DppDraw dpp_sample_spectral(const Eigen::MatrixXd& A, double lambda, RngStream& rng);

// `pre` must have been computed on A / sqrt(lambda).
DppDraw dpp_sample_rejection(const Eigen::MatrixXd& A, double lambda,
                             const LeveragePrecompute& pre, const RejectionConfig& cfg,
                             RngStream& rng);

// Exact probability table over all 2^n subsets (index = bitmask over rows,
// bit i = row i present). Refuses n > 20. The normalization is checked
// against det(I + (1/lambda) A^T A) internally.
std::vector<double> subset_probability_oracle(const Eigen::MatrixXd& A, double lambda);

}  // namespace desketch
