#pragma once
// Surrogate row-sampling sketches: a DPP subset combined with a Poisson
// number of i.i.d. importance-sampled rows, randomly permuted, with row i
// weighted by 1/sqrt(m p_i). With the scaled local regularizer
// lambda' = lambda (1 - d_lambda / m), inverse-Hessian estimates built from
// these sketches are exactly unbiased.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "desketch/dpp.hpp"
#include "desketch/problem.hpp"
#include "desketch/rng.hpp"

namespace desketch {

struct SurrogateSample {
  std::vector<Eigen::Index> dpp_indices;  // the DPP subset (sorted set)
  std::vector<Eigen::Index> iid_indices;  // multiset of size M ~ Poisson(gamma)
  std::vector<Eigen::Index> permuted;     // both parts, randomly interleaved
  Eigen::VectorXd weights;                // per permuted row: 1/sqrt(m p_row)
  double gamma = 0.0;
  double lambda_prime = 0.0;
  int m = 0;
  int rejection_rounds = 0;

  Eigen::Index count() const { return static_cast<Eigen::Index>(permuted.size()); }
};

enum class HessianVariant { sketch_and_solve, newton_sketch };

// Prepared sampler: caches d_lambda, gamma, lambda', the sampling
// probabilities and the spectral (or rejection) DPP state for a fixed
// (A, lambda, m). Immutable after construction; draws are const and need one
// RngStream per caller.
class SurrogateSketcher {
 public:
  // p empty: exact ridge leverage probabilities (the default). Requires
  // m > d_lambda and p_i > 0 for every nonzero row.
  SurrogateSketcher(Eigen::MatrixXd A, double lambda, int m,
                    Eigen::VectorXd p = Eigen::VectorXd(),
                    DppMethod method = DppMethod::spectral,
                    RejectionConfig rejection_cfg = {},
                    std::uint64_t precompute_seed = 0);

  SurrogateSample draw(RngStream& rng) const;

  // (SA, Sb): gathered, scaled rows of the stored A and of b.
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> apply(const SurrogateSample& sample,
                                                    const Eigen::VectorXd& b) const;
  // SA only.
  Eigen::MatrixXd apply_matrix(const SurrogateSample& sample) const;

  double d_lambda() const { return d_lambda_; }
  double gamma() const { return gamma_; }
  double lambda_prime() const { return lambda_prime_; }
  double lambda() const { return lambda_; }
  int m() const { return m_; }
  const Eigen::VectorXd& probabilities() const { return p_; }
  const Eigen::MatrixXd& data() const { return A_; }

 private:
  Eigen::MatrixXd A_;
  double lambda_;
  int m_;
  Eigen::VectorXd p_;
  double d_lambda_ = 0.0;
  double gamma_ = 0.0;
  double lambda_prime_ = 0.0;
  std::optional<DppSpectral> spectral_;
  std::optional<DppRejection> rejection_;
  std::optional<CategoricalSampler> iid_proposal_;
};

// One-shot draw matching the sketcher defaults.
SurrogateSample draw_surrogate(const Eigen::MatrixXd& A, double lambda, int m,
                               const Eigen::VectorXd& p, RngStream& rng);

// Sketched Hessian of the regularized quadratic at the sample:
//   sketch_and_solve: (SA)^T (SA) + lambda' I
//   newton_sketch:    (lambda / lambda') (SA)^T (SA) + lambda I
// The two differ exactly by the factor lambda / lambda'.
Eigen::MatrixXd surrogate_sketched_hessian(const SurrogateSample& sample,
                                           const Eigen::MatrixXd& A, double lambda,
                                           HessianVariant variant);

}  // namespace desketch
