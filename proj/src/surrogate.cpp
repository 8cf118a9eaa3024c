#include "desketch/surrogate.hpp"

#include <algorithm>
#include <cmath>

#include "desketch/errors.hpp"
#include "desketch/sketches.hpp"

namespace desketch {

SurrogateSketcher::SurrogateSketcher(Eigen::MatrixXd A, double lambda, int m,
                                     Eigen::VectorXd p, DppMethod method,
                                     RejectionConfig rejection_cfg,
                                     std::uint64_t precompute_seed)
    : A_(std::move(A)), lambda_(lambda), m_(m), p_(std::move(p)) {
  if (!(lambda_ > 0.0)) throw InputError("SurrogateSketcher: lambda must be positive");
  detail::require_finite(A_, "SurrogateSketcher.A");

  d_lambda_ = effective_dimension(A_, lambda_);
  const ScaledRegularizer sr = scaled_regularizer(lambda_, d_lambda_, m_);
  gamma_ = sr.gamma;
  lambda_prime_ = sr.lambda_prime;

  if (p_.size() == 0) {
    p_ = ridge_leverage_probabilities(A_, lambda_);
  } else if (p_.size() != A_.rows()) {
    throw InputError("SurrogateSketcher: probability vector length must equal n");
  } else {
    if ((p_.array() < 0.0).any() || std::abs(p_.sum() - 1.0) > 1e-12) {
      throw InputError("SurrogateSketcher: invalid probability vector");
    }
    for (Eigen::Index i = 0; i < A_.rows(); ++i) {
      if (p_[i] <= 0.0 && A_.row(i).squaredNorm() > 0.0) {
        throw InputError("SurrogateSketcher: zero probability on a nonzero row");
      }
    }
  }

  const Eigen::MatrixXd kernel_factor = A_ / std::sqrt(lambda_);
  if (method == DppMethod::spectral) {
    spectral_.emplace(kernel_factor);
  } else {
    LeveragePrecompute pre =
        precompute_leverage(kernel_factor, LeverageMode::exact, 0, precompute_seed);
    rejection_.emplace(kernel_factor, std::move(pre), rejection_cfg);
  }
  iid_proposal_.emplace(p_.data(), static_cast<std::size_t>(p_.size()));
}

SurrogateSample SurrogateSketcher::draw(RngStream& rng) const {
  SurrogateSample out;
  out.m = m_;
  out.gamma = gamma_;
  out.lambda_prime = lambda_prime_;

  if (spectral_) {
    out.dpp_indices = spectral_->draw(rng);
  } else {
    out.dpp_indices = rejection_->draw(rng, &out.rejection_rounds);
  }
  for (const Eigen::Index idx : out.dpp_indices) {
    if (!(p_[idx] > 0.0)) {
      throw InputError("SurrogateSketcher: DPP selected a row with zero probability");
    }
  }

  const std::uint64_t iid_count = rng.poisson(gamma_);
  out.iid_indices.reserve(iid_count);
  for (std::uint64_t j = 0; j < iid_count; ++j) {
    out.iid_indices.push_back(static_cast<Eigen::Index>(iid_proposal_->draw(rng)));
  }

  out.permuted.reserve(out.dpp_indices.size() + out.iid_indices.size());
  out.permuted.insert(out.permuted.end(), out.dpp_indices.begin(), out.dpp_indices.end());
  out.permuted.insert(out.permuted.end(), out.iid_indices.begin(), out.iid_indices.end());
  // Fisher-Yates with the caller's stream.
  for (std::size_t i = out.permuted.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(out.permuted[i - 1], out.permuted[j]);
  }

  out.weights.resize(static_cast<Eigen::Index>(out.permuted.size()));
  for (std::size_t i = 0; i < out.permuted.size(); ++i) {
    out.weights[static_cast<Eigen::Index>(i)] =
        1.0 / std::sqrt(static_cast<double>(m_) * p_[out.permuted[i]]);
  }
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> SurrogateSketcher::apply(
    const SurrogateSample& sample, const Eigen::VectorXd& b) const {
  if (b.size() != A_.rows()) throw InputError("SurrogateSketcher::apply: b length mismatch");
  const Eigen::Index rows = sample.count();
  Eigen::MatrixXd SA(rows, A_.cols());
  Eigen::VectorXd Sb(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::Index idx = sample.permuted[static_cast<std::size_t>(i)];
    SA.row(i) = sample.weights[i] * A_.row(idx);
    Sb[i] = sample.weights[i] * b[idx];
  }
  return {std::move(SA), std::move(Sb)};
}

Eigen::MatrixXd SurrogateSketcher::apply_matrix(const SurrogateSample& sample) const {
  const Eigen::Index rows = sample.count();
  Eigen::MatrixXd SA(rows, A_.cols());
  for (Eigen::Index i = 0; i < rows; ++i) {
    SA.row(i) = sample.weights[i] * A_.row(sample.permuted[static_cast<std::size_t>(i)]);
  }
  return SA;
}

SurrogateSample draw_surrogate(const Eigen::MatrixXd& A, double lambda, int m,
                               const Eigen::VectorXd& p, RngStream& rng) {
  SurrogateSketcher sketcher(A, lambda, m, p);
  return sketcher.draw(rng);
}

Eigen::MatrixXd surrogate_sketched_hessian(const SurrogateSample& sample,
                                           const Eigen::MatrixXd& A, double lambda,
                                           HessianVariant variant) {
  if (!(sample.lambda_prime > 0.0)) {
    throw InfeasibleError("surrogate_sketched_hessian: lambda' must be positive");
  }
  const Eigen::Index d = A.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < sample.permuted.size(); ++i) {
    const double w = sample.weights[static_cast<Eigen::Index>(i)];
    gram.selfadjointView<Eigen::Lower>().rankUpdate(A.row(sample.permuted[i]).transpose(),
                                                    w * w);
  }
  gram.triangularView<Eigen::Upper>() = gram.transpose();
  if (variant == HessianVariant::sketch_and_solve) {
    gram.diagonal().array() += sample.lambda_prime;
  } else {
    gram *= lambda / sample.lambda_prime;
    gram.diagonal().array() += lambda;
  }
  return gram;
}

}  // namespace desketch
