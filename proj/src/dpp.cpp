#include "desketch/dpp.hpp"

#include <algorithm>
#include <cmath>

#include "desketch/errors.hpp"
#include "desketch/problem.hpp"

namespace desketch {

namespace {

double log_det_identity_plus(const Eigen::MatrixXd& C) {
  Eigen::MatrixXd shifted = C;
  shifted.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) throw SolverError("log det: matrix not SPD");
  double ld = 0.0;
  for (Eigen::Index i = 0; i < shifted.rows(); ++i) {
    ld += std::log(llt.matrixLLT()(i, i));
  }
  return 2.0 * ld;
}

}  // namespace

DppSpectral::DppSpectral(const Eigen::MatrixXd& B) {
  detail::require_finite(B, "DppSpectral.B");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU);
  eigenvectors_ = svd.matrixU();
  eigenvalues_ = svd.singularValues().array().square();
}

double DppSpectral::expected_size() const {
  return (eigenvalues_.array() / (eigenvalues_.array() + 1.0)).sum();
}

std::vector<Eigen::Index> DppSpectral::draw(RngStream& rng) const {
  // Phase 1: pick the elementary process, eigenvector j enters with
  // probability s_j / (1 + s_j).
  std::vector<Eigen::Index> picked;
  for (Eigen::Index j = 0; j < eigenvalues_.size(); ++j) {
    const double s = eigenvalues_[j];
    if (rng.bernoulli(s / (1.0 + s))) picked.push_back(j);
  }
  std::vector<Eigen::Index> items;
  if (picked.empty()) return items;

  Eigen::MatrixXd V(eigenvectors_.rows(), static_cast<Eigen::Index>(picked.size()));
  for (std::size_t k = 0; k < picked.size(); ++k) {
    V.col(static_cast<Eigen::Index>(k)) = eigenvectors_.col(picked[k]);
  }

  // Phase 2: sequential sampling. Row norms of the orthonormal basis give
  // the item marginals; after each pick the basis is projected onto the
  // subspace vanishing at that item and re-orthonormalized.
  const Eigen::Index n = V.rows();
  Eigen::VectorXd row_mass(n);
  while (V.cols() > 0) {
    row_mass = V.rowwise().squaredNorm();
    const double total = row_mass.sum();
    double u = rng.uniform() * total;
    Eigen::Index item = n - 1;
    for (Eigen::Index a = 0; a < n; ++a) {
      u -= row_mass[a];
      if (u <= 0.0) {
        item = a;
        break;
      }
    }
    items.push_back(item);
    if (V.cols() == 1) break;

    Eigen::Index pivot = 0;
    V.row(item).cwiseAbs().maxCoeff(&pivot);
    const Eigen::VectorXd v = V.col(pivot);
    const double pivot_val = V(item, pivot);
    Eigen::MatrixXd W(n, V.cols() - 1);
    Eigen::Index w = 0;
    for (Eigen::Index j = 0; j < V.cols(); ++j) {
      if (j == pivot) continue;
      W.col(w++) = V.col(j) - v * (V(item, j) / pivot_val);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
    V = qr.householderQ() * Eigen::MatrixXd::Identity(n, W.cols());
  }
  std::sort(items.begin(), items.end());
  return items;
}

DppRejection::DppRejection(Eigen::MatrixXd B, LeveragePrecompute pre, RejectionConfig cfg)
    : B_(std::move(B)), pre_(std::move(pre)), max_rounds_(cfg.max_rounds) {
  if (max_rounds_ < 1) throw InputError("DppRejection: max_rounds must be >= 1");
  if (pre_.l_tilde.size() != B_.rows()) {
    throw InputError("DppRejection: precompute built for a different row count");
  }

  if (pre_.s <= 0.0) {
    degenerate_ = true;
    return;
  }

  // Exact quadratic forms b_i^T (C+I)^-1 b_i, computed once so draws are
  // const. The candidate loop only reads them.
  Eigen::MatrixXd shifted = pre_.C;
  shifted.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) throw SolverError("DppRejection: C + I not SPD");
  exact_forms_.resize(B_.rows());
  for (Eigen::Index i = 0; i < B_.rows(); ++i) {
    const Eigen::VectorXd row = B_.row(i).transpose();
    exact_forms_[i] = row.dot(llt.solve(row));
  }

  for (Eigen::Index i = 0; i < B_.rows(); ++i) {
    if (exact_forms_[i] > 1e-14 && !(pre_.l_tilde[i] > 0.0)) {
      throw InputError("DppRejection: zero leverage estimate on a live row");
    }
    if (pre_.l_tilde[i] > 0.0 && exact_forms_[i] / (2.0 * pre_.l_tilde[i]) > 1.0 + 1e-9) {
      throw SamplerError("DppRejection: thinning probability above 1; estimates too small");
    }
  }

  r_ = cfg.r > 0.0 ? cfg.r : std::max(1.0, pre_.s_tilde);
  poisson_mean_ = r_ * std::exp(1.0 / r_) * 2.0 * pre_.s;
  log_det_ic_ = log_det_identity_plus(pre_.C);
  proposal_.emplace(pre_.l_tilde.data(), static_cast<std::size_t>(pre_.l_tilde.size()));
}

std::vector<Eigen::Index> DppRejection::draw(RngStream& rng, int* rounds_out) const {
  if (degenerate_) {
    if (rounds_out) *rounds_out = 0;
    return {};
  }
  const Eigen::Index d = B_.cols();
  std::vector<Eigen::Index> pool;
  for (int round = 1; round <= max_rounds_; ++round) {
    // Oversampled candidate pool, thinned to intensity r e^{1/r} l_i.
    const std::uint64_t u = rng.poisson(poisson_mean_);
    pool.clear();
    for (std::uint64_t j = 0; j < u; ++j) {
      const auto idx = static_cast<Eigen::Index>(proposal_->draw(rng));
      const double keep = exact_forms_[idx] / (2.0 * pre_.l_tilde[idx]);
      if (rng.bernoulli(keep)) pool.push_back(idx);
    }
    const auto t = static_cast<Eigen::Index>(pool.size());

    Eigen::MatrixXd reduced(t, d);
    for (Eigen::Index i = 0; i < t; ++i) {
      reduced.row(i) = B_.row(pool[static_cast<std::size_t>(i)]) /
                       std::sqrt(r_ * exact_forms_[pool[static_cast<std::size_t>(i)]]);
    }
    const double log_acc = pre_.s_tilde + log_det_identity_plus(reduced.transpose() * reduced) -
                           static_cast<double>(t) / r_ - log_det_ic_;
    if (log_acc > 1e-9) {
      throw SamplerError("DppRejection: acceptance ratio above 1; invalid precompute");
    }
    if (std::log(rng.uniform_open()) >= log_acc) continue;

    if (t == 0) {
      if (rounds_out) *rounds_out = round;
      return {};
    }
    // Accepted: finish with an exact draw on the reduced kernel and map the
    // selected positions back to ground-set indices.
    const std::vector<Eigen::Index> inner = DppSpectral(reduced).draw(rng);
    std::vector<Eigen::Index> items;
    items.reserve(inner.size());
    for (const Eigen::Index pos : inner) items.push_back(pool[static_cast<std::size_t>(pos)]);
    std::sort(items.begin(), items.end());
    // Duplicate ground-set rows are never selected together (their joint
    // determinant vanishes), so the result is a set.
    items.erase(std::unique(items.begin(), items.end()), items.end());
    if (rounds_out) *rounds_out = round;
    return items;
  }
  throw SamplerError("DppRejection: max_rounds exceeded; check r and leverage estimates");
}

DppDraw dpp_sample_spectral(const Eigen::MatrixXd& A, double lambda, RngStream& rng) {
  if (!(lambda > 0.0)) throw InputError("dpp_sample_spectral: lambda must be positive");
  DppSpectral sampler(A / std::sqrt(lambda));
  DppDraw draw;
  draw.indices = sampler.draw(rng);
  draw.method = DppMethod::spectral;
  return draw;
}

DppDraw dpp_sample_rejection(const Eigen::MatrixXd& A, double lambda,
                             const LeveragePrecompute& pre, const RejectionConfig& cfg,
                             RngStream& rng) {
  if (!(lambda > 0.0)) throw InputError("dpp_sample_rejection: lambda must be positive");
  DppRejection sampler(A / std::sqrt(lambda), pre, cfg);
  DppDraw draw;
  draw.method = DppMethod::rejection;
  draw.indices = sampler.draw(rng, &draw.rejection_rounds);
  return draw;
}

std::vector<double> subset_probability_oracle(const Eigen::MatrixXd& A, double lambda) {
  if (!(lambda > 0.0)) throw InputError("subset_probability_oracle: lambda must be positive");
  const Eigen::Index n = A.rows();
  if (n > 20) throw InputError("subset_probability_oracle: refusing n > 20 (2^n table)");
  const Eigen::Index d = A.cols();

  std::vector<double> table(std::size_t{1} << n, 0.0);
  table[0] = 1.0;  // det of the empty kernel
  double total = 1.0;
  std::vector<Eigen::Index> members;
  for (std::uint64_t mask = 1; mask < table.size(); ++mask) {
    const int size = __builtin_popcountll(mask);
    if (size > d) continue;  // rank-deficient principal minor: det = 0
    members.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) members.push_back(i);
    }
    Eigen::MatrixXd gram(size, size);
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c <= r; ++c) {
        gram(r, c) = gram(c, r) = A.row(members[static_cast<std::size_t>(r)])
                                      .dot(A.row(members[static_cast<std::size_t>(c)])) /
                                  lambda;
      }
    }
    const double det = std::max(0.0, gram.determinant());
    table[mask] = det;
    total += det;
  }

  // Cauchy-Binet: the mass over all subsets equals det(I + (1/lambda) A^T A).
  Eigen::MatrixXd small = A.transpose() * A / lambda;
  small.diagonal().array() += 1.0;
  const double expected = small.determinant();
  if (std::abs(total - expected) > 1e-8 * std::max(1.0, expected)) {
    throw SolverError("subset_probability_oracle: normalization check failed");
  }
  for (auto& v : table) v /= total;
  return table;
}

}  // namespace desketch
