#include "desketch/sketches.hpp"

#include <cmath>

#include "desketch/errors.hpp"
#include "desketch/problem.hpp"

namespace desketch {

const char* to_string(SketchFamily family) {
  switch (family) {
    case SketchFamily::gaussian: return "gaussian";
    case SketchFamily::rademacher: return "rademacher";
    case SketchFamily::uniform_rows: return "uniform_rows";
    case SketchFamily::importance_rows: return "importance_rows";
    case SketchFamily::surrogate: return "surrogate";
  }
  return "?";
}

SketchSpec SketchSpec::gaussian(int m, std::uint64_t seed) {
  return {SketchFamily::gaussian, m, seed, {}, 0.0};
}

SketchSpec SketchSpec::rademacher(int m, std::uint64_t seed) {
  return {SketchFamily::rademacher, m, seed, {}, 0.0};
}

SketchSpec SketchSpec::uniform_rows(int m, std::uint64_t seed) {
  return {SketchFamily::uniform_rows, m, seed, {}, 0.0};
}

SketchSpec SketchSpec::importance_rows(int m, std::uint64_t seed, Eigen::VectorXd p) {
  return {SketchFamily::importance_rows, m, seed, std::move(p), 0.0};
}

namespace {

void validate_probabilities(const Eigen::VectorXd& p) {
  if ((p.array() < 0.0).any()) throw InputError("sketch probabilities: negative entry");
  if (std::abs(p.sum() - 1.0) > 1e-12) throw InputError("sketch probabilities: must sum to 1");
}

}  // namespace

Eigen::MatrixXd SketchSample::as_matrix(Eigen::Index n) const {
  if (is_dense()) return dense;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    S(static_cast<Eigen::Index>(i), rows[i].first) = rows[i].second;
  }
  return S;
}

SketchSample draw_sketch(const SketchSpec& spec, Eigen::Index n, RngStream& rng) {
  if (spec.m < 1) throw InputError("draw_sketch: m must be >= 1");
  if (n < 1) throw InputError("draw_sketch: n must be >= 1");
  SketchSample out;
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(spec.m));
  switch (spec.family) {
    case SketchFamily::gaussian: {
      out.dense.resize(spec.m, n);
      for (Eigen::Index i = 0; i < spec.m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) out.dense(i, j) = inv_sqrt_m * rng.gaussian();
      break;
    }
    case SketchFamily::rademacher: {
      out.dense.resize(spec.m, n);
      for (Eigen::Index i = 0; i < spec.m; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          out.dense(i, j) = (rng.next_u64() & 1u) ? inv_sqrt_m : -inv_sqrt_m;
      break;
    }
    case SketchFamily::uniform_rows: {
      const double weight = std::sqrt(static_cast<double>(n)) * inv_sqrt_m;
      out.rows.reserve(spec.m);
      for (int i = 0; i < spec.m; ++i) {
        const auto idx = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        out.rows.emplace_back(idx, weight);
      }
      break;
    }
    case SketchFamily::importance_rows: {
      if (spec.probabilities.size() != n) {
        throw InputError("draw_sketch: probability vector length must equal n");
      }
      validate_probabilities(spec.probabilities);
      CategoricalSampler cat(spec.probabilities.data(),
                             static_cast<std::size_t>(spec.probabilities.size()));
      out.rows.reserve(spec.m);
      for (int i = 0; i < spec.m; ++i) {
        const auto idx = static_cast<Eigen::Index>(cat.draw(rng));
        out.rows.emplace_back(idx, 1.0 / std::sqrt(spec.probabilities[idx] * spec.m));
      }
      break;
    }
    case SketchFamily::surrogate:
      throw InputError("draw_sketch: surrogate sketches need the data matrix; use SurrogateSketcher");
  }
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> apply_sketch(const SketchSample& s,
                                                         const Eigen::MatrixXd& A,
                                                         const Eigen::VectorXd& b) {
  if (b.size() != A.rows()) throw InputError("apply_sketch: A/b dimension mismatch");
  if (s.is_dense()) {
    if (s.dense.cols() != A.rows()) throw InputError("apply_sketch: sketch width != row count");
    return {s.dense * A, s.dense * b};
  }
  const auto m = static_cast<Eigen::Index>(s.rows.size());
  Eigen::MatrixXd SA(m, A.cols());
  Eigen::VectorXd Sb(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto [idx, w] = s.rows[static_cast<std::size_t>(i)];
    if (idx < 0 || idx >= A.rows()) throw InputError("apply_sketch: row index out of range");
    SA.row(i) = w * A.row(idx);
    Sb[i] = w * b[idx];
  }
  return {std::move(SA), std::move(Sb)};
}

Eigen::VectorXd ridge_leverage_probabilities(const Eigen::MatrixXd& A, double lambda) {
  if (!(lambda > 0.0)) throw InputError("ridge_leverage_probabilities: lambda must be positive");
  detail::require_finite(A, "ridge_leverage_probabilities.A");
  Eigen::MatrixXd H = A.transpose() * A;
  H.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    throw SolverError("ridge_leverage_probabilities: factorization failed");
  }
  Eigen::VectorXd scores(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const Eigen::VectorXd row = A.row(i).transpose();
    scores[i] = row.dot(llt.solve(row));
  }
  const double total = scores.sum();  // = d_lambda
  if (!(total > 0.0)) throw InputError("ridge_leverage_probabilities: zero data matrix");
  return scores / total;
}

}  // namespace desketch
