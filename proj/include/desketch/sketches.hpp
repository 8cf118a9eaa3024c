#pragma once
// Standard sketch families: Gaussian, Rademacher, uniform and importance row
// sampling. Each family is rescaled so that E[S^T S] = I. Row-sampling
// sketches stay in (index, weight) form and are applied by gather-and-scale;
// dense families carry the explicit m x n matrix.

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "desketch/rng.hpp"

namespace desketch {

enum class SketchFamily {
  gaussian,
  rademacher,
  uniform_rows,
  importance_rows,
  surrogate,  // resolved by the surrogate module; needs the data matrix
};

const char* to_string(SketchFamily family);

struct SketchSpec {
  SketchFamily family = SketchFamily::gaussian;
  int m = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd probabilities;  // importance_rows only; must sum to 1
  double lambda = 0.0;            // surrogate only: global regularizer

  static SketchSpec gaussian(int m, std::uint64_t seed);
  static SketchSpec rademacher(int m, std::uint64_t seed);
  static SketchSpec uniform_rows(int m, std::uint64_t seed);
  static SketchSpec importance_rows(int m, std::uint64_t seed, Eigen::VectorXd p);
};

struct SketchSample {
  // Row-sampling families: sampled (row index, weight) pairs, weight
  // 1/sqrt(p_i * m). Dense families: the explicit matrix.
  std::vector<std::pair<Eigen::Index, double>> rows;
  Eigen::MatrixXd dense;

  bool is_dense() const { return dense.size() > 0; }
  // Explicit m x n matrix for either representation.
  Eigen::MatrixXd as_matrix(Eigen::Index n) const;
};

// Deterministic given (spec, rng state). The caller supplies one stream per
// concurrent draw; draw_sketch never shares hidden state.
SketchSample draw_sketch(const SketchSpec& spec, Eigen::Index n, RngStream& rng);

// (SA, Sb). Row-sampling samples are gathered and scaled without forming S.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> apply_sketch(const SketchSample& s,
                                                         const Eigen::MatrixXd& A,
                                                         const Eigen::VectorXd& b);

// p_i = l_i(lambda) / d_lambda with l_i(lambda) = a_i^T (A^T A + lambda I)^-1 a_i.
// Exact by construction; sums to 1.
Eigen::VectorXd ridge_leverage_probabilities(const Eigen::MatrixXd& A, double lambda);

}  // namespace desketch
