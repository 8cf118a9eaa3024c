#pragma once
// Preprocessing for the rejection-based DPP sampler: a spectral
// approximation C of A^T A plus cheap per-row over-estimates l~_i of the
// quadratic forms a_i^T (C + I)^-1 a_i.
//
// For the lambda-regularized kernel the caller passes A / sqrt(lambda), so
// that (C + I)^-1 quadratic forms coincide with lambda-ridge leverage forms.

#include <Eigen/Dense>
#include <cstdint>

namespace desketch {

struct LeveragePrecompute {
  Eigen::MatrixXd C;        // d x d, PSD, approximates A^T A
  Eigen::VectorXd l_tilde;  // length n, over-estimates of leverage forms
  double s = 0.0;           // sum of l_tilde
  double s_tilde = 0.0;     // tr(C (C + I)^-1)
};

enum class LeverageMode { exact, sketched };

// exact: C = A^T A and l~_i equals the quadratic form itself.
// sketched: C from a Rademacher row sketch with `sketch_rows` rows and l~
// from a 256-row sign projection of (C+I)^{-1/2} A^T. When verify is set the
// spectral sandwich (1 +- 1/(4 sqrt(d))) A^T A is checked by
// eigendecomposition; on failure the sketch is redrawn with doubled rows, up
// to 5 attempts, then a NumericalError-style SamplerError is raised.
LeveragePrecompute precompute_leverage(const Eigen::MatrixXd& A, LeverageMode mode,
                                       int sketch_rows = 0, std::uint64_t seed = 0,
                                       bool verify = false);

// True when (1 - slack) A^T A <= C <= (1 + slack) A^T A in the PSD order
// (checked on the range space of A^T A; C must vanish on its null space).
bool spectral_sandwich_holds(const Eigen::MatrixXd& C, const Eigen::MatrixXd& gram,
                             double slack);

}  // namespace desketch
