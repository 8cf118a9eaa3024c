#pragma once
// Small statistics toolbox shared by the experiment harness and the test
// suites: summaries, chi-square tests over enumerated supports, total
// variation distance, and a log-log slope fit.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace desketch::stats {

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;   // sample standard deviation (n-1)
  double stderr_mean = 0.0;
};

Summary summarize(const std::vector<double>& xs);
double median(std::vector<double> xs);  // by value: partial_sorts a copy

// Lower regularized incomplete gamma P(a, x); Q = 1 - P.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Survival function of the chi-square distribution with df degrees of freedom.
double chi_square_sf(double statistic, double df);

struct ChiSquareResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  std::size_t cells = 0;  // after merging low-expectation cells
};

// Goodness of fit of observed counts against expected probabilities.
// Cells with expected count < min_expected are pooled into one remainder
// cell before computing the statistic.
ChiSquareResult chi_square_goodness_of_fit(const std::vector<std::uint64_t>& observed,
                                           const std::vector<double>& expected_probs,
                                           double min_expected = 5.0);

// Two-sample chi-square homogeneity test on a common enumerated support.
ChiSquareResult chi_square_two_sample(const std::vector<std::uint64_t>& counts_a,
                                      const std::vector<std::uint64_t>& counts_b,
                                      double min_expected = 5.0);

// Total variation distance between an empirical distribution (counts) and a
// reference probability vector on the same support.
double total_variation(const std::vector<std::uint64_t>& observed,
                       const std::vector<double>& reference_probs);

// Least-squares slope of log(y) against log(x); entries with x<=0 or y<=0
// are rejected.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace desketch::stats
