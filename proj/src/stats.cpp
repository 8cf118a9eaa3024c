#include "desketch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace desketch::stats {

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    s.stderr_mean = s.stddev / std::sqrt(static_cast<double>(xs.size()));
  }
  return s;
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median: empty sample");
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  std::nth_element(xs.begin(), xs.begin() + mid - 1, xs.begin() + mid);
  return 0.5 * (hi + xs[mid - 1]);
}

namespace {

// Series expansion of P(a,x), valid for x < a+1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a,x), valid for x >= a+1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("regularized_gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("regularized_gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_sf(double statistic, double df) {
  if (statistic <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * df, 0.5 * statistic);
}

ChiSquareResult chi_square_goodness_of_fit(const std::vector<std::uint64_t>& observed,
                                           const std::vector<double>& expected_probs,
                                           double min_expected) {
  if (observed.size() != expected_probs.size()) {
    throw std::invalid_argument("chi_square_goodness_of_fit: size mismatch");
  }
  const double n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  double stat = 0.0;
  std::size_t cells = 0;
  double pooled_obs = 0.0;
  double pooled_exp = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = n * expected_probs[i];
    if (expected < min_expected) {
      pooled_obs += static_cast<double>(observed[i]);
      pooled_exp += expected;
      continue;
    }
    const double diff = static_cast<double>(observed[i]) - expected;
    stat += diff * diff / expected;
    ++cells;
  }
  if (pooled_exp >= min_expected) {
    const double diff = pooled_obs - pooled_exp;
    stat += diff * diff / pooled_exp;
    ++cells;
  }
  ChiSquareResult r;
  r.statistic = stat;
  r.cells = cells;
  r.df = cells > 1 ? static_cast<double>(cells - 1) : 1.0;
  r.p_value = chi_square_sf(stat, r.df);
  return r;
}

ChiSquareResult chi_square_two_sample(const std::vector<std::uint64_t>& counts_a,
                                      const std::vector<std::uint64_t>& counts_b,
                                      double min_expected) {
  if (counts_a.size() != counts_b.size()) {
    throw std::invalid_argument("chi_square_two_sample: size mismatch");
  }
  const double na = static_cast<double>(std::accumulate(counts_a.begin(), counts_a.end(), std::uint64_t{0}));
  const double nb = static_cast<double>(std::accumulate(counts_b.begin(), counts_b.end(), std::uint64_t{0}));
  double stat = 0.0;
  std::size_t cells = 0;
  double pa = 0.0, pb = 0.0;  // pooled low-count cells
  auto add_cell = [&](double oa, double ob) {
    // Expected counts under homogeneity, conditional on the margins.
    const double total = oa + ob;
    const double ea = total * na / (na + nb);
    const double eb = total * nb / (na + nb);
    stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    ++cells;
  };
  for (std::size_t i = 0; i < counts_a.size(); ++i) {
    const double oa = static_cast<double>(counts_a[i]);
    const double ob = static_cast<double>(counts_b[i]);
    const double total = oa + ob;
    if (total == 0.0) continue;
    if (total * std::min(na, nb) / (na + nb) < min_expected) {
      pa += oa;
      pb += ob;
      continue;
    }
    add_cell(oa, ob);
  }
  if (pa + pb > 0.0) add_cell(pa, pb);
  ChiSquareResult r;
  r.statistic = stat;
  r.cells = cells;
  r.df = cells > 1 ? static_cast<double>(cells - 1) : 1.0;
  r.p_value = chi_square_sf(stat, r.df);
  return r;
}

double total_variation(const std::vector<std::uint64_t>& observed,
                       const std::vector<double>& reference_probs) {
  if (observed.size() != reference_probs.size()) {
    throw std::invalid_argument("total_variation: size mismatch");
  }
  const double n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  if (n == 0.0) return 1.0;
  double tv = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    tv += std::abs(static_cast<double>(observed[i]) / n - reference_probs[i]);
  }
  return 0.5 * tv;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("log_log_slope: need >= 2 paired points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("log_log_slope: nonpositive value");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) throw std::invalid_argument("log_log_slope: degenerate x grid");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace desketch::stats
