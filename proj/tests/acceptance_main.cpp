// Acceptance suite: one callable check per criterion, each printing a single
// PASS/FAIL line. Run "acceptance <n>" for one criterion, "acceptance smoke"
// for the large-instance smoke run, or "acceptance" for everything.

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "desketch/datasets.hpp"
#include "desketch/distributed.hpp"
#include "desketch/dpp.hpp"
#include "desketch/experiments.hpp"
#include "desketch/parallel.hpp"
#include "desketch/problem.hpp"
#include "desketch/stats.hpp"

using namespace desketch;
namespace st = desketch::stats;

namespace {

struct Outcome {
  bool pass = true;
  std::string details;
};

Eigen::MatrixXd seeded_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  RngStream rng(seed);
  Eigen::MatrixXd A(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) A(i, j) = rng.gaussian();
  return A;
}

Eigen::VectorXd seeded_vector(Eigen::Index n, std::uint64_t seed) {
  RngStream rng(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.gaussian();
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Scaled-regularizer formula at the housing operating point.
// ---------------------------------------------------------------------------
Outcome criterion1() {
  Outcome out;
  const Dataset ds = make_boston_like();
  const double d_lambda = effective_dimension(ds.X, 10.0);
  const double lambda_prime = scaled_regularizer(10.0, d_lambda, 50).lambda_prime;
  // Inverting lambda' = lambda (1 - d_lambda/m) at the published value 4.06
  // gives d_lambda = 29.7; the eigendecomposition route must agree.
  const double d_lambda_implied = 50.0 * (1.0 - 4.06 / 10.0);
  out.pass = std::abs(lambda_prime - 4.06) <= 0.01 &&
             std::abs(d_lambda - d_lambda_implied) <= 0.05;
  out.details = "d_lambda=" + fmt(d_lambda) + " lambda'=" + fmt(lambda_prime);

  // Optional: user-supplied Boston housing (features + price in the last
  // column) checked against the documented band.
  const char* path = "data/boston_housing.csv";
  if (std::filesystem::exists(path)) {
    const Dataset real = load_dataset(path, DataFormat::csv,
                                      Preprocessing::standardize_columns);
    const double dl = effective_dimension(real.X, 10.0);
    const double lp = dl < 50.0 ? scaled_regularizer(10.0, dl, 50).lambda_prime
                                : std::nan("");
    out.pass = out.pass && lp >= 3.5 && lp <= 4.6;
    out.details += " user_boston_lambda'=" + fmt(lp);
  } else {
    out.details += " (no user boston file; band check skipped)";
  }
  return out;
}

// ---------------------------------------------------------------------------
// 2. DPP exactness: both samplers against the enumeration oracle.
// ---------------------------------------------------------------------------
Outcome criterion2() {
  Outcome out;
  struct Instance {
    Eigen::Index n, d;
    std::uint64_t seed;
    double lambda;
  };
  const std::vector<Instance> instances = {
      {4, 2, 11, 1.0}, {6, 2, 12, 0.8}, {6, 3, 13, 1.5}, {8, 3, 14, 1.0}};
  const std::size_t draws = 100000;
  std::ostringstream detail;

  for (const Instance& inst : instances) {
    Eigen::MatrixXd A = seeded_matrix(inst.n, inst.d, inst.seed);
    // Decaying row norms concentrate the subset distribution, keeping the
    // finite-sample TV of 1e5 draws well under the 0.01 budget.
    for (Eigen::Index i = 0; i < inst.n; ++i) {
      A.row(i) *= std::pow(0.6, static_cast<double>(i));
    }
    A *= 2.0;
    const std::vector<double> oracle = subset_probability_oracle(A, inst.lambda);
    const Eigen::MatrixXd B = A / std::sqrt(inst.lambda);
    const DppSpectral spectral(B);
    const DppRejection rejection(B, precompute_leverage(B, LeverageMode::exact));

    std::vector<std::uint64_t> c_spec(oracle.size(), 0), c_rej(oracle.size(), 0);
    std::mutex merge;
    const unsigned threads = default_thread_count();
    const std::size_t chunks = threads * 8;
    const std::size_t chunk = (draws + chunks - 1) / chunks;
    parallel_for(chunks, threads, [&](std::size_t ci) {
      std::vector<std::uint64_t> ls(oracle.size(), 0), lr(oracle.size(), 0);
      for (std::size_t i = ci * chunk; i < std::min(draws, (ci + 1) * chunk); ++i) {
        RngStream ra = RngStream::derive(inst.seed, {0xacc2, 1, i});
        RngStream rb = RngStream::derive(inst.seed, {0xacc2, 2, i});
        std::uint64_t mask = 0;
        for (const Eigen::Index idx : spectral.draw(ra)) mask |= std::uint64_t{1} << idx;
        ++ls[mask];
        mask = 0;
        for (const Eigen::Index idx : rejection.draw(rb)) mask |= std::uint64_t{1} << idx;
        ++lr[mask];
      }
      std::lock_guard<std::mutex> lock(merge);
      for (std::size_t s = 0; s < oracle.size(); ++s) {
        c_spec[s] += ls[s];
        c_rej[s] += lr[s];
      }
    });

    const double tv_s = st::total_variation(c_spec, oracle);
    const double tv_r = st::total_variation(c_rej, oracle);
    const double p_s = st::chi_square_goodness_of_fit(c_spec, oracle).p_value;
    const double p_r = st::chi_square_goodness_of_fit(c_rej, oracle).p_value;
    const bool ok = tv_s <= 0.01 && tv_r <= 0.01 && p_s > 1e-3 && p_r > 1e-3;
    out.pass = out.pass && ok;
    detail << "n" << inst.n << "d" << inst.d << ":tv=" << fmt(tv_s) << "/" << fmt(tv_r)
           << ",p=" << fmt(p_s) << "/" << fmt(p_r) << " ";
  }
  out.details = detail.str();
  return out;
}

// ---------------------------------------------------------------------------
// 3. Expectation formulas for the determinantal design, N = 1e6 Monte Carlo.
// ---------------------------------------------------------------------------
Outcome criterion3() {
  Outcome out;
  struct Instance {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    double lambda;
    int m;
    std::uint64_t seed;
  };
  std::vector<Instance> instances;
  {
    Eigen::MatrixXd A(2, 2);
    A << std::sqrt(3.0), 0, 0, 1;
    instances.push_back({A, seeded_vector(2, 21), 1.0, 3, 31});
  }
  instances.push_back(
      {seeded_matrix(8, 3, 22), seeded_vector(8, 23), 0.8, 8, 32});

  const std::size_t draws = 1000000;
  std::ostringstream detail;
  for (const Instance& inst : instances) {
    const Eigen::Index d = inst.A.cols();
    const SurrogateSketcher sk(inst.A, inst.lambda, inst.m);
    const double gamma = sk.gamma();
    Eigen::MatrixXd H = inst.A.transpose() * inst.A;
    H.diagonal().array() += inst.lambda;
    const Eigen::MatrixXd H_inv = H.inverse();
    const Eigen::MatrixXd closed_inv = H_inv / gamma;
    const Eigen::VectorXd closed_vec = H_inv * (inst.A.transpose() * inst.b);

    Eigen::MatrixXd sum_inv = Eigen::MatrixXd::Zero(d, d), sumsq_inv = sum_inv;
    Eigen::VectorXd sum_vec = Eigen::VectorXd::Zero(d), sumsq_vec = sum_vec;
    double sum_cnt = 0.0, sumsq_cnt = 0.0;
    std::mutex merge;
    const unsigned threads = default_thread_count();
    const std::size_t chunks = threads * 8;
    const std::size_t chunk = (draws + chunks - 1) / chunks;
    parallel_for(chunks, threads, [&](std::size_t ci) {
      Eigen::MatrixXd l_sum_inv = Eigen::MatrixXd::Zero(d, d), l_sumsq_inv = l_sum_inv;
      Eigen::VectorXd l_sum_vec = Eigen::VectorXd::Zero(d), l_sumsq_vec = l_sum_vec;
      double l_sum_cnt = 0.0, l_sumsq_cnt = 0.0;
      for (std::size_t i = ci * chunk; i < std::min(draws, (ci + 1) * chunk); ++i) {
        RngStream rng = RngStream::derive(inst.seed, {0xacc3, i});
        const SurrogateSample s = sk.draw(rng);
        auto [SA, Sb] = sk.apply(s, inst.b);
        // X = sqrt(m) S, so A^T X^T X A = m SA^T SA and likewise for b.
        Eigen::MatrixXd inner = static_cast<double>(inst.m) * (SA.transpose() * SA);
        inner.diagonal().array() += inst.lambda * gamma;
        const Eigen::MatrixXd inv = inner.inverse();
        const Eigen::VectorXd vec =
            inv * (static_cast<double>(inst.m) * (SA.transpose() * Sb));
        l_sum_inv += inv;
        l_sumsq_inv += inv.cwiseProduct(inv);
        l_sum_vec += vec;
        l_sumsq_vec += vec.cwiseProduct(vec);
        const double cnt = static_cast<double>(s.count());
        l_sum_cnt += cnt;
        l_sumsq_cnt += cnt * cnt;
      }
      std::lock_guard<std::mutex> lock(merge);
      sum_inv += l_sum_inv;
      sumsq_inv += l_sumsq_inv;
      sum_vec += l_sum_vec;
      sumsq_vec += l_sumsq_vec;
      sum_cnt += l_sum_cnt;
      sumsq_cnt += l_sumsq_cnt;
    });

    const double N = static_cast<double>(draws);
    double worst_z = 0.0;
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) {
        const double mean = sum_inv(r, c) / N;
        const double var = sumsq_inv(r, c) / N - mean * mean;
        const double se = std::sqrt(std::max(var, 1e-300) / N);
        worst_z = std::max(worst_z, std::abs(mean - closed_inv(r, c)) / se);
      }
      const double mean_v = sum_vec[r] / N;
      const double var_v = sumsq_vec[r] / N - mean_v * mean_v;
      const double se_v = std::sqrt(std::max(var_v, 1e-300) / N);
      worst_z = std::max(worst_z, std::abs(mean_v - closed_vec[r]) / se_v);
    }
    const double mean_cnt = sum_cnt / N;
    const double se_cnt =
        std::sqrt(std::max(sumsq_cnt / N - mean_cnt * mean_cnt, 1e-300) / N);
    const double z_cnt = std::abs(mean_cnt - inst.m) / se_cnt;
    out.pass = out.pass && worst_z <= 3.0 && z_cnt <= 3.0;
    detail << "d" << d << ":max|z|=" << fmt(worst_z) << ",count_z=" << fmt(z_cnt) << " ";
  }
  out.details = detail.str();
  return out;
}

// ---------------------------------------------------------------------------
// 4. Unbiasedness: bias-vs-q slope for scaled surrogate, plateau when
//    unscaled. 20-seed medians on the housing-like problem.
// ---------------------------------------------------------------------------
Outcome criterion4() {
  Outcome out;
  const Dataset ds = make_boston_like();
  Problem problem(ds.X, ds.y, 10.0);
  std::vector<int> q_grid;
  for (int q = 1; q <= 1024; q *= 2) q_grid.push_back(q);
  const int seeds = 20;
  const double d_lambda = effective_dimension(problem.A, problem.lambda);

  BiasSweepSpec scaled;
  scaled.family = SketchFamily::surrogate;
  scaled.m = 50;
  scaled.lambda_local = scaled_regularizer(10.0, d_lambda, 50).lambda_prime;
  const auto err_scaled = averaged_estimate_errors(problem, scaled, q_grid, seeds,
                                                   0xacc4, 1, default_thread_count());
  BiasSweepSpec unscaled = scaled;
  unscaled.lambda_local = problem.lambda;
  const auto err_unscaled = averaged_estimate_errors(problem, unscaled, q_grid, seeds,
                                                     0xacc4, 2, default_thread_count());

  std::vector<double> qv, med_scaled, med_unscaled;
  for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
    qv.push_back(static_cast<double>(q_grid[qi]));
    med_scaled.push_back(st::median(err_scaled[qi]));
    med_unscaled.push_back(st::median(err_unscaled[qi]));
  }
  const double slope = st::log_log_slope(qv, med_scaled);
  const double plateau = med_unscaled.back() / med_unscaled.front();
  const double drop = med_scaled.front() / med_scaled.back();
  out.pass = slope >= -0.65 && slope <= -0.35 && plateau > 0.2 && drop >= 10.0;
  out.details = "slope=" + fmt(slope) + " plateau_ratio=" + fmt(plateau) +
                " scaled_drop=" + fmt(drop) + "x" +
                " bias1024(unscaled)=" + fmt(med_unscaled.back());
  return out;
}

// ---------------------------------------------------------------------------
// 5. Concentration: doubling q shrinks the median spectral error by ~sqrt(2).
// ---------------------------------------------------------------------------
Outcome criterion5() {
  Outcome out;
  const Dataset ds = make_synthetic_regression(300, 10, 1.0, 41);
  const double lambda = 20.0;
  const int m = 40;
  const int trials = 50;
  std::vector<double> medians;
  std::ostringstream detail;
  for (const int q : {4, 8, 16, 32}) {
    const std::vector<double> errs =
        concentration_probe(ds.X, lambda, m, q, trials, 0xacc5 + q, default_thread_count());
    medians.push_back(st::median(errs));
  }
  detail << "medians=";
  for (const double m_ : medians) detail << fmt(m_) << " ";
  for (std::size_t i = 0; i + 1 < medians.size(); ++i) {
    const double ratio = medians[i] / medians[i + 1];
    detail << "ratio=" << fmt(ratio) << " ";
    out.pass = out.pass && ratio >= 1.2 && ratio <= 1.7;
  }
  out.details = detail.str();
  return out;
}

// ---------------------------------------------------------------------------
// 6. Convergence trend on a seeded quadratic: contraction improves with q
//    and is <= 0.1 at q = 100.
// ---------------------------------------------------------------------------
Outcome criterion6() {
  Outcome out;
  const Eigen::Index n = 2000, d = 20;
  const Eigen::MatrixXd A = seeded_matrix(n, d, 51);
  const Eigen::VectorXd b = A * seeded_vector(d, 52) + seeded_vector(n, 53);
  const double lambda = 50.0;  // d_lambda ~ 17 at this scale
  const LossModel quad = LossModel::quadratic(A, b, lambda);
  const int seeds = 20;
  const int t_max = 5;

  std::map<int, std::vector<double>> ratios;  // q -> contraction samples
  std::mutex merge;
  struct Job {
    int q;
    int seed;
  };
  std::vector<Job> jobs;
  for (const int q : {1, 10, 100}) {
    for (int s = 0; s < seeds; ++s) jobs.push_back({q, s});
  }
  parallel_for(jobs.size(), default_thread_count(), [&](std::size_t j) {
    SketchConfig sk;
    sk.family = SketchFamily::surrogate;
    sk.m = 4 * static_cast<int>(d);
    sk.scaled = true;
    DistributedOptions opts;
    opts.q = jobs[j].q;
    opts.t_max = t_max;
    opts.threads = 1;
    const std::uint64_t run_seed =
        RngStream::derive(0xacc6, {static_cast<std::uint64_t>(jobs[j].q),
                                   static_cast<std::uint64_t>(jobs[j].seed)})
            .next_u64();
    const RunResult res = run_distributed(quad, SolverKind::dist_ihs, sk, opts, run_seed);
    std::vector<double> local;
    for (std::size_t t = 0; t + 1 < res.traces.size(); ++t) {
      const double before = res.traces[t].err_H;
      const double after = res.traces[t + 1].err_H;
      if (before > 1e-12) local.push_back(after / before);
    }
    std::lock_guard<std::mutex> lock(merge);
    auto& bucket = ratios[jobs[j].q];
    bucket.insert(bucket.end(), local.begin(), local.end());
  });

  const double c1 = st::median(ratios[1]);
  const double c10 = st::median(ratios[10]);
  const double c100 = st::median(ratios[100]);
  out.pass = c1 > c10 && c10 > c100 && c100 <= 0.1;
  out.details = "contraction(q=1)=" + fmt(c1) + " (q=10)=" + fmt(c10) +
                " (q=100)=" + fmt(c100);
  return out;
}

// ---------------------------------------------------------------------------
// 7. Logistic speedup: scaled lambda' reaches 1e-6 in strictly fewer
//    iterations than unscaled on >= 15/20 seeds.
// ---------------------------------------------------------------------------
Outcome criterion7() {
  Outcome out;
  const Dataset ds = resolve_dataset("statlog-like", Preprocessing::none);
  const LossModel loss = LossModel::logistic(ds.X, ds.y, 1e-4);
  const int seeds = 20;
  const int t_max = 25;
  const double target = 1e-6;

  std::vector<int> iters_scaled(seeds), iters_unscaled(seeds);
  struct Job {
    bool scaled;
    int seed;
  };
  std::vector<Job> jobs;
  for (int s = 0; s < seeds; ++s) {
    jobs.push_back({true, s});
    jobs.push_back({false, s});
  }
  parallel_for(jobs.size(), default_thread_count(), [&](std::size_t j) {
    SketchConfig sk;
    sk.family = SketchFamily::surrogate;
    sk.m = 50;
    sk.scaled = jobs[j].scaled;
    DistributedOptions opts;
    opts.q = 100;
    opts.t_max = t_max;
    opts.rel_tol = target;
    opts.threads = 1;
    const std::uint64_t run_seed =
        RngStream::derive(0xacc7, {jobs[j].scaled ? 1u : 0u,
                                   static_cast<std::uint64_t>(jobs[j].seed)})
            .next_u64();
    const RunResult res = run_distributed(loss, SolverKind::dist_newton_sketch, sk, opts,
                                          run_seed);
    const double x_norm = std::max(res.x_star.norm(), 1e-300);
    int reached = t_max + 1;
    for (const IterationTrace& tr : res.traces) {
      if (tr.err_l2 / x_norm <= target) {
        reached = tr.t;
        break;
      }
    }
    (jobs[j].scaled ? iters_scaled : iters_unscaled)[jobs[j].seed] = reached;
  });

  int wins = 0;
  int scaled_solved = 0;
  for (int s = 0; s < seeds; ++s) {
    if (iters_scaled[s] < iters_unscaled[s]) ++wins;
    if (iters_scaled[s] <= t_max) ++scaled_solved;
  }
  out.pass = wins >= 15 && scaled_solved == seeds;
  out.details = "wins=" + std::to_string(wins) + "/20, median iters scaled=" +
                fmt(st::median(std::vector<double>(iters_scaled.begin(), iters_scaled.end()))) +
                " unscaled=" +
                fmt(st::median(std::vector<double>(iters_unscaled.begin(),
                                                   iters_unscaled.end())));
  return out;
}

// ---------------------------------------------------------------------------
// 8. Averaging comparison: surrogate beats unweighted and determinantal
//    averaging at the largest q for every sketch size in the sweep.
// ---------------------------------------------------------------------------
Outcome criterion8() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.experiment = "avg_compare";
  cfg.dataset = "synthetic-reg:n=500,d=10,noise=1,seed=1";
  cfg.lambda = 5.0;
  cfg.m_grid = {20, 50, 100};
  cfg.trials = 100;
  // Large enough q that the baselines' bias floors dominate their shrinking
  // variance; the orderings are then stable rather than borderline.
  cfg.q_grid = {1, 8, 64, 512};
  cfg.seed = 0xacc8;
  cfg.threads = default_thread_count();
  const ExperimentReport r = run_averaging_comparison(cfg);

  // Collect mean error at the largest q per (method, m).
  std::map<std::pair<std::string, int>, double> at_largest;
  const int largest_q = cfg.q_grid.back();
  for (const auto& row : r.rows) {
    const std::string method = std::get<std::string>(row[0]);
    const int m = static_cast<int>(std::get<std::int64_t>(row[1]));
    const int q = static_cast<int>(std::get<std::int64_t>(row[2]));
    if (q == largest_q) at_largest[{method, m}] = std::get<double>(row[4]);
  }
  std::ostringstream detail;
  for (const int m : cfg.m_grid) {
    const double sur = at_largest[{"surrogate", m}];
    const double unw = at_largest[{"uniform_unweighted", m}];
    const double det = at_largest[{"uniform_determinantal", m}];
    const bool ok = sur < unw && sur < det;
    out.pass = out.pass && ok;
    detail << "m=" << m << ":sur=" << fmt(sur) << ",unw=" << fmt(unw)
           << ",det=" << fmt(det) << " ";
  }
  out.details = detail.str();
  return out;
}

// ---------------------------------------------------------------------------
// 9. Property suites: cross-module identities restated compactly. The full
//    per-module property tests run in the unit suite; this re-asserts the
//    load-bearing ones end to end.
// ---------------------------------------------------------------------------
Outcome criterion9() {
  Outcome out;
  std::ostringstream detail;
  auto expect = [&](bool ok, const char* what) {
    out.pass = out.pass && ok;
    if (!ok) detail << "FAILED:" << what << " ";
  };

  // Hessian-variant identity and local-model reconstruction on all losses.
  const Eigen::MatrixXd A = seeded_matrix(40, 5, 61);
  const double lambda = 0.9;
  const SurrogateSketcher sk(A, lambda, 20);
  RngStream rng(62);
  for (int i = 0; i < 50; ++i) {
    const SurrogateSample s = sk.draw(rng);
    const Eigen::MatrixXd sas =
        surrogate_sketched_hessian(s, A, lambda, HessianVariant::sketch_and_solve);
    const Eigen::MatrixXd ns =
        surrogate_sketched_hessian(s, A, lambda, HessianVariant::newton_sketch);
    expect((ns - (lambda / s.lambda_prime) * sas).norm() <= 1e-12 * ns.norm(),
           "hessian_variant_identity");
  }

  Eigen::VectorXd labels(40);
  RngStream lrng(63);
  for (int i = 0; i < 40; ++i) labels[i] = lrng.bernoulli(0.5) ? 1.0 : 0.0;
  const std::vector<LossModel> losses = {
      LossModel::quadratic(A, seeded_vector(40, 64), lambda),
      LossModel::logistic(A, labels, lambda),
      LossModel::log_barrier(A, 10.0, 0.2 * seeded_vector(5, 65), lambda)};
  for (const LossModel& loss : losses) {
    for (int i = 0; i < 5; ++i) {
      const Eigen::VectorXd x = 0.2 * seeded_vector(5, 66 + i);
      if (!loss.in_domain(x)) continue;
      const LocalModel lm = local_model(loss, x);
      const Eigen::MatrixXd H = loss.hessian(x);
      const Eigen::VectorXd g = loss.gradient(x);
      expect((lm.hessian() - H).norm() <= 1e-10 * H.norm(), "local_model_hessian");
      expect((lm.gradient() - g).norm() <= 1e-10 * g.norm() + 1e-12, "local_model_gradient");
      const Eigen::VectorXd dir = -H.llt().solve(g);
      if (g.dot(dir) < 0.0) {
        const double alpha = backtracking_line_search(loss, x, dir);
        expect(loss.value(x + alpha * dir) <=
                   loss.value(x) + 0.1 * alpha * g.dot(dir) + 1e-12,
               "armijo");
      }
    }
  }

  // Leverage sandwich (exact mode) bounds.
  const LeveragePrecompute pre = precompute_leverage(A, LeverageMode::exact);
  expect(spectral_sandwich_holds(pre.C, A.transpose() * A, 1e-9), "exact_sandwich");

  // Mahalanobis inequality on every traced iteration of a live run.
  const LossModel quad = LossModel::quadratic(A, seeded_vector(40, 64), lambda);
  SketchConfig skc;
  skc.family = SketchFamily::surrogate;
  skc.m = 20;
  DistributedOptions opts;
  opts.q = 8;
  opts.t_max = 6;
  const RunResult res = run_distributed(quad, SolverKind::dist_ihs, skc, opts, 67);
  for (std::size_t t = 0; t + 1 < res.traces.size(); ++t) {
    expect(res.traces[t].maha_lhs <= res.traces[t].maha_rhs * (1 + 1e-9) + 1e-12,
           "mahalanobis_bound");
  }

  // Determinism: byte-identical reports across thread counts.
  ExperimentConfig cfg;
  cfg.experiment = "bias_sweep";
  cfg.dataset = "synthetic-reg:n=60,d=5,noise=1,seed=9";
  cfg.family = SketchFamily::surrogate;
  cfg.m = 15;
  cfg.lambda = 1.0;
  cfg.q_grid = {1, 2, 4};
  cfg.trials = 4;
  cfg.seed = 68;
  cfg.threads = 1;
  const std::string csv1 = render_csv(run_bias_sweep(cfg));
  cfg.threads = 4;
  const std::string csv4 = render_csv(run_bias_sweep(cfg));
  expect(csv1 == csv4, "report_determinism");

  if (out.pass) detail << "all property groups hold";
  out.details = detail.str();
  return out;
}

// ---------------------------------------------------------------------------
// Smoke: n=2000, d=300 completes and shows the scaled/unscaled gap.
// ---------------------------------------------------------------------------
Outcome smoke() {
  Outcome out;
  const Eigen::Index n = 2000, d = 300;
  const Eigen::MatrixXd A = seeded_matrix(n, d, 71);
  const Eigen::VectorXd b = A * seeded_vector(d, 72) + seeded_vector(n, 73);
  const double lambda = 2000.0;
  Problem problem(A, b, lambda);
  const double d_lambda = effective_dimension(A, lambda);
  const int m = static_cast<int>(2.5 * d_lambda);

  const Eigen::VectorXd x_star = solve_exact(problem);
  const SurrogateSketcher sk(A, lambda, m);
  const LossModel quad = LossModel::quadratic(A, b, lambda);
  const LocalModel model0 = local_model(quad, Eigen::VectorXd::Zero(d));

  const int q = 64;
  Eigen::VectorXd mean_scaled = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd mean_unscaled = Eigen::VectorXd::Zero(d);
  std::mutex merge;
  parallel_for(q, default_thread_count(), [&](std::size_t k) {
    RngStream rng = RngStream::derive(0xacc9, {k});
    const SurrogateSample s = sk.draw(rng);
    auto [SA, Sb] = sk.apply(s, model0.b_t);
    // Same draw solved under both local regularizers: a paired comparison.
    const Eigen::VectorXd xs = local_sas_estimate(model0, SA, Sb, sk.lambda_prime()).delta;
    const Eigen::VectorXd xu = local_sas_estimate(model0, SA, Sb, lambda).delta;
    std::lock_guard<std::mutex> lock(merge);
    mean_scaled += xs;
    mean_unscaled += xu;
  });
  mean_scaled /= q;
  mean_unscaled /= q;
  const double err_scaled = (mean_scaled - x_star).norm() / x_star.norm();
  const double err_unscaled = (mean_unscaled - x_star).norm() / x_star.norm();
  out.pass = err_scaled < err_unscaled;
  out.details = "n=2000 d=300 d_lambda=" + fmt(d_lambda) + " m=" + std::to_string(m) +
                " err_scaled=" + fmt(err_scaled) + " err_unscaled=" + fmt(err_unscaled);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::pair<std::string, std::function<Outcome()>>> table = {
      {"1", {"scaled-regularizer formula (lambda'=4.06 at d_lambda=29.7)", criterion1}},
      {"2", {"DPP samplers match the enumeration oracle (TV<=0.01, chi2 p>1e-3)", criterion2}},
      {"3", {"determinantal-design expectation formulas at N=1e6 (<=3 SE)", criterion3}},
      {"4", {"bias-vs-q: scaled slope in [-0.65,-0.35], unscaled plateau", criterion4}},
      {"5", {"concentration: q-doubling shrinks median error by [1.2,1.7]", criterion5}},
      {"6", {"contraction decreasing in q, <=0.1 at q=100", criterion6}},
      {"7", {"logistic speedup: scaled wins on >=15/20 seeds", criterion7}},
      {"8", {"surrogate beats unweighted and determinantal averaging", criterion8}},
      {"9", {"module property suites (identities, Armijo, bounds, determinism)", criterion9}},
      {"smoke", {"n=2000, d=300 completes with a scaled/unscaled gap", smoke}},
  };

  std::vector<std::string> selected;
  if (argc <= 1) {
    for (const auto& [key, entry] : table) selected.push_back(key);
  } else {
    for (int i = 1; i < argc; ++i) selected.emplace_back(argv[i]);
  }

  bool all_pass = true;
  for (const std::string& key : selected) {
    const auto it = table.find(key);
    if (it == table.end()) {
      std::cerr << "unknown criterion: " << key << "\n";
      return 2;
    }
    Outcome outcome;
    try {
      outcome = it->second.second();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.details = std::string("exception: ") + e.what();
    }
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << key << ": "
              << it->second.first << " [" << outcome.details << "]" << std::endl;
    all_pass = all_pass && outcome.pass;
  }
  return all_pass ? 0 : 1;
}
