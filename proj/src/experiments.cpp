#include "desketch/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include <Eigen/Dense>

#include "desketch/dpp.hpp"
#include "desketch/errors.hpp"
#include "desketch/parallel.hpp"
#include "desketch/problem.hpp"
#include "desketch/stats.hpp"

namespace desketch {

namespace {

constexpr std::uint64_t kBiasTag = 0xb1a5;
constexpr std::uint64_t kCompareTag = 0xc03a;
constexpr std::uint64_t kSweepTag = 0x10ca1;
constexpr std::uint64_t kConvergeTag = 0xc09e;
constexpr std::uint64_t kDppTag = 0xd99;

std::vector<int> powers_of_two_up_to(int limit) {
  std::vector<int> qs;
  for (int q = 1; q <= limit; q *= 2) qs.push_back(q);
  return qs;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

SketchFamily family_from_string(const std::string& s) {
  if (s == "gaussian") return SketchFamily::gaussian;
  if (s == "rademacher") return SketchFamily::rademacher;
  if (s == "uniform_rows") return SketchFamily::uniform_rows;
  if (s == "importance_rows") return SketchFamily::importance_rows;
  if (s == "surrogate") return SketchFamily::surrogate;
  throw InputError("unknown sketch family: " + s);
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

ExperimentReport base_report(const ExperimentConfig& cfg) {
  ExperimentReport r;
  r.add_config("tool", std::string(kToolVersion));
  r.add_config("rng", std::string(RngStream::kAlgorithmId));
  r.add_config("eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION));
  r.add_config("schema_version", static_cast<std::int64_t>(kConfigSchemaVersion));
  r.add_config("experiment", cfg.experiment);
  r.add_config("dataset", cfg.dataset);
  r.add_config("preprocessing", std::string(to_string(cfg.preprocessing)));
  r.add_config("family", std::string(to_string(cfg.family)));
  r.add_config("m", static_cast<std::int64_t>(cfg.m));
  r.add_config("lambda", cfg.lambda);
  r.add_config("seed", static_cast<std::int64_t>(cfg.seed));
  r.add_config("trials", static_cast<std::int64_t>(cfg.trials));
  return r;
}

Problem problem_from(const ExperimentConfig& cfg, const Dataset& ds) {
  return Problem(ds.X, ds.y, cfg.lambda);
}

struct ScaledVariants {
  std::vector<bool> values;
};

ScaledVariants scaled_variants(const std::string& scaled) {
  if (scaled == "on") return {{true}};
  if (scaled == "off") return {{false}};
  if (scaled == "both") return {{true, false}};
  throw InputError("scaled must be on|off|both, got " + scaled);
}

}  // namespace

unsigned ExperimentConfig::effective_threads() const {
  return threads == 0 ? default_thread_count() : threads;
}

void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value) {
  if (key == "schema_version") {
    if (std::stoi(value) != kConfigSchemaVersion) {
      throw InputError("unsupported schema_version " + value);
    }
  } else if (key == "experiment") {
    cfg.experiment = value;
  } else if (key == "dataset") {
    cfg.dataset = value;
  } else if (key == "preprocessing") {
    cfg.preprocessing = preprocessing_from_string(value);
  } else if (key == "loss") {
    cfg.loss = value;
  } else if (key == "solver") {
    cfg.solver = value;
  } else if (key == "family") {
    cfg.family = family_from_string(value);
  } else if (key == "m") {
    cfg.m = std::stoi(value);
  } else if (key == "m_grid") {
    cfg.m_grid.clear();
    for (const auto& item : split_list(value)) cfg.m_grid.push_back(std::stoi(item));
  } else if (key == "lambda") {
    cfg.lambda = std::stod(value);
  } else if (key == "scaled") {
    cfg.scaled = value;
  } else if (key == "q_grid") {
    cfg.q_grid.clear();
    for (const auto& item : split_list(value)) cfg.q_grid.push_back(std::stoi(item));
  } else if (key == "t_max") {
    cfg.t_max = std::stoi(value);
  } else if (key == "trials") {
    cfg.trials = std::stoi(value);
  } else if (key == "lambda_local_grid") {
    cfg.lambda_local_grid.clear();
    for (const auto& item : split_list(value)) cfg.lambda_local_grid.push_back(std::stod(item));
  } else if (key == "barrier_t") {
    cfg.barrier_t = std::stod(value);
  } else if (key == "tol") {
    cfg.tol = std::stod(value);
  } else if (key == "seed") {
    cfg.seed = std::stoull(value);
  } else if (key == "threads") {
    cfg.threads = static_cast<unsigned>(std::stoul(value));
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "format") {
    cfg.format = report_format_from_string(value);
  } else if (key == "dpp_method") {
    if (value == "spectral") {
      cfg.dpp_method = DppMethod::spectral;
    } else if (value == "rejection") {
      cfg.dpp_method = DppMethod::rejection;
    } else {
      throw InputError("dpp_method must be spectral|rejection");
    }
  } else {
    throw InputError("unknown config key: " + key);
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open");
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  bool saw_version = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, line_no, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "schema_version") saw_version = true;
    try {
      apply_config_line(cfg, key, value);
    } catch (const std::exception& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  if (!saw_version) throw ParseError(path, 0, "missing schema_version");
  return cfg;
}

std::vector<std::vector<double>> averaged_estimate_errors(
    const Problem& problem, const BiasSweepSpec& spec, const std::vector<int>& q_grid,
    int trials, std::uint64_t master_seed, std::uint64_t stream_tag, unsigned threads) {
  if (q_grid.empty() || trials < 1) throw InputError("averaged_estimate_errors: empty grid");
  if (!std::is_sorted(q_grid.begin(), q_grid.end())) {
    throw InputError("averaged_estimate_errors: q_grid must be ascending");
  }
  const int q_max = q_grid.back();
  const Eigen::VectorXd x_star = solve_exact(problem);
  const double x_star_norm = std::max(x_star.norm(), 1e-300);

  const LossModel quad = LossModel::quadratic(problem.A, problem.b, problem.lambda);
  const LocalModel model0 = local_model(quad, Eigen::VectorXd::Zero(problem.d()));

  // Shared read-only sampling state.
  std::unique_ptr<SurrogateSketcher> surrogate;
  Eigen::VectorXd importance_p;
  if (spec.family == SketchFamily::surrogate) {
    Eigen::VectorXd p;
    if (spec.uniform_probabilities) {
      p = Eigen::VectorXd::Constant(problem.n(), 1.0 / static_cast<double>(problem.n()));
    }
    surrogate = std::make_unique<SurrogateSketcher>(problem.A, problem.lambda, spec.m, p,
                                                    spec.dpp_method);
  } else if (spec.family == SketchFamily::importance_rows) {
    importance_p = ridge_leverage_probabilities(problem.A, problem.lambda);
  }

  std::vector<std::vector<double>> errors(q_grid.size(),
                                          std::vector<double>(static_cast<std::size_t>(trials)));
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t trial) {
    // Streaming det-weighted prefix averages; uniform weights when the
    // scheme is uniform. Log-weights are kept relative to their running max.
    Eigen::VectorXd weighted_sum = Eigen::VectorXd::Zero(problem.d());
    double weight_total = 0.0;
    double max_logw = 0.0;
    bool first = true;
    std::size_t next_grid = 0;
    for (int k = 0; k < q_max; ++k) {
      RngStream rng = RngStream::derive(master_seed, {stream_tag, trial,
                                                      static_cast<std::uint64_t>(k)});
      WorkerEstimate est;
      if (spec.family == SketchFamily::surrogate) {
        const SurrogateSample sample = surrogate->draw(rng);
        auto [SA, Sb] = surrogate->apply(sample, model0.b_t);
        est = local_sas_estimate(model0, SA, Sb, spec.lambda_local);
      } else {
        SketchSpec sketch_spec;
        sketch_spec.family = spec.family;
        sketch_spec.m = spec.m;
        if (spec.family == SketchFamily::importance_rows) {
          sketch_spec.probabilities = importance_p;
        }
        const SketchSample sketch = draw_sketch(sketch_spec, problem.n(), rng);
        est = local_sas_estimate(model0, sketch, spec.lambda_local);
      }
      const double logw =
          spec.scheme == AveragingScheme::determinantal ? est.sketched_hessian_logdet : 0.0;
      if (first || logw > max_logw) {
        const double rescale = first ? 0.0 : std::exp(max_logw - logw);
        weighted_sum *= rescale;
        weight_total *= rescale;
        max_logw = logw;
        first = false;
      }
      const double w = std::exp(logw - max_logw);
      weighted_sum += w * est.delta;  // x_t = 0, so the estimate is delta itself
      weight_total += w;
      if (next_grid < q_grid.size() && k + 1 == q_grid[next_grid]) {
        const Eigen::VectorXd mean = weighted_sum / weight_total;
        errors[next_grid][trial] = (mean - x_star).norm() / x_star_norm;
        ++next_grid;
      }
    }
  });
  return errors;
}

ExperimentReport run_effective_dim(const ExperimentConfig& cfg) {
  const Dataset ds = resolve_dataset(cfg.dataset, cfg.preprocessing);
  const double d_lambda = effective_dimension(ds.X, cfg.lambda);
  ExperimentReport r = base_report(cfg);
  r.columns = {"dataset", "n", "d", "lambda", "d_lambda", "m", "lambda_prime", "gamma"};
  double lambda_prime = std::nan("");
  double gamma = std::nan("");
  if (static_cast<double>(cfg.m) > d_lambda) {
    const ScaledRegularizer sr = scaled_regularizer(cfg.lambda, d_lambda, cfg.m);
    lambda_prime = sr.lambda_prime;
    gamma = sr.gamma;
  }
  r.rows.push_back({ds.name, static_cast<std::int64_t>(ds.n()), static_cast<std::int64_t>(ds.d()),
                    cfg.lambda, d_lambda, static_cast<std::int64_t>(cfg.m), lambda_prime, gamma});
  return r;
}

ExperimentReport run_bias_sweep(const ExperimentConfig& cfg) {
  const Dataset ds = resolve_dataset(cfg.dataset, cfg.preprocessing);
  const Problem problem = problem_from(cfg, ds);
  const std::vector<int> q_grid = cfg.q_grid.empty() ? powers_of_two_up_to(1024) : cfg.q_grid;
  const double d_lambda = effective_dimension(problem.A, problem.lambda);

  ExperimentReport r = base_report(cfg);
  r.add_config("d_lambda", d_lambda);
  r.columns = {"sketch_family", "scaled", "q", "trials", "mean_bias_norm", "stderr", "seed"};

  for (const bool scaled : scaled_variants(cfg.scaled).values) {
    BiasSweepSpec spec;
    spec.family = cfg.family;
    spec.m = cfg.m;
    spec.dpp_method = cfg.dpp_method;
    spec.lambda_local = scaled
                            ? scaled_regularizer(problem.lambda, d_lambda, cfg.m).lambda_prime
                            : problem.lambda;
    const auto errors =
        averaged_estimate_errors(problem, spec, q_grid, cfg.trials, cfg.seed,
                                 kBiasTag + (scaled ? 1 : 0), cfg.effective_threads());
    for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
      const stats::Summary s = stats::summarize(errors[qi]);
      r.rows.push_back({std::string(to_string(cfg.family)),
                        static_cast<std::int64_t>(scaled ? 1 : 0),
                        static_cast<std::int64_t>(q_grid[qi]),
                        static_cast<std::int64_t>(cfg.trials), s.mean, s.stderr_mean,
                        static_cast<std::int64_t>(cfg.seed)});
    }
  }
  return r;
}

ExperimentReport run_averaging_comparison(const ExperimentConfig& cfg) {
  const Dataset ds = resolve_dataset(cfg.dataset, cfg.preprocessing);
  const Problem problem = problem_from(cfg, ds);
  const std::vector<int> q_grid = cfg.q_grid.empty() ? powers_of_two_up_to(128) : cfg.q_grid;
  const std::vector<int> m_grid = cfg.m_grid.empty() ? std::vector<int>{cfg.m} : cfg.m_grid;
  const double d_lambda = effective_dimension(problem.A, problem.lambda);

  ExperimentReport r = base_report(cfg);
  r.add_config("d_lambda", d_lambda);
  r.columns = {"method", "m", "q", "trials", "mean_err", "stderr", "seed"};

  struct Method {
    const char* name;
    BiasSweepSpec spec;
  };
  for (const int m : m_grid) {
    std::vector<Method> methods;
    {
      BiasSweepSpec surrogate;
      surrogate.family = SketchFamily::surrogate;
      surrogate.m = m;
      surrogate.lambda_local = scaled_regularizer(problem.lambda, d_lambda, m).lambda_prime;
      surrogate.dpp_method = cfg.dpp_method;
      methods.push_back({"surrogate", surrogate});
      BiasSweepSpec unweighted;
      unweighted.family = SketchFamily::uniform_rows;
      unweighted.m = m;
      unweighted.lambda_local = problem.lambda;
      methods.push_back({"uniform_unweighted", unweighted});
      BiasSweepSpec determinantal = unweighted;
      determinantal.scheme = AveragingScheme::determinantal;
      methods.push_back({"uniform_determinantal", determinantal});
    }
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      // Both uniform-sampling baselines share a stream tag (and therefore
      // draws): the averaging schemes are compared on identical sketches,
      // and their q=1 rows coincide exactly.
      const std::uint64_t group = methods[mi].spec.family == SketchFamily::surrogate ? 0 : 1;
      const auto errors = averaged_estimate_errors(
          problem, methods[mi].spec, q_grid, cfg.trials, cfg.seed,
          kCompareTag + 16 * static_cast<std::uint64_t>(m) + group, cfg.effective_threads());
      for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
        const stats::Summary s = stats::summarize(errors[qi]);
        r.rows.push_back({std::string(methods[mi].name), static_cast<std::int64_t>(m),
                          static_cast<std::int64_t>(q_grid[qi]),
                          static_cast<std::int64_t>(cfg.trials), s.mean, s.stderr_mean,
                          static_cast<std::int64_t>(cfg.seed)});
      }
    }
  }
  return r;
}

namespace {

LossModel loss_from(const ExperimentConfig& cfg, const Dataset& ds) {
  if (cfg.loss == "quadratic") return LossModel::quadratic(ds.X, ds.y, cfg.lambda);
  if (cfg.loss == "logistic") return LossModel::logistic(ds.X, ds.y, cfg.lambda);
  if (cfg.loss == "log_barrier") {
    RngStream rng = RngStream::derive(0xbaff1e, {static_cast<std::uint64_t>(ds.n()),
                                                 static_cast<std::uint64_t>(ds.d())});
    Eigen::VectorXd center(ds.d());
    for (Eigen::Index j = 0; j < ds.d(); ++j) center[j] = 0.1 * rng.gaussian();
    return LossModel::log_barrier(ds.X, cfg.barrier_t, center, cfg.lambda);
  }
  throw InputError("unknown loss: " + cfg.loss);
}

const char* status_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iterations: return "max_iterations";
    case RunStatus::diverged: return "diverged";
  }
  return "?";
}

}  // namespace

ExperimentReport run_convergence(const ExperimentConfig& cfg) {
  const Dataset ds = resolve_dataset(cfg.dataset, cfg.preprocessing);
  const LossModel loss = loss_from(cfg, ds);
  const std::vector<int> q_grid = cfg.q_grid.empty() ? std::vector<int>{100} : cfg.q_grid;
  const SolverKind solver = cfg.solver == "dist_ihs" ? SolverKind::dist_ihs
                                                     : SolverKind::dist_newton_sketch;
  const auto scaled_set = scaled_variants(cfg.scaled).values;

  ExperimentReport r = base_report(cfg);
  r.add_config("loss", cfg.loss);
  r.add_config("solver", cfg.solver);
  r.columns = {"solver", "sketch_family", "scaled", "q",       "trial",    "t",
               "err_l2", "err_rel",       "err_H",  "f_val",   "step",     "maha_lhs",
               "maha_rhs", "status",      "seed"};

  struct Job {
    bool scaled;
    int q;
    int trial;
  };
  std::vector<Job> jobs;
  for (const bool scaled : scaled_set) {
    for (const int q : q_grid) {
      for (int trial = 0; trial < cfg.trials; ++trial) jobs.push_back({scaled, q, trial});
    }
  }
  std::vector<RunResult> results(jobs.size());
  parallel_for(jobs.size(), cfg.effective_threads(), [&](std::size_t j) {
    const Job& job = jobs[j];
    SketchConfig sk;
    sk.family = cfg.family;
    sk.m = cfg.m;
    sk.scaled = job.scaled;
    sk.dpp_method = cfg.dpp_method;
    DistributedOptions opts;
    opts.q = job.q;
    opts.t_max = cfg.t_max;
    opts.rel_tol = cfg.tol;
    opts.threads = 1;  // outer loop already saturates the pool
    const std::uint64_t run_seed = RngStream::derive(
        cfg.seed, {kConvergeTag, static_cast<std::uint64_t>(job.trial),
                   static_cast<std::uint64_t>(job.q), job.scaled ? 1u : 0u}).next_u64();
    results[j] = run_distributed(loss, solver, sk, opts, run_seed);
  });

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const Job& job = jobs[j];
    const RunResult& res = results[j];
    const double x_star_norm = std::max(res.x_star.norm(), 1e-300);
    for (const IterationTrace& tr : res.traces) {
      r.rows.push_back({std::string(cfg.solver), std::string(to_string(cfg.family)),
                        static_cast<std::int64_t>(job.scaled ? 1 : 0),
                        static_cast<std::int64_t>(job.q), static_cast<std::int64_t>(job.trial),
                        static_cast<std::int64_t>(tr.t), tr.err_l2, tr.err_l2 / x_star_norm,
                        tr.err_H, tr.f_val, tr.step, tr.maha_lhs, tr.maha_rhs,
                        std::string(status_string(res.status)),
                        static_cast<std::int64_t>(cfg.seed)});
    }
  }
  return r;
}

ExperimentReport run_lambda_prime_sweep(const ExperimentConfig& cfg) {
  const Dataset ds = resolve_dataset(cfg.dataset, cfg.preprocessing);
  const Problem problem = problem_from(cfg, ds);
  const std::vector<int> q_grid = cfg.q_grid.empty() ? powers_of_two_up_to(256) : cfg.q_grid;
  const double d_lambda = effective_dimension(problem.A, problem.lambda);
  const double lambda_thm = scaled_regularizer(problem.lambda, d_lambda, cfg.m).lambda_prime;

  std::vector<double> grid = cfg.lambda_local_grid;
  if (grid.empty()) {
    for (int i = 1; i <= 10; ++i) grid.push_back(static_cast<double>(i));
  }

  ExperimentReport r = base_report(cfg);
  r.add_config("d_lambda", d_lambda);
  r.add_config("lambda_prime_theorem", lambda_thm);
  r.columns = {"sketch_family", "lambda_local", "is_theorem_value", "q", "trials",
               "mean_bias_norm", "stderr", "seed"};

  std::vector<std::pair<double, bool>> locals;
  for (const double v : grid) locals.emplace_back(v, false);
  locals.emplace_back(lambda_thm, true);

  for (std::size_t li = 0; li < locals.size(); ++li) {
    BiasSweepSpec spec;
    spec.family = cfg.family;
    spec.m = cfg.m;
    spec.dpp_method = cfg.dpp_method;
    spec.lambda_local = locals[li].first;
    const auto errors = averaged_estimate_errors(problem, spec, q_grid, cfg.trials, cfg.seed,
                                                 kSweepTag + li, cfg.effective_threads());
    for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
      const stats::Summary s = stats::summarize(errors[qi]);
      r.rows.push_back({std::string(to_string(cfg.family)), locals[li].first,
                        static_cast<std::int64_t>(locals[li].second ? 1 : 0),
                        static_cast<std::int64_t>(q_grid[qi]),
                        static_cast<std::int64_t>(cfg.trials), s.mean, s.stderr_mean,
                        static_cast<std::int64_t>(cfg.seed)});
    }
  }
  return r;
}

ExperimentReport run_dpp_check(const ExperimentConfig& cfg) {
  const Dataset ds = resolve_dataset(cfg.dataset, cfg.preprocessing);
  if (ds.n() > 16) throw InputError("dpp_check: dataset too large to enumerate (n > 16)");
  const Eigen::MatrixXd& A = ds.X;
  const double lambda = cfg.lambda;
  const std::vector<double> oracle = subset_probability_oracle(A, lambda);
  const std::size_t n_subsets = oracle.size();
  const auto draws = static_cast<std::size_t>(cfg.trials);

  const DppSpectral spectral(A / std::sqrt(lambda));
  const LeveragePrecompute pre =
      precompute_leverage(A / std::sqrt(lambda), LeverageMode::exact);
  const DppRejection rejection(A / std::sqrt(lambda), pre);

  std::vector<std::uint64_t> counts_spectral(n_subsets, 0), counts_rejection(n_subsets, 0);
  std::uint64_t total_rounds = 0;
  std::mutex merge_mutex;
  const unsigned threads = cfg.effective_threads();
  const std::size_t chunks = std::max<std::size_t>(1, threads * 8);
  const std::size_t chunk_size = (draws + chunks - 1) / chunks;
  parallel_for(chunks, threads, [&](std::size_t chunk) {
    std::vector<std::uint64_t> local_s(n_subsets, 0), local_r(n_subsets, 0);
    std::uint64_t local_rounds = 0;
    const std::size_t begin = chunk * chunk_size;
    const std::size_t end = std::min(draws, begin + chunk_size);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng_s = RngStream::derive(cfg.seed, {kDppTag, 1, i});
      RngStream rng_r = RngStream::derive(cfg.seed, {kDppTag, 2, i});
      std::uint64_t mask = 0;
      for (const Eigen::Index idx : spectral.draw(rng_s)) mask |= std::uint64_t{1} << idx;
      ++local_s[mask];
      int rounds = 0;
      mask = 0;
      for (const Eigen::Index idx : rejection.draw(rng_r, &rounds)) {
        mask |= std::uint64_t{1} << idx;
      }
      ++local_r[mask];
      local_rounds += static_cast<std::uint64_t>(rounds);
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    for (std::size_t s = 0; s < n_subsets; ++s) {
      counts_spectral[s] += local_s[s];
      counts_rejection[s] += local_r[s];
    }
    total_rounds += local_rounds;
  });

  const double tv_spectral = stats::total_variation(counts_spectral, oracle);
  const double tv_rejection = stats::total_variation(counts_rejection, oracle);
  const auto gof_spectral = stats::chi_square_goodness_of_fit(counts_spectral, oracle);
  const auto gof_rejection = stats::chi_square_goodness_of_fit(counts_rejection, oracle);
  const auto two_sample = stats::chi_square_two_sample(counts_spectral, counts_rejection);

  ExperimentReport r = base_report(cfg);
  r.add_config("draws", static_cast<std::int64_t>(draws));
  r.add_config("tv_spectral", tv_spectral);
  r.add_config("tv_rejection", tv_rejection);
  r.add_config("chi2_p_spectral", gof_spectral.p_value);
  r.add_config("chi2_p_rejection", gof_rejection.p_value);
  r.add_config("chi2_p_two_sample", two_sample.p_value);
  r.add_config("mean_rejection_rounds",
               static_cast<double>(total_rounds) / static_cast<double>(draws));
  r.columns = {"subset_mask", "p_exact", "freq_spectral", "freq_rejection", "seed"};
  for (std::size_t s = 0; s < n_subsets; ++s) {
    r.rows.push_back({static_cast<std::int64_t>(s), oracle[s],
                      static_cast<double>(counts_spectral[s]) / static_cast<double>(draws),
                      static_cast<double>(counts_rejection[s]) / static_cast<double>(draws),
                      static_cast<std::int64_t>(cfg.seed)});
  }
  return r;
}

ExperimentReport run_concentration(const ExperimentConfig& cfg) {
  const Dataset ds = resolve_dataset(cfg.dataset, cfg.preprocessing);
  const std::vector<int> q_grid = cfg.q_grid.empty() ? std::vector<int>{4, 8, 16, 32} : cfg.q_grid;

  ExperimentReport r = base_report(cfg);
  r.columns = {"m", "q", "trial", "spectral_error", "seed"};
  for (const int q : q_grid) {
    const std::vector<double> errors =
        concentration_probe(ds.X, cfg.lambda, cfg.m, q, cfg.trials,
                            RngStream::derive(cfg.seed, {0xabcd, static_cast<std::uint64_t>(q)})
                                .next_u64(),
                            cfg.effective_threads());
    for (std::size_t t = 0; t < errors.size(); ++t) {
      r.rows.push_back({static_cast<std::int64_t>(cfg.m), static_cast<std::int64_t>(q),
                        static_cast<std::int64_t>(t), errors[t],
                        static_cast<std::int64_t>(cfg.seed)});
    }
  }
  return r;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "effective_dim") return run_effective_dim(cfg);
  if (cfg.experiment == "bias_sweep") return run_bias_sweep(cfg);
  if (cfg.experiment == "avg_compare") return run_averaging_comparison(cfg);
  if (cfg.experiment == "convergence") return run_convergence(cfg);
  if (cfg.experiment == "lp_sweep") return run_lambda_prime_sweep(cfg);
  if (cfg.experiment == "dpp_check") return run_dpp_check(cfg);
  if (cfg.experiment == "concentration") return run_concentration(cfg);
  throw InputError("unknown experiment: " + cfg.experiment);
}

}  // namespace desketch
