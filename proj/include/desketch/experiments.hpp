#pragma once
// The experiment suites behind the CLI subcommands: single-round bias
// sweeps, averaging-scheme comparisons, distributed convergence runs, local
// regularizer sweeps, DPP sampler checks and concentration probes. Each
// suite consumes an ExperimentConfig and produces an ExperimentReport whose
// bytes depend only on the config (thread count included in the config but
// never in the output).

#include <cstdint>
#include <string>
#include <vector>

#include "desketch/datasets.hpp"
#include "desketch/distributed.hpp"
#include "desketch/report.hpp"

namespace desketch {

inline constexpr const char* kToolVersion = "desketch/0.1.0";
inline constexpr int kConfigSchemaVersion = 1;

struct ExperimentConfig {
  std::string experiment = "bias_sweep";
  std::string dataset = "boston-like";
  Preprocessing preprocessing = Preprocessing::none;
  std::string loss = "quadratic";  // convergence: quadratic|logistic|log_barrier
  std::string solver = "dist_newton_sketch";
  SketchFamily family = SketchFamily::surrogate;
  int m = 50;
  std::vector<int> m_grid;          // avg_compare; defaults to {m}
  double lambda = 10.0;
  std::string scaled = "both";      // on|off|both
  std::vector<int> q_grid;
  int t_max = 20;
  int trials = 20;
  std::vector<double> lambda_local_grid;
  double barrier_t = 10.0;
  double tol = 1e-6;
  std::uint64_t seed = 1;
  unsigned threads = 0;             // 0: hardware concurrency
  std::string out;
  ReportFormat format = ReportFormat::csv;
  DppMethod dpp_method = DppMethod::spectral;

  unsigned effective_threads() const;
};

// Flat key=value config file ('#' comments, blank lines ignored). Unknown
// keys are errors; schema_version must match kConfigSchemaVersion.
ExperimentConfig load_experiment_config(const std::string& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value);

ExperimentReport run_effective_dim(const ExperimentConfig& cfg);
ExperimentReport run_bias_sweep(const ExperimentConfig& cfg);
ExperimentReport run_averaging_comparison(const ExperimentConfig& cfg);
ExperimentReport run_convergence(const ExperimentConfig& cfg);
ExperimentReport run_lambda_prime_sweep(const ExperimentConfig& cfg);
ExperimentReport run_dpp_check(const ExperimentConfig& cfg);
ExperimentReport run_concentration(const ExperimentConfig& cfg);

// Dispatch on cfg.experiment.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Per-(q, trial) relative errors of averaged sketch-and-solve estimates on
// the regularized least-squares problem, shared by the sweeps. q_grid must
// be sorted ascending; row-major [q_index][trial] result.
struct BiasSweepSpec {
  SketchFamily family = SketchFamily::surrogate;
  int m = 0;
  double lambda_local = 0.0;   // local regularizer for the small solves
  bool uniform_probabilities = false;
  DppMethod dpp_method = DppMethod::spectral;
  AveragingScheme scheme = AveragingScheme::uniform;
};

std::vector<std::vector<double>> averaged_estimate_errors(
    const Problem& problem, const BiasSweepSpec& spec, const std::vector<int>& q_grid,
    int trials, std::uint64_t master_seed, std::uint64_t stream_tag, unsigned threads);

}  // namespace desketch
