#pragma once
// Simulated multi-worker second-order solvers. Each iteration hands q
// workers an independent sketch of the local quadratic model; their local
// steps are combined by unweighted or determinant-weighted averaging and the
// iterate advances (unit step for iterative Hessian sketching, backtracking
// line search for Newton sketching).
//
// Workers are simulated in-process: the distributed aspect is the
// statistical protocol (independent sketches, one averaging round), not a
// network. Worker streams derive from (master seed, iteration, worker), so
// runs are reproducible for any thread count.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "desketch/losses.hpp"
#include "desketch/sketches.hpp"
#include "desketch/surrogate.hpp"

namespace desketch {

enum class EstimateKind { sas, newton_sketch };

struct WorkerEstimate {
  int worker_id = 0;
  EstimateKind kind = EstimateKind::newton_sketch;
  Eigen::VectorXd delta;                 // local step: x_hat = x_t + delta
  double sketched_hessian_logdet = 0.0;  // for determinantal averaging
  std::uint64_t seed_used = 0;
};

enum class AveragingScheme { uniform, determinantal };

struct IterationTrace {
  int t = 0;
  Eigen::VectorXd x;
  double err_l2 = 0.0;
  double err_H = 0.0;  // Mahalanobis distance to x* in the H(x*) metric
  double f_val = 0.0;
  std::int64_t wall_ns = 0;
  // Both sides of the per-iteration Mahalanobis bound on the aggregated
  // (pre-line-search) update; lhs <= rhs holds exactly.
  double maha_lhs = 0.0;
  double maha_rhs = 0.0;
  double step = 0.0;
};

enum class SolverKind { dist_ihs, dist_newton_sketch };
enum class RunStatus { converged, max_iterations, diverged };

struct SketchConfig {
  SketchFamily family = SketchFamily::surrogate;
  int m = 0;
  bool scaled = true;  // lambda' = ridge (1 - d_lambda/m) vs ridge unchanged
  // When finite, forces the local regularizer to this value (parameter sweeps).
  double lambda_local_override = std::nan("");
  DppMethod dpp_method = DppMethod::spectral;
  // Surrogate ablation: sample the i.i.d. part uniformly instead of by
  // ridge leverage scores.
  bool uniform_probabilities = false;
  // Default: every worker redraws its sketch each iteration (independent
  // copies per step). false pins each worker to its iteration-0 stream, the
  // fixed-sketch ablation.
  bool redraw_each_iteration = true;
};

struct DistributedOptions {
  int q = 1;
  int t_max = 10;
  AveragingScheme scheme = AveragingScheme::uniform;
  double rel_tol = 0.0;  // stop when err_l2 / |x*| drops below; 0 disables
  unsigned threads = 1;
};

struct RunResult {
  std::vector<IterationTrace> traces;
  RunStatus status = RunStatus::max_iterations;
  Eigen::VectorXd x_star;  // reference optimum used for the error columns
};

// Sketch-and-solve estimate from the already-sketched local model:
//   delta = -(SA^T SA + l I)^-1 (SA^T Sb + l x_t + (l/ridge) grad_extra)
WorkerEstimate local_sas_estimate(const LocalModel& model, const Eigen::MatrixXd& SA,
                                  const Eigen::VectorXd& Sb, double lambda_local);
WorkerEstimate local_sas_estimate(const LocalModel& model, const SketchSample& sketch,
                                  double lambda_local);

// Newton-sketch estimate: exact gradient, sketched Hessian
//   delta = -((ridge/l') SA^T SA + ridge I)^-1 g(x_t)
WorkerEstimate local_newton_sketch_estimate(const LocalModel& model,
                                            const Eigen::MatrixXd& SA, double lambda_prime);
WorkerEstimate local_newton_sketch_estimate(const LocalModel& model,
                                            const SketchSample& sketch,
                                            double lambda_prime);

// Uniform: arithmetic mean. Determinantal: weights proportional to
// det(sketched Hessian), normalized after subtracting the max log-weight.
Eigen::VectorXd aggregate(const std::vector<WorkerEstimate>& estimates,
                          AveragingScheme scheme);

namespace baseline {
// Determinant-proportional weights of the cited averaging baseline,
// normalized to sum to 1. Validated by comparison experiments only.
std::vector<double> determinantal_weights(const std::vector<WorkerEstimate>& estimates);
}  // namespace baseline

// Exact Newton with backtracking, used as the reference solver.
Eigen::VectorXd newton_exact(const LossModel& loss, const Eigen::VectorXd& x0,
                             double grad_tol = 1e-12, int max_iter = 200);

RunResult run_distributed(const LossModel& loss, SolverKind solver,
                          const SketchConfig& sketch_cfg, const DistributedOptions& opts,
                          std::uint64_t master_seed);

// Per-trial spectral errors || H^{1/2} (Hbar^-1 - H^-1) H^{1/2} || for the
// surrogate leverage-score sketch, Hbar^-1 averaging q independent copies.
std::vector<double> concentration_probe(const Eigen::MatrixXd& A, double lambda, int m,
                                        int q, int trials, std::uint64_t master_seed,
                                        unsigned threads = 1);

}  // namespace desketch
