#include "desketch/distributed.hpp"

#include <chrono>
#include <cmath>
#include <memory>

#include "desketch/errors.hpp"
#include "desketch/parallel.hpp"
#include "desketch/problem.hpp"

namespace desketch {

namespace {

constexpr std::uint64_t kWorkerTag = 0x77;
constexpr std::uint64_t kProbeTag = 0xc0;

struct SolveWithLogdet {
  Eigen::VectorXd solution;
  double logdet = 0.0;
};

SolveWithLogdet spd_solve(Eigen::MatrixXd H, const Eigen::VectorXd& rhs, const char* who) {
  Eigen::LLT<Eigen::MatrixXd> llt(std::move(H));
  if (llt.info() != Eigen::Success) {
    throw SolverError(std::string(who) + ": sketched Hessian is not positive definite");
  }
  SolveWithLogdet out;
  out.solution = llt.solve(rhs);
  for (Eigen::Index i = 0; i < llt.matrixLLT().rows(); ++i) {
    out.logdet += 2.0 * std::log(llt.matrixLLT()(i, i));
  }
  return out;
}

Eigen::MatrixXd sketched_gram(const Eigen::MatrixXd& SA) {
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(SA.cols(), SA.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(SA.transpose());
  gram.triangularView<Eigen::Upper>() = gram.transpose();
  return gram;
}

}  // namespace

WorkerEstimate local_sas_estimate(const LocalModel& model, const Eigen::MatrixXd& SA,
                                  const Eigen::VectorXd& Sb, double lambda_local) {
  if (lambda_local < 0.0) throw InputError("local_sas_estimate: negative local regularizer");
  Eigen::MatrixXd H = sketched_gram(SA);
  H.diagonal().array() += lambda_local;
  Eigen::VectorXd g = SA.transpose() * Sb + lambda_local * model.x_t;
  if (model.grad_extra.size() == model.x_t.size() && model.ridge > 0.0) {
    g += (lambda_local / model.ridge) * model.grad_extra;
  }
  SolveWithLogdet sol = spd_solve(std::move(H), g, "local_sas_estimate");
  WorkerEstimate est;
  est.kind = EstimateKind::sas;
  est.delta = -sol.solution;
  est.sketched_hessian_logdet = sol.logdet;
  return est;
}

WorkerEstimate local_sas_estimate(const LocalModel& model, const SketchSample& sketch,
                                  double lambda_local) {
  auto [SA, Sb] = apply_sketch(sketch, model.A_t, model.b_t);
  return local_sas_estimate(model, SA, Sb, lambda_local);
}

WorkerEstimate local_newton_sketch_estimate(const LocalModel& model,
                                            const Eigen::MatrixXd& SA,
                                            double lambda_prime) {
  if (!(lambda_prime > 0.0)) {
    throw InfeasibleError("local_newton_sketch_estimate: lambda' must be positive");
  }
  Eigen::MatrixXd H = sketched_gram(SA) * (model.ridge / lambda_prime);
  H.diagonal().array() += model.ridge;
  SolveWithLogdet sol = spd_solve(std::move(H), model.gradient(), "local_newton_sketch_estimate");
  WorkerEstimate est;
  est.kind = EstimateKind::newton_sketch;
  est.delta = -sol.solution;
  est.sketched_hessian_logdet = sol.logdet;
  return est;
}

WorkerEstimate local_newton_sketch_estimate(const LocalModel& model,
                                            const SketchSample& sketch,
                                            double lambda_prime) {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.b_t.size());
  auto [SA, Sb] = apply_sketch(sketch, model.A_t, zero);
  return local_newton_sketch_estimate(model, SA, lambda_prime);
}

namespace baseline {

std::vector<double> determinantal_weights(const std::vector<WorkerEstimate>& estimates) {
  if (estimates.empty()) throw InputError("determinantal_weights: no estimates");
  double max_logdet = estimates.front().sketched_hessian_logdet;
  for (const auto& e : estimates) max_logdet = std::max(max_logdet, e.sketched_hessian_logdet);
  std::vector<double> weights(estimates.size());
  double total = 0.0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    weights[k] = std::exp(estimates[k].sketched_hessian_logdet - max_logdet);
    total += weights[k];
  }
  for (double& w : weights) w /= total;
  return weights;
}

}  // namespace baseline

Eigen::VectorXd aggregate(const std::vector<WorkerEstimate>& estimates,
                          AveragingScheme scheme) {
  if (estimates.empty()) throw InputError("aggregate: no estimates");
  const Eigen::Index d = estimates.front().delta.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  if (scheme == AveragingScheme::uniform) {
    for (const auto& e : estimates) {
      if (e.delta.size() != d) throw InputError("aggregate: mixed dimensions");
      out += e.delta;
    }
    return out / static_cast<double>(estimates.size());
  }
  const std::vector<double> weights = baseline::determinantal_weights(estimates);
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (estimates[k].delta.size() != d) throw InputError("aggregate: mixed dimensions");
    out += weights[k] * estimates[k].delta;
  }
  return out;
}

Eigen::VectorXd newton_exact(const LossModel& loss, const Eigen::VectorXd& x0,
                             double grad_tol, int max_iter) {
  Eigen::VectorXd x = x0;
  if (!loss.in_domain(x)) throw SolverError("newton_exact: infeasible start");
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd g = loss.gradient(x);
    if (g.norm() <= grad_tol) return x;
    Eigen::LLT<Eigen::MatrixXd> llt(loss.hessian(x));
    if (llt.info() != Eigen::Success) throw SolverError("newton_exact: Hessian not SPD");
    const Eigen::VectorXd dir = -llt.solve(g);
    const double alpha = backtracking_line_search(loss, x, dir);
    x += alpha * dir;
  }
  return x;
}

RunResult run_distributed(const LossModel& loss, SolverKind solver,
                          const SketchConfig& sketch_cfg, const DistributedOptions& opts,
                          std::uint64_t master_seed) {
  if (opts.q < 1 || opts.t_max < 1) throw InputError("run_distributed: q, t_max must be >= 1");
  if (sketch_cfg.m < 1) throw InputError("run_distributed: sketch size must be >= 1");

  RunResult result;
  result.x_star = newton_exact(loss, Eigen::VectorXd::Zero(loss.d()));
  const Eigen::MatrixXd H_star = loss.hessian(result.x_star);
  const double x_star_norm = std::max(result.x_star.norm(), 1e-300);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(loss.d());
  for (int t = 0; t < opts.t_max; ++t) {
    const auto tic = std::chrono::steady_clock::now();
    const LocalModel model = local_model(loss, x);
    const double ridge = model.ridge;

    double lambda_local = ridge;
    if (sketch_cfg.scaled) {
      const double d_lam = effective_dimension(model.A_t, ridge);
      lambda_local = scaled_regularizer(ridge, d_lam, sketch_cfg.m).lambda_prime;
    }
    if (std::isfinite(sketch_cfg.lambda_local_override)) {
      lambda_local = sketch_cfg.lambda_local_override;
    }

    // Per-iteration sketcher state shared read-only by the workers.
    std::unique_ptr<SurrogateSketcher> surrogate;
    Eigen::VectorXd importance_p;
    if (sketch_cfg.family == SketchFamily::surrogate) {
      Eigen::VectorXd p;
      if (sketch_cfg.uniform_probabilities) {
        p = Eigen::VectorXd::Constant(model.A_t.rows(),
                                      1.0 / static_cast<double>(model.A_t.rows()));
      }
      surrogate = std::make_unique<SurrogateSketcher>(model.A_t, ridge, sketch_cfg.m, p,
                                                      sketch_cfg.dpp_method);
    } else if (sketch_cfg.family == SketchFamily::importance_rows) {
      importance_p = ridge_leverage_probabilities(model.A_t, ridge);
    }

    const Eigen::Index d = loss.d();
    const Eigen::VectorXd g = model.gradient();
    std::vector<WorkerEstimate> estimates(static_cast<std::size_t>(opts.q));
    std::vector<Eigen::MatrixXd> inverses(static_cast<std::size_t>(opts.q));
    const std::uint64_t sketch_epoch =
        sketch_cfg.redraw_each_iteration ? static_cast<std::uint64_t>(t) : 0u;
    parallel_for(static_cast<std::size_t>(opts.q), opts.threads, [&](std::size_t k) {
      RngStream rng = RngStream::derive(master_seed, {kWorkerTag, sketch_epoch, k});
      Eigen::MatrixXd SA;
      if (sketch_cfg.family == SketchFamily::surrogate) {
        SA = surrogate->apply_matrix(surrogate->draw(rng));
      } else {
        SketchSpec spec;
        spec.family = sketch_cfg.family;
        spec.m = sketch_cfg.m;
        if (sketch_cfg.family == SketchFamily::importance_rows) spec.probabilities = importance_p;
        Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.A_t.rows());
        SA = apply_sketch(draw_sketch(spec, model.A_t.rows(), rng), model.A_t, zero).first;
      }
      Eigen::MatrixXd Hk = sketched_gram(SA) * (ridge / lambda_local);
      Hk.diagonal().array() += ridge;
      Eigen::LLT<Eigen::MatrixXd> llt_k(std::move(Hk));
      if (llt_k.info() != Eigen::Success) {
        throw SolverError("run_distributed: sketched Hessian not positive definite");
      }
      WorkerEstimate est;
      est.kind = EstimateKind::newton_sketch;
      est.worker_id = static_cast<int>(k);
      est.seed_used = master_seed;
      inverses[k] = llt_k.solve(Eigen::MatrixXd::Identity(d, d));
      est.delta = -(inverses[k].selfadjointView<Eigen::Lower>() * g);
      for (Eigen::Index i = 0; i < d; ++i) {
        est.sketched_hessian_logdet += 2.0 * std::log(llt_k.matrixLLT()(i, i));
      }
      estimates[k] = std::move(est);
    });

    const Eigen::VectorXd dir = aggregate(estimates, opts.scheme);

    // Aggregated inverse operator, with the same weights the aggregation
    // used; dir == -mean_inv * g by construction.
    Eigen::MatrixXd mean_inv = Eigen::MatrixXd::Zero(d, d);
    if (opts.scheme == AveragingScheme::uniform) {
      for (const auto& inv : inverses) mean_inv += inv;
      mean_inv /= static_cast<double>(opts.q);
    } else {
      const std::vector<double> weights = baseline::determinantal_weights(estimates);
      for (std::size_t k = 0; k < inverses.size(); ++k) mean_inv += weights[k] * inverses[k];
    }

    // Both sides of the per-update Mahalanobis bound.
    const Eigen::MatrixXd H_t = model.hessian();
    Eigen::LLT<Eigen::MatrixXd> llt(H_t);
    const Eigen::VectorXd newton_step = -llt.solve(g);
    const double maha_lhs = mahalanobis_norm(dir - newton_step, H_t);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H_t);
    const Eigen::MatrixXd H_half = eig.eigenvectors() *
                                   eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                   eig.eigenvectors().transpose();
    const Eigen::MatrixXd H_inv = eig.eigenvectors() *
                                  eig.eigenvalues().cwiseInverse().asDiagonal() *
                                  eig.eigenvectors().transpose();
    const Eigen::MatrixXd Z = H_half * (mean_inv - H_inv) * H_half;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> zeig(Z, Eigen::EigenvaluesOnly);
    const double spectral_err = std::max(std::abs(zeig.eigenvalues().minCoeff()),
                                         std::abs(zeig.eigenvalues().maxCoeff()));
    const double maha_rhs = spectral_err * mahalanobis_norm(newton_step, H_t);

    const double step = (solver == SolverKind::dist_newton_sketch)
                            ? backtracking_line_search(loss, x, dir)
                            : 1.0;

    IterationTrace trace;
    trace.t = t;
    trace.x = x;
    trace.err_l2 = (x - result.x_star).norm();
    trace.err_H = mahalanobis_norm(x - result.x_star, H_star);
    trace.f_val = loss.value(x);
    trace.maha_lhs = maha_lhs;
    trace.maha_rhs = maha_rhs;
    trace.step = step;
    trace.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                        std::chrono::steady_clock::now() - tic)
                        .count();
    result.traces.push_back(std::move(trace));

    x += step * dir;

    const double rel = (x - result.x_star).norm() / x_star_norm;
    if (opts.rel_tol > 0.0 && rel <= opts.rel_tol) {
      result.status = RunStatus::converged;
      break;
    }
    if (result.traces.size() >= 6) {
      const double now = (x - result.x_star).norm();
      const double past = result.traces[result.traces.size() - 5].err_l2;
      if (now > 10.0 * past && now > 1e-12) {
        result.status = RunStatus::diverged;
        break;
      }
    }
  }

  IterationTrace final_trace;
  final_trace.t = static_cast<int>(result.traces.size());
  final_trace.x = x;
  final_trace.err_l2 = (x - result.x_star).norm();
  final_trace.err_H = mahalanobis_norm(x - result.x_star, H_star);
  final_trace.f_val = loss.value(x);
  result.traces.push_back(std::move(final_trace));
  return result;
}

std::vector<double> concentration_probe(const Eigen::MatrixXd& A, double lambda, int m,
                                        int q, int trials, std::uint64_t master_seed,
                                        unsigned threads) {
  if (q < 1 || trials < 1) throw InputError("concentration_probe: q, trials must be >= 1");
  const SurrogateSketcher sketcher(A, lambda, m);
  Eigen::MatrixXd H = A.transpose() * A;
  H.diagonal().array() += lambda;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
  const Eigen::MatrixXd H_half = eig.eigenvectors() *
                                 eig.eigenvalues().cwiseSqrt().asDiagonal() *
                                 eig.eigenvectors().transpose();
  const Eigen::MatrixXd H_inv = eig.eigenvectors() *
                                eig.eigenvalues().cwiseInverse().asDiagonal() *
                                eig.eigenvectors().transpose();
  const Eigen::Index d = A.cols();

  std::vector<double> errors(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t trial) {
    RngStream rng = RngStream::derive(master_seed, {kProbeTag, trial});
    Eigen::MatrixXd mean_inv = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < q; ++k) {
      const SurrogateSample sample = sketcher.draw(rng);
      const Eigen::MatrixXd Hhat =
          surrogate_sketched_hessian(sample, A, lambda, HessianVariant::newton_sketch);
      Eigen::LLT<Eigen::MatrixXd> llt(Hhat);
      if (llt.info() != Eigen::Success) throw SolverError("concentration_probe: not SPD");
      mean_inv += llt.solve(Eigen::MatrixXd::Identity(d, d));
    }
    mean_inv /= static_cast<double>(q);
    const Eigen::MatrixXd Z = H_half * (mean_inv - H_inv) * H_half;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> zeig(Z, Eigen::EigenvaluesOnly);
    errors[trial] = std::max(std::abs(zeig.eigenvalues().minCoeff()),
                             std::abs(zeig.eigenvalues().maxCoeff()));
  });
  return errors;
}

}  // namespace desketch
