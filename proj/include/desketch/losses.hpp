#pragma once
// Convex losses (quadratic, l2-regularized logistic, log-barrier) and the
// local quadratic model feeding sketched Newton steps.
//
// Conventions, written out because they differ per loss:
//   quadratic    f(x) = 1/2 ||Ax - b||^2 + lambda/2 ||x||^2
//   logistic     f(x) = 1/n sum_i [log(1 + e^{z_i}) - y_i z_i] + lambda/2 ||x||^2,
//                z_i = a_i^T x, labels y in {0,1}
//   log_barrier  f(x) = -sum_i log(t - z_i) - sum_i log(z_i + t)
//                       + lambda ||x||^2 - 2 lambda c^T x + lambda ||c||^2,
//                domain ||Ax||_inf < t
//
// Each loss exposes a LocalModel (A_t, b_t) with
//   H(x_t) = A_t^T A_t + ridge I
//   g(x_t) = A_t^T b_t + ridge x_t + grad_extra
// holding exactly. ridge is lambda for quadratic/logistic and 2 lambda for
// the log-barrier (whose regularizer is lambda ||x - c||^2); grad_extra
// carries the barrier's constant term and any clamped-curvature rows.

#include <Eigen/Dense>
#include <tuple>

namespace desketch {

enum class LossKind { quadratic, logistic, log_barrier };

class LossModel {
 public:
  static LossModel quadratic(Eigen::MatrixXd A, Eigen::VectorXd b, double lambda);
  static LossModel logistic(Eigen::MatrixXd A, Eigen::VectorXd labels, double lambda);
  static LossModel log_barrier(Eigen::MatrixXd A, double t, Eigen::VectorXd c, double lambda);

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;
  std::tuple<double, Eigen::VectorXd, Eigen::MatrixXd> objective_gradient_hessian(
      const Eigen::VectorXd& x) const;

  bool in_domain(const Eigen::VectorXd& x) const;

  LossKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  // Coefficient of I in the Hessian: lambda, or 2*lambda for log_barrier.
  double ridge() const;
  Eigen::Index n() const { return A_.rows(); }
  Eigen::Index d() const { return A_.cols(); }
  const Eigen::MatrixXd& data() const { return A_; }
  const Eigen::VectorXd& targets() const { return b_; }
  double barrier_t() const { return t_; }
  const Eigen::VectorXd& barrier_c() const { return c_; }

 private:
  LossModel() = default;
  LossKind kind_ = LossKind::quadratic;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;  // targets / labels (unused for log_barrier)
  double lambda_ = 0.0;
  double t_ = 0.0;     // log_barrier only
  Eigen::VectorXd c_;  // log_barrier only
};

struct LocalModel {
  Eigen::MatrixXd A_t;
  Eigen::VectorXd b_t;
  Eigen::VectorXd x_t;
  double ridge = 0.0;
  Eigen::VectorXd grad_extra;  // zero except log_barrier / clamped rows

  Eigen::MatrixXd hessian() const;
  Eigen::VectorXd gradient() const;
};

// Curvature below this threshold is clamped: the A_t row is zeroed and the
// row's gradient contribution moves into grad_extra (the 1/sqrt(l'') weight
// would blow up otherwise).
inline constexpr double kCurvatureClamp = 1e-12;

LocalModel local_model(const LossModel& loss, const Eigen::VectorXd& x);

struct LineSearchParams {
  double tau = 2.0;
  double c = 0.1;
  double a0 = 1.0;
  int max_halvings = 60;
};

// Backtracking (Armijo) line search: the largest a0/tau^k satisfying
// f(x + a dir) <= f(x) + c a g^T dir with x + a dir feasible. For a
// non-descent direction, falls back to the largest feasible non-increasing
// step. Throws SolverError after max_halvings shrinkages.
double backtracking_line_search(const LossModel& loss, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& direction,
                                const LineSearchParams& params = {});

}  // namespace desketch
