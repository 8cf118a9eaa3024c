#include "desketch/losses.hpp"

#include <cmath>

#include "desketch/errors.hpp"
#include "desketch/problem.hpp"

namespace desketch {

namespace {

double log1p_exp(double z) {
  // log(1 + e^z) without overflow.
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

LossModel LossModel::quadratic(Eigen::MatrixXd A, Eigen::VectorXd b, double lambda) {
  if (!(lambda > 0.0)) throw InputError("LossModel: lambda must be positive");
  if (b.size() != A.rows()) throw InputError("LossModel: target length mismatch");
  detail::require_finite(A, "LossModel.A");
  detail::require_finite(b, "LossModel.b");
  LossModel m;
  m.kind_ = LossKind::quadratic;
  m.A_ = std::move(A);
  m.b_ = std::move(b);
  m.lambda_ = lambda;
  return m;
}

LossModel LossModel::logistic(Eigen::MatrixXd A, Eigen::VectorXd labels, double lambda) {
  if (!(lambda > 0.0)) throw InputError("LossModel: lambda must be positive");
  if (labels.size() != A.rows()) throw InputError("LossModel: label length mismatch");
  detail::require_finite(A, "LossModel.A");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw InputError("LossModel: logistic labels must be in {0,1}");
    }
  }
  LossModel m;
  m.kind_ = LossKind::logistic;
  m.A_ = std::move(A);
  m.b_ = std::move(labels);
  m.lambda_ = lambda;
  return m;
}

LossModel LossModel::log_barrier(Eigen::MatrixXd A, double t, Eigen::VectorXd c,
                                 double lambda) {
  if (!(lambda > 0.0)) throw InputError("LossModel: lambda must be positive");
  if (!(t > 0.0)) throw InputError("LossModel: barrier width t must be positive");
  if (c.size() != A.cols()) throw InputError("LossModel: center c must have length d");
  detail::require_finite(A, "LossModel.A");
  LossModel m;
  m.kind_ = LossKind::log_barrier;
  m.A_ = std::move(A);
  m.t_ = t;
  m.c_ = std::move(c);
  m.lambda_ = lambda;
  return m;
}

double LossModel::ridge() const {
  return kind_ == LossKind::log_barrier ? 2.0 * lambda_ : lambda_;
}

bool LossModel::in_domain(const Eigen::VectorXd& x) const {
  if (kind_ != LossKind::log_barrier) return true;
  return (A_ * x).cwiseAbs().maxCoeff() < t_;
}

double LossModel::value(const Eigen::VectorXd& x) const {
  if (x.size() != d()) throw InputError("LossModel::value: wrong dimension");
  const Eigen::VectorXd z = A_ * x;
  switch (kind_) {
    case LossKind::quadratic:
      return 0.5 * (z - b_).squaredNorm() + 0.5 * lambda_ * x.squaredNorm();
    case LossKind::logistic: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < z.size(); ++i) sum += log1p_exp(z[i]) - b_[i] * z[i];
      return sum / static_cast<double>(n()) + 0.5 * lambda_ * x.squaredNorm();
    }
    case LossKind::log_barrier: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (std::abs(z[i]) >= t_) throw SolverError("log_barrier: point outside the domain");
        sum -= std::log(t_ - z[i]) + std::log(z[i] + t_);
      }
      return sum + lambda_ * x.squaredNorm() - 2.0 * lambda_ * c_.dot(x) +
             lambda_ * c_.squaredNorm();
    }
  }
  return 0.0;
}

Eigen::VectorXd LossModel::gradient(const Eigen::VectorXd& x) const {
  if (x.size() != d()) throw InputError("LossModel::gradient: wrong dimension");
  const Eigen::VectorXd z = A_ * x;
  switch (kind_) {
    case LossKind::quadratic:
      return A_.transpose() * (z - b_) + lambda_ * x;
    case LossKind::logistic: {
      Eigen::VectorXd first(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) first[i] = sigmoid(z[i]) - b_[i];
      return A_.transpose() * first / static_cast<double>(n()) + lambda_ * x;
    }
    case LossKind::log_barrier: {
      Eigen::VectorXd first(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (std::abs(z[i]) >= t_) throw SolverError("log_barrier: point outside the domain");
        first[i] = 1.0 / (t_ - z[i]) - 1.0 / (z[i] + t_);
      }
      return A_.transpose() * first + 2.0 * lambda_ * (x - c_);
    }
  }
  return {};
}

Eigen::MatrixXd LossModel::hessian(const Eigen::VectorXd& x) const {
  if (x.size() != d()) throw InputError("LossModel::hessian: wrong dimension");
  const Eigen::VectorXd z = A_ * x;
  Eigen::VectorXd curvature(z.size());
  switch (kind_) {
    case LossKind::quadratic:
      curvature.setOnes();
      break;
    case LossKind::logistic:
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double s = sigmoid(z[i]);
        curvature[i] = s * (1.0 - s) / static_cast<double>(n());
      }
      break;
    case LossKind::log_barrier:
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (std::abs(z[i]) >= t_) throw SolverError("log_barrier: point outside the domain");
        const double lo = t_ - z[i];
        const double hi = z[i] + t_;
        curvature[i] = 1.0 / (lo * lo) + 1.0 / (hi * hi);
      }
      break;
  }
  Eigen::MatrixXd H = A_.transpose() * curvature.asDiagonal() * A_;
  H.diagonal().array() += ridge();
  return H;
}

std::tuple<double, Eigen::VectorXd, Eigen::MatrixXd> LossModel::objective_gradient_hessian(
    const Eigen::VectorXd& x) const {
  return {value(x), gradient(x), hessian(x)};
}

Eigen::MatrixXd LocalModel::hessian() const {
  Eigen::MatrixXd H = A_t.transpose() * A_t;
  H.diagonal().array() += ridge;
  return H;
}

Eigen::VectorXd LocalModel::gradient() const {
  return A_t.transpose() * b_t + ridge * x_t + grad_extra;
}

LocalModel local_model(const LossModel& loss, const Eigen::VectorXd& x) {
  if (x.size() != loss.d()) throw InputError("local_model: wrong dimension");
  if (!loss.in_domain(x)) throw SolverError("local_model: infeasible point");

  LocalModel lm;
  lm.x_t = x;
  lm.ridge = loss.ridge();
  lm.grad_extra = Eigen::VectorXd::Zero(loss.d());

  const Eigen::MatrixXd& A = loss.data();
  if (loss.kind() == LossKind::quadratic) {
    lm.A_t = A;
    lm.b_t = A * x - loss.targets();
    return lm;
  }

  const Eigen::VectorXd z = A * x;
  const double scale =
      loss.kind() == LossKind::logistic ? 1.0 / static_cast<double>(loss.n()) : 1.0;
  lm.A_t.resize(A.rows(), A.cols());
  lm.b_t.resize(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    double first, second;
    if (loss.kind() == LossKind::logistic) {
      const double s = sigmoid(z[i]);
      first = s - loss.targets()[i];
      second = s * (1.0 - s);
    } else {
      const double lo = loss.barrier_t() - z[i];
      const double hi = z[i] + loss.barrier_t();
      first = 1.0 / lo - 1.0 / hi;
      second = 1.0 / (lo * lo) + 1.0 / (hi * hi);
    }
    if (second < kCurvatureClamp) {
      // Saturated row: no usable curvature. Keep its gradient contribution
      // as an additive term instead of dividing by ~0.
      lm.A_t.row(i).setZero();
      lm.b_t[i] = 0.0;
      lm.grad_extra += scale * first * A.row(i).transpose();
      continue;
    }
    const double w = std::sqrt(second * scale);
    lm.A_t.row(i) = w * A.row(i);
    lm.b_t[i] = scale * first / w;
  }
  if (loss.kind() == LossKind::log_barrier) {
    lm.grad_extra -= 2.0 * loss.lambda() * loss.barrier_c();
  }
  return lm;
}

double backtracking_line_search(const LossModel& loss, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& direction,
                                const LineSearchParams& params) {
  if (direction.size() != x.size()) throw InputError("line search: dimension mismatch");
  const double f0 = loss.value(x);
  const double slope = loss.gradient(x).dot(direction);
  const bool descent = slope < 0.0;

  double alpha = params.a0;
  for (int k = 0; k <= params.max_halvings; ++k, alpha /= params.tau) {
    const Eigen::VectorXd trial = x + alpha * direction;
    if (!loss.in_domain(trial)) continue;
    const double f_trial = loss.value(trial);
    if (descent ? (f_trial <= f0 + params.c * alpha * slope) : (f_trial <= f0)) {
      return alpha;
    }
  }
  throw SolverError("line search: no acceptable step within the halving budget");
}

}  // namespace desketch
