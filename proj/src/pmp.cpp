#include "loco/pmp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "mixture_detail.hpp"

namespace loco {

namespace {

void require_open_unit(double t, const char* who, bool allow_one) {
  const bool ok = allow_one ? (t > 0.0 && t <= 1.0) : (t > 0.0 && t < 1.0);
  if (!ok)
    throw std::domain_error(std::string(who) + ": t = " + std::to_string(t) +
                            " outside the valid range");
}

// sum_k w_k M_k M_k^T x without forming the projectors.
Eigen::VectorXd weighted_projection(const SubspaceModel& model,
                                    const Eigen::VectorXd& w,
                                    const Eigen::VectorXd& x) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (int k = 0; k < model.num_components(); ++k)
    out.noalias() += w[k] * (model.basis(k) * (model.basis(k).transpose() * x));
  return out;
}

}  // namespace

Eigen::VectorXd posterior_weights(const SubspaceModel& model,
                                  const NoiseSchedule& schedule,
                                  const Eigen::VectorXd& x_t, double t) {
  require_open_unit(t, "posterior_weights", /*allow_one=*/true);
  return detail::softmax(detail::mixture_logits(model, schedule, x_t, t));
}

Eigen::VectorXd posterior_mean(const SubspaceModel& model,
                               const NoiseSchedule& schedule,
                               const Eigen::VectorXd& x_t, double t) {
  require_open_unit(t, "posterior_mean", /*allow_one=*/true);
  const double a = schedule.alpha(t);
  const Eigen::VectorXd w = posterior_weights(model, schedule, x_t, t);
  return std::sqrt(a) * weighted_projection(model, w, x_t);
}

Eigen::VectorXd posterior_mean_via_tweedie(const SubspaceModel& model,
                                           const NoiseSchedule& schedule,
                                           const Eigen::VectorXd& x_t,
                                           double t) {
  require_open_unit(t, "posterior_mean_via_tweedie", /*allow_one=*/false);
  const double a = schedule.alpha(t);
  return (x_t + (1.0 - a) * score(model, schedule, x_t, t)) / std::sqrt(a);
}

Eigen::MatrixXd jacobian_dense(const SubspaceModel& model,
                               const NoiseSchedule& schedule,
                               const Eigen::VectorXd& x_t, double t) {
  require_open_unit(t, "jacobian_dense", /*allow_one=*/false);
  const int d = model.dim();
  if (d > kDenseDimCap)
    throw std::length_error("jacobian_dense: dim " + std::to_string(d) +
                            " exceeds the dense cap");

  const double a = schedule.alpha(t);
  const double s = std::sqrt(a);
  const double c = a * s / (1.0 - a);
  const Eigen::VectorXd w = posterior_weights(model, schedule, x_t, t);

  // Every term is accumulated as v v^T outer products, which are symmetric
  // entry for entry, so J - J^T is exactly zero.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd ax = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < model.num_components(); ++k) {
    const Eigen::MatrixXd& basis = model.basis(k);
    for (int j = 0; j < basis.cols(); ++j)
      jac.noalias() += (s * w[k]) * (basis.col(j) * basis.col(j).transpose());
    const Eigen::VectorXd pk = basis * (basis.transpose() * x_t);
    jac.noalias() += (c * w[k]) * (pk * pk.transpose());
    ax.noalias() += w[k] * pk;
  }
  jac.noalias() -= c * (ax * ax.transpose());
  return jac;
}

Eigen::VectorXd epsilon_predictor(const SubspaceModel& model,
                                  const NoiseSchedule& schedule,
                                  const Eigen::VectorXd& x_t, double t) {
  require_open_unit(t, "epsilon_predictor", /*allow_one=*/true);
  const double a = schedule.alpha(t);
  return (x_t - std::sqrt(a) * posterior_mean(model, schedule, x_t, t)) /
         std::sqrt(1.0 - a);
}

JacobianOperator::JacobianOperator(const SubspaceModel& model,
                                   const NoiseSchedule& schedule,
                                   Eigen::VectorXd x_t, double t,
                                   JacobianMode mode)
    : model_(&model),
      schedule_(schedule),
      x_t_(std::move(x_t)),
      t_(t),
      mode_(mode) {
  require_open_unit(t, "JacobianOperator", /*allow_one=*/false);
  const double a = schedule_.alpha(t_);
  sqrt_alpha_ = std::sqrt(a);
  curvature_coeff_ = a * sqrt_alpha_ / (1.0 - a);
  weights_ = posterior_weights(*model_, schedule_, x_t_, t_);
  ax_ = Eigen::VectorXd::Zero(dim());
  projected_x_.reserve(model_->num_components());
  for (int k = 0; k < model_->num_components(); ++k) {
    projected_x_.push_back(model_->basis(k) *
                           (model_->basis(k).transpose() * x_t_));
    ax_.noalias() += weights_[k] * projected_x_.back();
  }
}

double JacobianOperator::fd_step(const Eigen::VectorXd& v) const {
  return std::max(1e-5, 1e-7 * x_t_.norm() / std::max(v.norm(), 1e-12));
}

Eigen::VectorXd JacobianOperator::jvp(const Eigen::VectorXd& v) const {
  if (v.size() != x_t_.size())
    throw std::invalid_argument("jvp: dimension mismatch");
  if (mode_ == JacobianMode::kFiniteDifference) {
    const double h = fd_step(v);
    const Eigen::VectorXd hi =
        posterior_mean(*model_, schedule_, x_t_ + h * v, t_);
    const Eigen::VectorXd lo =
        posterior_mean(*model_, schedule_, x_t_ - h * v, t_);
    return (hi - lo) / (2.0 * h);
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
  for (int k = 0; k < model_->num_components(); ++k) {
    const Eigen::MatrixXd& basis = model_->basis(k);
    // sqrt(a) A v
    out.noalias() +=
        (sqrt_alpha_ * weights_[k]) * (basis * (basis.transpose() * v));
    // + c B v
    out.noalias() +=
        (curvature_coeff_ * weights_[k] * projected_x_[k].dot(v)) *
        projected_x_[k];
  }
  // - c C v
  out.noalias() -= (curvature_coeff_ * ax_.dot(v)) * ax_;
  return out;
}

Eigen::VectorXd JacobianOperator::vjp(const Eigen::VectorXd& u) const {
  if (u.size() != x_t_.size())
    throw std::invalid_argument("vjp: dimension mismatch");
  if (mode_ == JacobianMode::kAnalytic) return jvp(u);

  // Gradient of x -> <u, f(x)> by central differences, one coordinate batch
  // per axis.
  const int d = dim();
  const double h = std::max(1e-5, 1e-7 * x_t_.norm());
  Eigen::VectorXd grad(d);
  Eigen::VectorXd probe = x_t_;
  for (int i = 0; i < d; ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double hi = u.dot(posterior_mean(*model_, schedule_, probe, t_));
    probe[i] = saved - h;
    const double lo = u.dot(posterior_mean(*model_, schedule_, probe, t_));
    probe[i] = saved;
    grad[i] = (hi - lo) / (2.0 * h);
  }
  return grad;
}

Eigen::MatrixXd fit_linear_denoiser(const SubspaceModel& model,
                                    const NoiseSchedule& schedule, double t,
                                    int n_samples, Rng& rng) {
  const int d = model.dim();
  if (n_samples < 10 * d)
    throw std::invalid_argument(
        "fit_linear_denoiser: need at least 10 d samples, got " +
        std::to_string(n_samples));

  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(d, d);  // E[x0 x_t^T]
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);  // E[x_t x_t^T]
  for (int i = 0; i < n_samples; ++i) {
    const Sample s = sample_x0(model, rng);
    const Eigen::VectorXd x_t = forward_noise(schedule, s.x0, t, rng);
    cross.noalias() += s.x0 * x_t.transpose();
    second.noalias() += x_t * x_t.transpose();
  }
  cross /= n_samples;
  second /= n_samples;
  second.diagonal().array() += 1e-8 * second.trace() / d;

  // W = S_0t S_tt^{-1}; solve the transposed system with the symmetric S_tt.
  return second.ldlt().solve(cross.transpose()).transpose();
}

}  // namespace loco
