#pragma once

#include <Eigen/Core>

#include "loco/molrg.hpp"
#include "loco/rng.hpp"
#include "loco/schedule.hpp"

namespace loco {

/// Largest dimension for which dense d x d Jacobians may be materialized.
inline constexpr int kDenseDimCap = 4096;

/// Posterior component weights w_k(x_t): a max-shifted softmax over
///   alpha/(2(1-alpha)) ||M_k^T x_t||^2 + (r_k/2) log(1-alpha).
/// The second term is the per-component covariance log-determinant offset;
/// it is constant in x_t, vanishes whenever all ranks are equal, and makes
/// the weights the exact mixture responsibilities for unequal ranks (so the
/// score really is the gradient of log_density and the Tweedie route agrees
/// with the direct one).
///
/// Defined for t in (0, 1]; uniform at t = 1; throws at t = 0.
Eigen::VectorXd posterior_weights(const SubspaceModel& model,
                                  const NoiseSchedule& schedule,
                                  const Eigen::VectorXd& x_t, double t);

/// E[x0 | x_t] = sqrt(alpha) sum_k w_k M_k M_k^T x_t, for t in (0, 1].
/// The result lies in the span of the stacked basis.
Eigen::VectorXd posterior_mean(const SubspaceModel& model,
                               const NoiseSchedule& schedule,
                               const Eigen::VectorXd& x_t, double t);

/// Same quantity assembled from the score, (x_t + (1-alpha) score)/sqrt(alpha).
/// Exists only as an independent cross-check path; t in (0, 1).
Eigen::VectorXd posterior_mean_via_tweedie(const SubspaceModel& model,
                                           const NoiseSchedule& schedule,
                                           const Eigen::VectorXd& x_t,
                                           double t);

/// Exact Jacobian of posterior_mean at (x_t, t), t in (0, 1):
///   J = sqrt(a) A + a sqrt(a)/(1-a) (B - C),
///   A = sum_k w_k M_k M_k^T,
///   B = sum_k w_k (M_k M_k^T x)(M_k M_k^T x)^T,
///   C = (A x)(A x)^T.
/// Assembled from outer products so the result is symmetric to the bit.
/// Rank is at most the total subspace rank. Throws std::length_error above
/// kDenseDimCap.
Eigen::MatrixXd jacobian_dense(const SubspaceModel& model,
                               const NoiseSchedule& schedule,
                               const Eigen::VectorXd& x_t, double t);

/// Noise prediction consistent with the analytic posterior mean:
///   (x_t - sqrt(alpha) f(x_t)) / sqrt(1 - alpha), t in (0, 1].
Eigen::VectorXd epsilon_predictor(const SubspaceModel& model,
                                  const NoiseSchedule& schedule,
                                  const Eigen::VectorXd& x_t, double t);

enum class JacobianMode { kAnalytic, kFiniteDifference };

/// Matrix-free symmetric view of the posterior-mean Jacobian at a fixed
/// (x_t, t). Analytic mode applies the A/B/C form without materializing J;
/// finite-difference mode central-differences posterior_mean. Immutable and
/// shareable once built.
class JacobianOperator {
 public:
  JacobianOperator(const SubspaceModel& model, const NoiseSchedule& schedule,
                   Eigen::VectorXd x_t, double t,
                   JacobianMode mode = JacobianMode::kAnalytic);

  Eigen::VectorXd jvp(const Eigen::VectorXd& v) const;

  /// J^T u. Analytic mode returns jvp(u) (the map is symmetric);
  /// finite-difference mode differentiates u . f(x) coordinate by
  /// coordinate.
  Eigen::VectorXd vjp(const Eigen::VectorXd& u) const;

  int dim() const { return static_cast<int>(x_t_.size()); }
  double t() const { return t_; }
  const Eigen::VectorXd& x_t() const { return x_t_; }
  JacobianMode mode() const { return mode_; }

 private:
  double fd_step(const Eigen::VectorXd& v) const;

  const SubspaceModel* model_;
  NoiseSchedule schedule_;
  Eigen::VectorXd x_t_;
  double t_;
  JacobianMode mode_;

  // analytic-mode precomputation
  double sqrt_alpha_ = 0.0;
  double curvature_coeff_ = 0.0;  // alpha sqrt(alpha) / (1 - alpha)
  Eigen::VectorXd weights_;
  std::vector<Eigen::VectorXd> projected_x_;  // M_k M_k^T x per component
  Eigen::VectorXd ax_;                        // A x
};

/// Best linear denoiser x0_hat = W_t x_t by least squares on n_samples
/// (x_t, x0) pairs: W = S_0t S_tt^{-1} with a 1e-8 tr(S_tt)/d ridge on the
/// diagonal. Requires n_samples >= 10 d.
Eigen::MatrixXd fit_linear_denoiser(const SubspaceModel& model,
                                    const NoiseSchedule& schedule, double t,
                                    int n_samples, Rng& rng);

}  // namespace loco
