#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "loco/molrg.hpp"
#include "loco/schedule.hpp"

namespace loco {

enum class GridKind {
  kUniform,    // uniform in t
  kQuadratic,  // uniform in sqrt(t); concentrates steps near t = 0
};

/// n_steps + 1 strictly monotone nodes from t_from to t_to (either
/// direction), endpoints exact.
std::vector<double> time_grid(double t_from, double t_to, int n_steps,
                              GridKind kind = GridKind::kUniform);

/// Noise predictor eps_hat(x, t).
using EpsPredictor =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;

/// One deterministic update from t to t_next (denoise when t_next < t,
/// invert when t_next > t), with eps_hat evaluated at the current (x, t):
///   x' = sqrt(a') (x - sqrt(1-a) eps_hat) / sqrt(a) + sqrt(1-a') eps_hat.
/// Requires t, t_next in [0, 1], t != t_next, and alpha(t) > 0 (one cannot
/// step away from exact t = 1; start the grid strictly below it).
Eigen::VectorXd ddim_step(const NoiseSchedule& schedule,
                          const Eigen::VectorXd& x, double t, double t_next,
                          const EpsPredictor& eps_fn);

/// Composes ddim_step along a grid between t_from and t_to; the same call
/// denoises (t_to < t_from) and inverts (t_to > t_from). t_from == t_to is
/// the identity.
Eigen::VectorXd integrate(const NoiseSchedule& schedule, Eigen::VectorXd x,
                          double t_from, double t_to, int n_steps,
                          const EpsPredictor& eps_fn,
                          GridKind kind = GridKind::kUniform);

/// The exact noise predictor of the analytic model. At t = 0 the prediction
/// is defined as zero, the limit along trajectories of on-manifold points;
/// this is what lets inversion grids start at exactly t = 0.
EpsPredictor analytic_eps_predictor(const SubspaceModel& model,
                                    const NoiseSchedule& schedule);

/// Relative error of inverting x0 to t_mid and denoising back, with the
/// analytic predictor. Zero by construction at t_mid = 0.
double roundtrip_error(const SubspaceModel& model,
                       const NoiseSchedule& schedule,
                       const Eigen::VectorXd& x0, double t_mid, int n_steps,
                       GridKind kind = GridKind::kUniform);

}  // namespace loco
