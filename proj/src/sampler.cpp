#include "loco/sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "loco/pmp.hpp"

namespace loco {

std::vector<double> time_grid(double t_from, double t_to, int n_steps,
                              GridKind kind) {
  if (n_steps < 1) throw std::invalid_argument("time_grid: n_steps < 1");
  for (double t : {t_from, t_to})
    if (!(t >= 0.0 && t <= 1.0))
      throw std::domain_error("time_grid: endpoint outside [0, 1]");

  std::vector<double> nodes(n_steps + 1);
  switch (kind) {
    case GridKind::kUniform:
      for (int i = 0; i <= n_steps; ++i) {
        const double u = static_cast<double>(i) / n_steps;
        nodes[i] = t_from + (t_to - t_from) * u;
      }
      break;
    case GridKind::kQuadratic: {
      const double s_from = std::sqrt(t_from);
      const double s_to = std::sqrt(t_to);
      for (int i = 0; i <= n_steps; ++i) {
        const double u = static_cast<double>(i) / n_steps;
        const double s = s_from + (s_to - s_from) * u;
        nodes[i] = s * s;
      }
      break;
    }
  }
  nodes.front() = t_from;
  nodes.back() = t_to;
  return nodes;
}

Eigen::VectorXd ddim_step(const NoiseSchedule& schedule,
                          const Eigen::VectorXd& x, double t, double t_next,
                          const EpsPredictor& eps_fn) {
  for (double v : {t, t_next})
    if (!(v >= 0.0 && v <= 1.0))
      throw std::domain_error("ddim_step: time outside [0, 1]");
  if (t == t_next)
    throw std::domain_error("ddim_step: t_next == t (degenerate step)");
  const double a = schedule.alpha(t);
  if (a == 0.0)
    throw std::domain_error(
        "ddim_step: alpha(t) = 0; cannot step away from exact t = 1");
  const double a_next = schedule.alpha(t_next);

  const Eigen::VectorXd eps = eps_fn(x, t);
  const Eigen::VectorXd x0_hat = (x - std::sqrt(1.0 - a) * eps) / std::sqrt(a);
  return std::sqrt(a_next) * x0_hat + std::sqrt(1.0 - a_next) * eps;
}

Eigen::VectorXd integrate(const NoiseSchedule& schedule, Eigen::VectorXd x,
                          double t_from, double t_to, int n_steps,
                          const EpsPredictor& eps_fn, GridKind kind) {
  if (t_from == t_to) return x;
  const std::vector<double> nodes = time_grid(t_from, t_to, n_steps, kind);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    x = ddim_step(schedule, x, nodes[i], nodes[i + 1], eps_fn);
  return x;
}

EpsPredictor analytic_eps_predictor(const SubspaceModel& model,
                                    const NoiseSchedule& schedule) {
  return [&model, schedule](const Eigen::VectorXd& x,
                            double t) -> Eigen::VectorXd {
    // At t = 0 the predictor is 0/0; zero is its limit along trajectories of
    // on-manifold points, and it is what makes inversion grids that start at
    // exactly t = 0 well defined.
    if (t == 0.0) return Eigen::VectorXd::Zero(x.size());
    return epsilon_predictor(model, schedule, x, t);
  };
}

double roundtrip_error(const SubspaceModel& model,
                       const NoiseSchedule& schedule,
                       const Eigen::VectorXd& x0, double t_mid, int n_steps,
                       GridKind kind) {
  const EpsPredictor eps = analytic_eps_predictor(model, schedule);
  const Eigen::VectorXd up =
      integrate(schedule, x0, 0.0, t_mid, n_steps, eps, kind);
  const Eigen::VectorXd down =
      integrate(schedule, up, t_mid, 0.0, n_steps, eps, kind);
  const double scale = x0.norm();
  const double err = (down - x0).norm();
  return scale > 0.0 ? err / scale : err;
}

}  // namespace loco
