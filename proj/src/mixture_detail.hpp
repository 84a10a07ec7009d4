#pragma once

#include <Eigen/Core>

#include "loco/molrg.hpp"
#include "loco/schedule.hpp"

namespace loco::detail {

// Softmax logits of the mixture responsibilities at (x_t, t), t in (0, 1]:
//   alpha/(2(1-alpha)) ||M_k^T x||^2 + (r_k/2) log(1-alpha).
// Shared by the density, the score and the posterior weights so the three
// agree to the bit.
Eigen::VectorXd mixture_logits(const SubspaceModel& model,
                               const NoiseSchedule& schedule,
                               const Eigen::VectorXd& x_t, double t);

// Max-shifted softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

}  // namespace loco::detail
