#pragma once

#include <filesystem>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "loco/pmp.hpp"
#include "loco/sampler.hpp"
#include "loco/spectral.hpp"

namespace loco {

/// Region-of-interest mask: a sorted set of unique coordinate indices in
/// [0, dim). project() zeroes every coordinate outside the set.
class Mask {
 public:
  Mask() = default;
  Mask(int dim, std::vector<int> indices);
  static Mask all(int dim);

  int dim() const { return dim_; }
  const std::vector<int>& indices() const { return indices_; }
  bool empty() const { return indices_.empty(); }
  bool full() const { return static_cast<int>(indices_.size()) == dim_; }
  Mask complement() const;

  Eigen::VectorXd project(const Eigen::VectorXd& v) const;

 private:
  int dim_ = 0;
  std::vector<int> indices_;
};

/// The picked direction lay almost entirely in the outside-mask span; the
/// mask and pick are incompatible.
struct DegenerateDirectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A discovered unit editing direction in x_t-space, with everything needed
/// to re-apply or transfer it.
struct EditDirection {
  Eigen::VectorXd v_p;  // unit norm
  double t = 0.0;       // discovery timestep
  Mask omega;
  int pick = 1;        // which singular vector was taken (1-based)
  double sigma = 0.0;  // its singular value

  /// Plain text: header "d t pick sigma", mask indices on line 2,
  /// one v_p component per line, 17 significant digits.
  void save(const std::filesystem::path& file) const;
  static EditDirection load(const std::filesystem::path& file);
};

/// Row-masked Jacobian handle: v -> P_omega(J v), adjoint u -> J P_omega(u).
/// An empty mask gives the zero map (flagged on the handle). The handle is
/// adjoint-probed at construction.
LinearMapHandle masked_jacobian(const SubspaceModel& model,
                                const NoiseSchedule& schedule,
                                const Eigen::VectorXd& x_t, double t,
                                const Mask& omega,
                                JacobianMode mode = JacobianMode::kAnalytic);

struct EditDiscoveryOptions {
  int r = 5;       // how many in-mask singular vectors to compute
  int r_null = 5;  // rank of the outside-mask nullspace estimate
  int pick = 1;    // which of the r directions to take (1-based)
  int gpm_max_iters = kGpmMaxIters;
  double gpm_tol = kGpmTol;
};

/// Direction discovery: top-r SVD of the in-mask Jacobian, take column
/// `pick` of V, project out the retained right singular directions of the
/// outside-mask Jacobian, renormalize. Throws DegenerateDirectionError when
/// the projected vector has norm below 1e-8.
EditDirection find_edit_directions(const SubspaceModel& model,
                                   const NoiseSchedule& schedule,
                                   const Eigen::VectorXd& x_t, double t,
                                   const Mask& omega,
                                   const EditDiscoveryOptions& options,
                                   Rng& rng);

/// Posterior mean of the perturbed point, f(x_t + lambda v_p).
/// Requires dir.t == t; transfers across timesteps go through
/// transfer_edit so the mismatch is explicit.
Eigen::VectorXd one_step_edit(const SubspaceModel& model,
                              const NoiseSchedule& schedule,
                              const Eigen::VectorXd& x_t, double t,
                              const EditDirection& dir, double lambda);

/// Full pipeline: invert x0 to dir.t, add lambda v_p, denoise back to 0.
Eigen::VectorXd apply_edit(const SubspaceModel& model,
                           const NoiseSchedule& schedule,
                           const Eigen::VectorXd& x0, double t,
                           const EditDirection& dir, double lambda,
                           int n_steps, GridKind grid = GridKind::kUniform);

/// Applies a discovered direction to a different sample and (optionally)
/// timestep, with no rescaling.
Eigen::VectorXd transfer_edit(const SubspaceModel& model,
                              const NoiseSchedule& schedule,
                              const EditDirection& dir,
                              const Eigen::VectorXd& other_x0, double t_target,
                              double lambda, int n_steps,
                              GridKind grid = GridKind::kUniform);

/// sum_i lambda_i v_p_i, not renormalized (strengths carry meaning).
/// All directions must share the same timestep. Empty input is the zero
/// perturbation.
Eigen::VectorXd compose_directions(
    int dim, const std::vector<std::pair<double, EditDirection>>& parts);

struct DisentanglementScore {
  double inside = 0.0;   // ||P_omega(f(x_t + lambda v_p) - f(x_t))||
  double outside = 0.0;  // same outside the mask
};

DisentanglementScore disentanglement_score(const SubspaceModel& model,
                                           const NoiseSchedule& schedule,
                                           const Eigen::VectorXd& x_t,
                                           double t, const EditDirection& dir,
                                           double lambda);

}  // namespace loco
