#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "loco/rng.hpp"
#include "loco/schedule.hpp"

namespace loco {

/// Ground-truth data model: a uniform mixture over K mutually orthogonal
/// low-dimensional subspaces. Component k has an orthonormal basis
/// M_k (d x r_k); clean points are M_k a_k with a_k standard normal.
///
/// Immutable after construction and safe to share across threads.
class SubspaceModel {
 public:
  /// Bases drawn by QR-orthonormalizing a seeded Gaussian d x (sum r_k)
  /// matrix and slicing columns per component. Deterministic for a seed.
  static SubspaceModel random(int dim, const std::vector<int>& ranks,
                              std::uint64_t seed);

  /// Validates orthonormality of each basis and mutual orthogonality
  /// (both to 1e-10); throws std::invalid_argument on violation.
  static SubspaceModel from_bases(std::vector<Eigen::MatrixXd> bases);

  int dim() const { return dim_; }
  int num_components() const { return static_cast<int>(bases_.size()); }
  int rank(int k) const { return static_cast<int>(bases_[k].cols()); }
  int total_rank() const;
  int max_rank() const;
  const Eigen::MatrixXd& basis(int k) const { return bases_[k]; }

  /// Stacked basis [M_1 ... M_K], d x total_rank.
  Eigen::MatrixXd stacked_basis() const;

  /// Plain-text format: header "d K r_1 ... r_K", then one row of d values
  /// per basis column, 17 significant digits.
  void save(const std::filesystem::path& file) const;
  static SubspaceModel load(const std::filesystem::path& file);

 private:
  explicit SubspaceModel(std::vector<Eigen::MatrixXd> bases);

  int dim_ = 0;
  std::vector<Eigen::MatrixXd> bases_;
};

/// A clean draw together with its provenance; x0 == basis(component) * coeff.
struct Sample {
  Eigen::VectorXd x0;
  int component = 0;
  Eigen::VectorXd coeff;
};

/// Component uniform over [0, K), coefficients standard normal.
Sample sample_x0(const SubspaceModel& model, Rng& rng);

/// x_t = sqrt(alpha_t) x0 + sqrt(1 - alpha_t) eps for the given noise draw.
Eigen::VectorXd forward_noise_from(const NoiseSchedule& schedule,
                                   const Eigen::VectorXd& x0, double t,
                                   const Eigen::VectorXd& eps);

/// Same with eps drawn standard normal from rng.
Eigen::VectorXd forward_noise(const NoiseSchedule& schedule,
                              const Eigen::VectorXd& x0, double t, Rng& rng);

/// Log density of the noised mixture at time t in (0, 1]. Each component is
/// N(0, alpha_t M_k M_k^T + (1 - alpha_t) I); its inverse and determinant
/// are evaluated in closed form (the covariance has eigenvalue 1 on the
/// subspace and 1 - alpha_t off it), and the mixture is assembled with a
/// max-shifted log-sum-exp. Throws std::domain_error at t = 0 where the
/// covariance is singular.
double log_density(const SubspaceModel& model, const NoiseSchedule& schedule,
                   const Eigen::VectorXd& x_t, double t);

/// Gradient of log_density in x_t:
///   -x_t/(1-alpha) + alpha/(1-alpha) * sum_k w_k M_k M_k^T x_t,
/// with w the posterior component weights (see pmp). t in (0, 1].
Eigen::VectorXd score(const SubspaceModel& model, const NoiseSchedule& schedule,
                      const Eigen::VectorXd& x_t, double t);

}  // namespace loco
