#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "loco/rng.hpp"

namespace loco {

/// Matrix-free linear map with an explicit adjoint.
struct LinearMapHandle {
  int rows = 0;
  int cols = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_adjoint;
  /// Set when the map is known to be identically zero (e.g. empty mask).
  bool zero_map = false;

  static LinearMapHandle from_matrix(Eigen::MatrixXd a);
};

/// Checks <u, A v> == <A^T u, v> on n random probe pairs, relative to
/// ||u|| ||v|| and the observed operator scale; throws std::runtime_error
/// on violation.
void probe_adjoint_consistency(const LinearMapHandle& map, Rng& rng,
                               int n_probes = 10, double tol = 1e-8);

struct TruncatedSvd {
  Eigen::MatrixXd u;      // rows x k, orthonormal columns
  Eigen::VectorXd sigma;  // k values, nonincreasing
  Eigen::MatrixXd v;      // cols x k, orthonormal columns
  double residual = 0.0;  // last relative change of the sigma estimates
  bool converged = false;
  std::vector<Eigen::VectorXd> sigma_trace;  // per-iteration estimates
};

inline constexpr int kGpmMaxIters = 500;
inline constexpr double kGpmTol = 1e-9;

/// Top-k singular triplets by subspace power iteration using only apply and
/// apply_adjoint: seed V with standard normal entries, QR-orthonormalize,
/// then iterate U <- A V, V_hat <- A^T U, reduced SVD of V_hat to refresh
/// (V, sigma), until the relative change of sigma drops below tol or
/// max_iters is hit. On exit U is re-orthonormalized (a Rayleigh-Ritz pass
/// over A V that also aligns the triplets), and each v_i is flipped so its
/// largest-magnitude entry is positive.
///
/// Intermediate U is recomputed from scratch every iteration, which keeps it
/// orthogonal in practice even though the update rule only demands
/// orthonormalization on exit.
///
/// Non-convergence is not an error: the best iterate is returned with
/// converged == false and residual above tol.
TruncatedSvd gpm_topk(const LinearMapHandle& map, int k, Rng& rng,
                      int max_iters = kGpmMaxIters, double tol = kGpmTol);

struct DenseSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd v;
};

/// Full SVD oracle (one-sided Jacobi), sign-fixed like gpm_topk.
/// Throws std::length_error above kDenseDimCap.
DenseSvd dense_svd(const Eigen::MatrixXd& a);

/// Smallest r with sqrt(sum_{i<=r} sigma_i^2 / sum_i sigma_i^2) > eta.
/// Requires 0 < eta < 1 and sigma nonincreasing and nonnegative; an all-zero
/// spectrum has rank 0 by convention (the energy ratio is 0/0 there).
int numerical_rank(const Eigen::VectorXd& sigma, double eta = 0.99);

/// Count of singular values above 1e-10 * sigma_1 (exact-rank diagnostic).
int raw_rank(const Eigen::VectorXd& sigma);

/// Principal angles between the column spans of two orthonormal matrices:
/// arccos of the singular values of A^T B, clipped into [0, 1] first.
/// Returned nondecreasing. Inputs must be orthonormal within 1e-8.
Eigen::VectorXd principal_angles(const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b);

/// Idempotent projection onto the orthogonal complement of span(vbar).
/// An empty basis (0 columns) is the identity.
struct NullspaceProjector {
  Eigen::MatrixXd vbar;  // orthonormal columns
  Eigen::VectorXd operator()(const Eigen::VectorXd& v) const;
};

/// Singular directions at or below sigma_floor = floor_rel * sigma_1 are
/// numerically null; they are dropped before nullspace projection so a zero
/// map yields the identity projector.
inline constexpr double kSigmaFloorRel = 1e-8;
Eigen::MatrixXd retained_basis(const TruncatedSvd& svd,
                               double floor_rel = kSigmaFloorRel);

/// Numerical rank from a truncated spectrum: the denominator energy
/// ||A||_F^2 is estimated with Hutchinson probes (E ||A z||^2) since the
/// tail is not available.
int numerical_rank_with_tail(const TruncatedSvd& svd,
                             const LinearMapHandle& map, double eta, Rng& rng);

/// Numerical rank of a map too large to materialize: top-k spectrum via
/// gpm_topk plus the tail-energy estimate above.
int estimate_numerical_rank(const LinearMapHandle& map, int k, double eta,
                            Rng& rng);

}  // namespace loco
