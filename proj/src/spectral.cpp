#include "loco/spectral.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "loco/pmp.hpp"  // kDenseDimCap

namespace loco {

LinearMapHandle LinearMapHandle::from_matrix(Eigen::MatrixXd a) {
  auto mat = std::make_shared<Eigen::MatrixXd>(std::move(a));
  LinearMapHandle handle;
  handle.rows = static_cast<int>(mat->rows());
  handle.cols = static_cast<int>(mat->cols());
  handle.apply = [mat](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return *mat * v;
  };
  handle.apply_adjoint = [mat](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return mat->transpose() * u;
  };
  return handle;
}

void probe_adjoint_consistency(const LinearMapHandle& map, Rng& rng,
                               int n_probes, double tol) {
  for (int i = 0; i < n_probes; ++i) {
    const Eigen::VectorXd v = rng.normal_vector(map.cols);
    const Eigen::VectorXd u = rng.normal_vector(map.rows);
    const Eigen::VectorXd av = map.apply(v);
    const Eigen::VectorXd atu = map.apply_adjoint(u);
    const double lhs = u.dot(av);
    const double rhs = atu.dot(v);
    // Scale by the probe norms and the observed operator magnitude so the
    // zero map passes trivially.
    const double scale =
        u.norm() * v.norm() *
        std::max(1.0, std::max(av.norm() / std::max(v.norm(), 1e-300),
                               atu.norm() / std::max(u.norm(), 1e-300)));
    if (std::abs(lhs - rhs) > tol * scale)
      throw std::runtime_error(
          "adjoint consistency probe failed: |" + std::to_string(lhs) + " - " +
          std::to_string(rhs) + "| > " + std::to_string(tol) + " * scale");
  }
}

namespace {

// Flip each v_i so its largest-magnitude entry is positive; u_i follows.
void apply_sign_convention(Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
  for (int j = 0; j < v.cols(); ++j) {
    int arg = 0;
    v.col(j).cwiseAbs().maxCoeff(&arg);
    if (v(arg, j) < 0.0) {
      v.col(j) = -v.col(j);
      if (j < u.cols()) u.col(j) = -u.col(j);
    }
  }
}

Eigen::MatrixXd apply_columns(const LinearMapHandle& map,
                              const Eigen::MatrixXd& v, bool adjoint) {
  Eigen::MatrixXd out(adjoint ? map.cols : map.rows, v.cols());
  for (int j = 0; j < v.cols(); ++j)
    out.col(j) = adjoint ? map.apply_adjoint(v.col(j)) : map.apply(v.col(j));
  return out;
}

}  // namespace

TruncatedSvd gpm_topk(const LinearMapHandle& map, int k, Rng& rng,
                      int max_iters, double tol) {
  if (map.rows < 1 || map.cols < 1)
    throw std::invalid_argument("gpm_topk: empty map");
  if (k < 1 || k > std::min(map.rows, map.cols))
    throw std::invalid_argument("gpm_topk: k = " + std::to_string(k) +
                                " outside [1, min(rows, cols)]");
  if (max_iters < 1) throw std::invalid_argument("gpm_topk: max_iters < 1");

  TruncatedSvd result;

  // Random orthonormal start.
  Eigen::MatrixXd v = rng.normal_matrix(map.cols, k);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  v = qr.householderQ() * Eigen::MatrixXd::Identity(map.cols, k);

  Eigen::VectorXd sigma_prev = Eigen::VectorXd::Zero(k);
  double change = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::MatrixXd u = apply_columns(map, v, /*adjoint=*/false);
    const Eigen::MatrixXd v_hat = apply_columns(map, u, /*adjoint=*/true);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        v_hat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    v = svd.matrixU();
    // v_hat = A^T A v_old, so its singular values estimate sigma^2.
    const Eigen::VectorXd sigma_est =
        svd.singularValues().cwiseMax(0.0).cwiseSqrt();
    result.sigma_trace.push_back(sigma_est);

    const double denom = std::max(sigma_est[0], 1e-300);
    change = (sigma_est - sigma_prev).cwiseAbs().maxCoeff() / denom;
    sigma_prev = sigma_est;
    if (iter > 0 && change < tol) {
      result.converged = true;
      break;
    }
  }
  result.residual = change;

  // Rayleigh-Ritz exit: one more application aligns the triplets and
  // orthonormalizes U.
  const Eigen::MatrixXd av = apply_columns(map, v, /*adjoint=*/false);
  Eigen::JacobiSVD<Eigen::MatrixXd> exit_svd(
      av, Eigen::ComputeThinU | Eigen::ComputeThinV);
  result.u = exit_svd.matrixU();
  result.sigma = exit_svd.singularValues();
  result.v = v * exit_svd.matrixV();
  apply_sign_convention(result.u, result.v);
  return result;
}

DenseSvd dense_svd(const Eigen::MatrixXd& a) {
  if (a.rows() > kDenseDimCap || a.cols() > kDenseDimCap)
    throw std::length_error("dense_svd: matrix exceeds the dense cap");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  DenseSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  apply_sign_convention(out.u, out.v);
  return out;
}

int numerical_rank(const Eigen::VectorXd& sigma, double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::domain_error("numerical_rank: eta must lie in (0, 1)");
  if (sigma.size() == 0)
    throw std::invalid_argument("numerical_rank: empty spectrum");
  const double slack = 1e-12 * std::max(1.0, std::abs(sigma[0]));
  for (int i = 0; i < sigma.size(); ++i) {
    if (sigma[i] < 0.0)
      throw std::invalid_argument("numerical_rank: negative singular value");
    if (i > 0 && sigma[i] > sigma[i - 1] + slack)
      throw std::invalid_argument("numerical_rank: spectrum not nonincreasing");
  }
  const double total = sigma.squaredNorm();
  if (total == 0.0) return 0;  // the energy ratio is 0/0; define rank 0
  double cumulative = 0.0;
  for (int r = 1; r <= sigma.size(); ++r) {
    cumulative += sigma[r - 1] * sigma[r - 1];
    if (std::sqrt(cumulative / total) > eta) return r;
  }
  return static_cast<int>(sigma.size());
}

int raw_rank(const Eigen::VectorXd& sigma) {
  if (sigma.size() == 0 || sigma[0] <= 0.0) return 0;
  const double floor = 1e-10 * sigma[0];
  int count = 0;
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma[i] > floor) ++count;
  return count;
}

Eigen::VectorXd principal_angles(const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b) {
  auto check_orthonormal = [](const Eigen::MatrixXd& m, const char* name) {
    Eigen::MatrixXd gram = m.transpose() * m;
    gram -= Eigen::MatrixXd::Identity(m.cols(), m.cols());
    if (gram.cwiseAbs().maxCoeff() > 1e-8)
      throw std::invalid_argument(std::string("principal_angles: ") + name +
                                  " is not orthonormal");
  };
  check_orthonormal(a, "first argument");
  check_orthonormal(b, "second argument");
  if (a.rows() != b.rows())
    throw std::invalid_argument("principal_angles: ambient dims differ");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose() * b);
  Eigen::VectorXd cosines = svd.singularValues().cwiseMin(1.0).cwiseMax(0.0);
  Eigen::VectorXd angles(cosines.size());
  for (int i = 0; i < cosines.size(); ++i) angles[i] = std::acos(cosines[i]);
  return angles;
}

Eigen::VectorXd NullspaceProjector::operator()(
    const Eigen::VectorXd& v) const {
  if (vbar.cols() == 0) return v;
  return v - vbar * (vbar.transpose() * v);
}

Eigen::MatrixXd retained_basis(const TruncatedSvd& svd, double floor_rel) {
  const double top = svd.sigma.size() > 0 ? svd.sigma[0] : 0.0;
  const double floor = floor_rel * top;
  int keep = 0;
  while (keep < svd.sigma.size() && svd.sigma[keep] > floor) ++keep;
  return svd.v.leftCols(keep);
}

int numerical_rank_with_tail(const TruncatedSvd& svd,
                             const LinearMapHandle& map, double eta,
                             Rng& rng) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::domain_error("numerical_rank_with_tail: eta outside (0, 1)");
  // Hutchinson estimate of the total energy: ||A||_F^2 = E ||A z||^2.
  constexpr int kProbes = 16;
  double total = 0.0;
  for (int i = 0; i < kProbes; ++i)
    total += map.apply(rng.normal_vector(map.cols)).squaredNorm();
  total /= kProbes;
  total = std::max(total, svd.sigma.squaredNorm());
  if (total == 0.0) return 0;

  double cumulative = 0.0;
  for (int r = 1; r <= svd.sigma.size(); ++r) {
    cumulative += svd.sigma[r - 1] * svd.sigma[r - 1];
    if (std::sqrt(cumulative / total) > eta) return r;
  }
  // The retained spectrum never reached the energy threshold; everything
  // kept is significant.
  return static_cast<int>(svd.sigma.size());
}

int estimate_numerical_rank(const LinearMapHandle& map, int k, double eta,
                            Rng& rng) {
  const TruncatedSvd svd = gpm_topk(map, k, rng);
  return numerical_rank_with_tail(svd, map, eta, rng);
}

}  // namespace loco
