#include "loco/edit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace loco {

Mask::Mask(int dim, std::vector<int> indices)
    : dim_(dim), indices_(std::move(indices)) {
  if (dim_ < 1) throw std::invalid_argument("Mask: dim must be >= 1");
  std::sort(indices_.begin(), indices_.end());
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0 || indices_[i] >= dim_)
      throw std::invalid_argument("Mask: index " +
                                  std::to_string(indices_[i]) +
                                  " outside [0, " + std::to_string(dim_) + ")");
    if (i > 0 && indices_[i] == indices_[i - 1])
      throw std::invalid_argument("Mask: duplicate index " +
                                  std::to_string(indices_[i]));
  }
}

Mask Mask::all(int dim) {
  std::vector<int> idx(dim);
  for (int i = 0; i < dim; ++i) idx[i] = i;
  return Mask(dim, std::move(idx));
}

Mask Mask::complement() const {
  std::vector<int> out;
  out.reserve(dim_ - indices_.size());
  std::size_t pos = 0;
  for (int i = 0; i < dim_; ++i) {
    if (pos < indices_.size() && indices_[pos] == i) {
      ++pos;
    } else {
      out.push_back(i);
    }
  }
  return Mask(dim_, std::move(out));
}

Eigen::VectorXd Mask::project(const Eigen::VectorXd& v) const {
  if (v.size() != dim_)
    throw std::invalid_argument("Mask::project: dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
  for (int i : indices_) out[i] = v[i];
  return out;
}

void EditDirection::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  char buf[32];
  out << v_p.size() << ' ';
  std::snprintf(buf, sizeof(buf), "%.17g", t);
  out << buf << ' ' << pick << ' ';
  std::snprintf(buf, sizeof(buf), "%.17g", sigma);
  out << buf << '\n';
  for (std::size_t i = 0; i < omega.indices().size(); ++i)
    out << (i ? " " : "") << omega.indices()[i];
  out << '\n';
  for (int i = 0; i < v_p.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", v_p[i]);
    out << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

EditDirection EditDirection::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  EditDirection dir;
  int dim = 0;
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("empty direction file " + file.string());
  {
    std::istringstream hs(header);
    if (!(hs >> dim >> dir.t >> dir.pick >> dir.sigma) || dim < 1)
      throw std::runtime_error("malformed direction header in " +
                               file.string());
  }
  std::string mask_line;
  if (!std::getline(in, mask_line))
    throw std::runtime_error("missing mask line in " + file.string());
  std::vector<int> idx;
  {
    std::istringstream ms(mask_line);
    int i;
    while (ms >> i) idx.push_back(i);
  }
  dir.omega = Mask(dim, std::move(idx));
  dir.v_p.resize(dim);
  for (int i = 0; i < dim; ++i)
    if (!(in >> dir.v_p[i]))
      throw std::runtime_error("truncated direction file " + file.string());
  return dir;
}

LinearMapHandle masked_jacobian(const SubspaceModel& model,
                                const NoiseSchedule& schedule,
                                const Eigen::VectorXd& x_t, double t,
                                const Mask& omega, JacobianMode mode) {
  if (omega.dim() != model.dim())
    throw std::invalid_argument("masked_jacobian: mask dimension mismatch");
  auto op =
      std::make_shared<JacobianOperator>(model, schedule, x_t, t, mode);
  auto mask = std::make_shared<Mask>(omega);

  LinearMapHandle handle;
  handle.rows = model.dim();
  handle.cols = model.dim();
  handle.zero_map = omega.empty();
  handle.apply = [op, mask](const Eigen::VectorXd& v) {
    return mask->project(op->jvp(v));
  };
  handle.apply_adjoint = [op, mask](const Eigen::VectorXd& u) {
    return op->vjp(mask->project(u));
  };

  // Finite differences only reach ~1e-5 agreement between the two routes;
  // the analytic pair is exact.
  const double tol = mode == JacobianMode::kAnalytic ? 1e-8 : 1e-5;
  Rng probe_rng(derive_seed(0x70b3ULL, static_cast<std::uint64_t>(
                                           model.dim())));
  probe_adjoint_consistency(handle, probe_rng, 10, tol);
  return handle;
}

EditDirection find_edit_directions(const SubspaceModel& model,
                                   const NoiseSchedule& schedule,
                                   const Eigen::VectorXd& x_t, double t,
                                   const Mask& omega,
                                   const EditDiscoveryOptions& options,
                                   Rng& rng) {
  const int d = model.dim();
  const int r = std::min(options.r, d);
  const int r_null = std::min(options.r_null, d);
  if (options.pick < 1 || options.pick > r)
    throw std::invalid_argument("find_edit_directions: pick outside [1, r]");

  const LinearMapHandle inside =
      masked_jacobian(model, schedule, x_t, t, omega);
  const TruncatedSvd svd_in =
      gpm_topk(inside, r, rng, options.gpm_max_iters, options.gpm_tol);
  const double sigma_pick = svd_in.sigma[options.pick - 1];
  if (sigma_pick <= 1e-12 || sigma_pick <= kSigmaFloorRel * svd_in.sigma[0])
    throw DegenerateDirectionError(
        "find_edit_directions: the in-mask Jacobian has no signal at pick " +
        std::to_string(options.pick) + " (sigma " +
        std::to_string(sigma_pick) + ")");
  const Eigen::VectorXd v = svd_in.v.col(options.pick - 1);

  const LinearMapHandle outside =
      masked_jacobian(model, schedule, x_t, t, omega.complement());
  const TruncatedSvd svd_out =
      gpm_topk(outside, r_null, rng, options.gpm_max_iters, options.gpm_tol);
  const NullspaceProjector projector{retained_basis(svd_out)};

  Eigen::VectorXd v_p = projector(v);
  const double norm = v_p.norm();
  if (norm < 1e-8)
    throw DegenerateDirectionError(
        "find_edit_directions: picked direction lies in the outside-mask "
        "span (projected norm " +
        std::to_string(norm) + ")");
  v_p /= norm;

  EditDirection dir;
  dir.v_p = std::move(v_p);
  dir.t = t;
  dir.omega = omega;
  dir.pick = options.pick;
  dir.sigma = svd_in.sigma[options.pick - 1];
  return dir;
}

Eigen::VectorXd one_step_edit(const SubspaceModel& model,
                              const NoiseSchedule& schedule,
                              const Eigen::VectorXd& x_t, double t,
                              const EditDirection& dir, double lambda) {
  if (dir.t != t)
    throw std::invalid_argument(
        "one_step_edit: direction was discovered at a different timestep; "
        "use transfer_edit");
  return posterior_mean(model, schedule, x_t + lambda * dir.v_p, t);
}

namespace {
Eigen::VectorXd edit_pipeline(const SubspaceModel& model,
                              const NoiseSchedule& schedule,
                              const Eigen::VectorXd& x0, double t,
                              const Eigen::VectorXd& v_p, double lambda,
                              int n_steps, GridKind grid) {
  const EpsPredictor eps = analytic_eps_predictor(model, schedule);
  Eigen::VectorXd x_t = integrate(schedule, x0, 0.0, t, n_steps, eps, grid);
  x_t += lambda * v_p;
  return integrate(schedule, x_t, t, 0.0, n_steps, eps, grid);
}
}  // namespace

Eigen::VectorXd apply_edit(const SubspaceModel& model,
                           const NoiseSchedule& schedule,
                           const Eigen::VectorXd& x0, double t,
                           const EditDirection& dir, double lambda,
                           int n_steps, GridKind grid) {
  if (dir.t != t)
    throw std::invalid_argument(
        "apply_edit: direction was discovered at a different timestep; use "
        "transfer_edit");
  return edit_pipeline(model, schedule, x0, t, dir.v_p, lambda, n_steps, grid);
}

Eigen::VectorXd transfer_edit(const SubspaceModel& model,
                              const NoiseSchedule& schedule,
                              const EditDirection& dir,
                              const Eigen::VectorXd& other_x0, double t_target,
                              double lambda, int n_steps, GridKind grid) {
  return edit_pipeline(model, schedule, other_x0, t_target, dir.v_p, lambda,
                       n_steps, grid);
}

Eigen::VectorXd compose_directions(
    int dim, const std::vector<std::pair<double, EditDirection>>& parts) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  for (const auto& [lambda, dir] : parts) {
    if (dir.t != parts.front().second.t)
      throw std::invalid_argument(
          "compose_directions: directions from different timesteps");
    if (dir.v_p.size() != dim)
      throw std::invalid_argument("compose_directions: dimension mismatch");
    out += lambda * dir.v_p;
  }
  return out;
}

DisentanglementScore disentanglement_score(const SubspaceModel& model,
                                           const NoiseSchedule& schedule,
                                           const Eigen::VectorXd& x_t,
                                           double t, const EditDirection& dir,
                                           double lambda) {
  const Eigen::VectorXd base = posterior_mean(model, schedule, x_t, t);
  const Eigen::VectorXd edited =
      posterior_mean(model, schedule, x_t + lambda * dir.v_p, t);
  const Eigen::VectorXd diff = edited - base;
  DisentanglementScore score;
  score.inside = dir.omega.project(diff).norm();
  score.outside = dir.omega.complement().project(diff).norm();
  return score;
}

}  // namespace loco
