#include "loco/molrg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "loco/pmp.hpp"
#include "mixture_detail.hpp"

namespace loco {

namespace {
constexpr double kOrthoTol = 1e-10;

void require_time_in(double t, double lo_exclusive, double hi_inclusive,
                     const char* who) {
  if (!(t > lo_exclusive && t <= hi_inclusive))
    throw std::domain_error(std::string(who) + ": t outside (" +
                            std::to_string(lo_exclusive) + ", " +
                            std::to_string(hi_inclusive) + "]");
}
}  // namespace

SubspaceModel::SubspaceModel(std::vector<Eigen::MatrixXd> bases)
    : bases_(std::move(bases)) {
  if (bases_.empty())
    throw std::invalid_argument("SubspaceModel: no components");
  dim_ = static_cast<int>(bases_[0].rows());
  int total = 0;
  for (const auto& m : bases_) {
    if (m.rows() != dim_ || m.cols() < 1)
      throw std::invalid_argument("SubspaceModel: inconsistent basis shape");
    total += static_cast<int>(m.cols());
  }
  if (total > dim_)
    throw std::invalid_argument(
        "SubspaceModel: total rank exceeds the ambient dimension");

  const int k_count = num_components();
  for (int i = 0; i < k_count; ++i) {
    Eigen::MatrixXd gram = bases_[i].transpose() * bases_[i];
    gram -= Eigen::MatrixXd::Identity(rank(i), rank(i));
    if (gram.cwiseAbs().maxCoeff() > kOrthoTol)
      throw std::invalid_argument("SubspaceModel: basis " + std::to_string(i) +
                                  " is not orthonormal");
    for (int j = i + 1; j < k_count; ++j) {
      const Eigen::MatrixXd cross = bases_[i].transpose() * bases_[j];
      if (cross.cwiseAbs().maxCoeff() > kOrthoTol)
        throw std::invalid_argument("SubspaceModel: bases " +
                                    std::to_string(i) + " and " +
                                    std::to_string(j) + " are not orthogonal");
    }
  }
}

SubspaceModel SubspaceModel::random(int dim, const std::vector<int>& ranks,
                                    std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("random model: dim must be >= 1");
  if (ranks.empty())
    throw std::invalid_argument("random model: need at least one rank");
  int total = 0;
  for (int r : ranks) {
    if (r < 1) throw std::invalid_argument("random model: ranks must be >= 1");
    total += r;
  }
  if (total > dim)
    throw std::invalid_argument("random model: sum of ranks " +
                                std::to_string(total) + " exceeds dim " +
                                std::to_string(dim));

  Rng rng(seed);
  const Eigen::MatrixXd gaussian = rng.normal_matrix(dim, total);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  const Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(dim, total);

  std::vector<Eigen::MatrixXd> bases;
  bases.reserve(ranks.size());
  int col = 0;
  for (int r : ranks) {
    bases.push_back(q.middleCols(col, r));
    col += r;
  }
  return SubspaceModel(std::move(bases));
}

SubspaceModel SubspaceModel::from_bases(std::vector<Eigen::MatrixXd> bases) {
  return SubspaceModel(std::move(bases));
}

int SubspaceModel::total_rank() const {
  int total = 0;
  for (const auto& m : bases_) total += static_cast<int>(m.cols());
  return total;
}

int SubspaceModel::max_rank() const {
  int best = 0;
  for (const auto& m : bases_) best = std::max(best, static_cast<int>(m.cols()));
  return best;
}

Eigen::MatrixXd SubspaceModel::stacked_basis() const {
  Eigen::MatrixXd m(dim_, total_rank());
  int col = 0;
  for (const auto& basis : bases_) {
    m.middleCols(col, basis.cols()) = basis;
    col += static_cast<int>(basis.cols());
  }
  return m;
}

void SubspaceModel::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << dim_ << ' ' << num_components();
  for (const auto& m : bases_) out << ' ' << m.cols();
  out << '\n';
  char buf[32];
  for (const auto& m : bases_) {
    for (int j = 0; j < m.cols(); ++j) {
      for (int i = 0; i < m.rows(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
        out << buf << (i + 1 == m.rows() ? '\n' : ' ');
      }
    }
  }
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

SubspaceModel SubspaceModel::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  int dim = 0, k_count = 0;
  if (!(in >> dim >> k_count) || dim < 1 || k_count < 1)
    throw std::runtime_error("malformed model header in " + file.string());
  std::vector<int> ranks(k_count);
  for (int& r : ranks)
    if (!(in >> r) || r < 1)
      throw std::runtime_error("malformed ranks in " + file.string());

  std::vector<Eigen::MatrixXd> bases;
  bases.reserve(ranks.size());
  for (int r : ranks) {
    Eigen::MatrixXd m(dim, r);
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < dim; ++i)
        if (!(in >> m(i, j)))
          throw std::runtime_error("truncated model file " + file.string());
    bases.push_back(std::move(m));
  }
  return SubspaceModel::from_bases(std::move(bases));
}

Sample sample_x0(const SubspaceModel& model, Rng& rng) {
  Sample s;
  s.component = rng.uniform_int(model.num_components());
  s.coeff = rng.normal_vector(model.rank(s.component));
  s.x0 = model.basis(s.component) * s.coeff;
  return s;
}

Eigen::VectorXd forward_noise_from(const NoiseSchedule& schedule,
                                   const Eigen::VectorXd& x0, double t,
                                   const Eigen::VectorXd& eps) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::domain_error("forward_noise: t outside [0, 1]");
  const double a = schedule.alpha(t);
  return std::sqrt(a) * x0 + std::sqrt(1.0 - a) * eps;
}

Eigen::VectorXd forward_noise(const NoiseSchedule& schedule,
                              const Eigen::VectorXd& x0, double t, Rng& rng) {
  return forward_noise_from(schedule, x0, t,
                            rng.normal_vector(static_cast<int>(x0.size())));
}

namespace detail {

Eigen::VectorXd mixture_logits(const SubspaceModel& model,
                               const NoiseSchedule& schedule,
                               const Eigen::VectorXd& x_t, double t) {
  const double a = schedule.alpha(t);
  const double one_minus = 1.0 - a;
  const double coeff = a / (2.0 * one_minus);
  const double log_one_minus = std::log1p(-a);
  Eigen::VectorXd logits(model.num_components());
  for (int k = 0; k < model.num_components(); ++k) {
    const double energy = (model.basis(k).transpose() * x_t).squaredNorm();
    logits[k] = coeff * energy + 0.5 * model.rank(k) * log_one_minus;
  }
  return logits;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double shift = logits.maxCoeff();
  Eigen::VectorXd w = (logits.array() - shift).exp();
  return w / w.sum();
}

}  // namespace detail

double log_density(const SubspaceModel& model, const NoiseSchedule& schedule,
                   const Eigen::VectorXd& x_t, double t) {
  require_time_in(t, 0.0, 1.0, "log_density");
  const double a = schedule.alpha(t);
  const double one_minus = 1.0 - a;
  const int d = model.dim();

  const Eigen::VectorXd logits =
      detail::mixture_logits(model, schedule, x_t, t);
  const double shift = logits.maxCoeff();
  const double lse = shift + std::log((logits.array() - shift).exp().sum());

  // The component-independent part of every log N(0, Sigma_k):
  //   -d/2 log(2 pi) - d/2 log(1-a) - ||x||^2 / (2 (1-a)).
  const double common = -0.5 * d * std::log(2.0 * M_PI) -
                        0.5 * d * std::log1p(-a) -
                        x_t.squaredNorm() / (2.0 * one_minus);
  return common + lse - std::log(static_cast<double>(model.num_components()));
}

Eigen::VectorXd score(const SubspaceModel& model, const NoiseSchedule& schedule,
                      const Eigen::VectorXd& x_t, double t) {
  require_time_in(t, 0.0, 1.0, "score");
  const double a = schedule.alpha(t);
  const double one_minus = 1.0 - a;
  const Eigen::VectorXd w = posterior_weights(model, schedule, x_t, t);
  Eigen::VectorXd projected = Eigen::VectorXd::Zero(model.dim());
  for (int k = 0; k < model.num_components(); ++k)
    projected.noalias() +=
        w[k] * (model.basis(k) * (model.basis(k).transpose() * x_t));
  return (-x_t + a * projected) / one_minus;
}

}  // namespace loco
