#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include <Eigen/Dense>

#include "loco/molrg.hpp"
#include "loco/rng.hpp"
#include "loco/schedule.hpp"

using loco::NoiseSchedule;
using loco::Rng;
using loco::Sample;
using loco::ScheduleKind;
using loco::SubspaceModel;

namespace {

// Axis-aligned model whose component k spans the given coordinate columns.
SubspaceModel axis_model(int dim, const std::vector<std::vector<int>>& cols) {
  std::vector<Eigen::MatrixXd> bases;
  for (const auto& group : cols) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, group.size());
    for (std::size_t j = 0; j < group.size(); ++j) m(group[j], j) = 1.0;
    bases.push_back(m);
  }
  return SubspaceModel::from_bases(std::move(bases));
}

// Independent density oracle: materialize each component covariance densely
// and evaluate the generic Gaussian log-pdf.
double dense_log_density(const SubspaceModel& model,
                         const NoiseSchedule& sched, const Eigen::VectorXd& x,
                         double t) {
  const double a = sched.alpha(t);
  const int d = model.dim();
  Eigen::VectorXd logs(model.num_components());
  for (int k = 0; k < model.num_components(); ++k) {
    const Eigen::MatrixXd cov =
        a * model.basis(k) * model.basis(k).transpose() +
        (1.0 - a) * Eigen::MatrixXd::Identity(d, d);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::MatrixXd l = llt.matrixL();
    double log_det = 0.0;
    for (int i = 0; i < d; ++i) log_det += 2.0 * std::log(l(i, i));
    const double quad = x.dot(llt.solve(x));
    logs[k] = -0.5 * (d * std::log(2.0 * M_PI) + log_det + quad);
  }
  const double shift = logs.maxCoeff();
  return shift + std::log((logs.array() - shift).exp().sum()) -
         std::log(static_cast<double>(model.num_components()));
}

}  // namespace

TEST_CASE("random model satisfies the orthogonality invariants") {
  const SubspaceModel model = SubspaceModel::random(4, {1, 1}, 7);
  for (int k = 0; k < 2; ++k) {
    const Eigen::MatrixXd gram =
        model.basis(k).transpose() * model.basis(k);
    CHECK((gram - Eigen::MatrixXd::Identity(1, 1)).cwiseAbs().maxCoeff() <=
          1e-10);
  }
  CHECK((model.basis(0).transpose() * model.basis(1)).cwiseAbs().maxCoeff() <=
        1e-10);
}

TEST_CASE("rank overflow is a construction error") {
  CHECK_THROWS_AS(SubspaceModel::random(4, {3, 2}, 1), std::invalid_argument);
}

TEST_CASE("model generation is deterministic in the seed") {
  const SubspaceModel a = SubspaceModel::random(8, {2, 2}, 0);
  const SubspaceModel b = SubspaceModel::random(8, {2, 2}, 0);
  for (int k = 0; k < 2; ++k) CHECK(a.basis(k) == b.basis(k));
  const SubspaceModel c = SubspaceModel::random(8, {2, 2}, 1);
  CHECK(a.basis(0) != c.basis(0));
}

TEST_CASE("from_bases rejects broken bases") {
  Eigen::MatrixXd bad(3, 1);
  bad << 1.0, 1.0, 0.0;  // not unit norm
  CHECK_THROWS_AS(SubspaceModel::from_bases({bad}), std::invalid_argument);

  Eigen::MatrixXd e0 = Eigen::MatrixXd::Zero(3, 1);
  e0(0, 0) = 1.0;
  Eigen::MatrixXd overlap = e0;  // same subspace twice
  CHECK_THROWS_AS(SubspaceModel::from_bases({e0, overlap}),
                  std::invalid_argument);
}

TEST_CASE("samples reconstruct exactly and classes are uniform") {
  const SubspaceModel model = SubspaceModel::random(6, {2, 1}, 11);
  Rng rng(5);
  const int n = 100000;
  std::vector<int> counts(2, 0);
  std::vector<double> sq_norm_sum(2, 0.0);
  for (int i = 0; i < n; ++i) {
    const Sample s = sample_x0(model, rng);
    CHECK((s.x0 - model.basis(s.component) * s.coeff).norm() == 0.0);
    ++counts[s.component];
    sq_norm_sum[s.component] += s.x0.squaredNorm();
  }
  // class frequencies within 3 sigma of 1/2
  const double sigma = std::sqrt(0.25 * n);
  for (int c : counts) CHECK(std::abs(c - n / 2.0) <= 3.0 * sigma);
  // E||x0||^2 = r_k per class (||a||^2 is chi^2 with r_k dof)
  for (int k = 0; k < 2; ++k) {
    const double mean = sq_norm_sum[k] / counts[k];
    const double band =
        4.0 * std::sqrt(2.0 * model.rank(k) / static_cast<double>(counts[k]));
    CHECK(std::abs(mean - model.rank(k)) <= band);
  }
}

TEST_CASE("forward noise endpoints") {
  const NoiseSchedule sched(ScheduleKind::kCosine);
  const SubspaceModel model = SubspaceModel::random(5, {2}, 2);
  Rng rng(1);
  const Sample s = sample_x0(model, rng);
  const Eigen::VectorXd eps = rng.normal_vector(5);
  CHECK(loco::forward_noise_from(sched, s.x0, 0.0, eps) == s.x0);
  CHECK(loco::forward_noise_from(sched, s.x0, 1.0, eps) == eps);
}

TEST_CASE("forward noise matches its conditional distribution") {
  const NoiseSchedule sched(ScheduleKind::kLinearAlpha);
  const int d = 3, n = 100000;
  const double t = 0.3, a = sched.alpha(t);
  const SubspaceModel model = SubspaceModel::random(d, {1}, 3);
  Rng rng(17);
  Eigen::VectorXd x0(d);
  x0 << 1.0, -2.0, 0.5;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(n);
  for (int i = 0; i < n; ++i) {
    draws.push_back(loco::forward_noise(sched, x0, t, rng));
    mean += draws.back() / n;
  }
  for (const auto& x : draws) {
    const Eigen::VectorXd c = x - mean;
    cov.noalias() += c * c.transpose() / n;
  }
  // mean = sqrt(a) x0 within 4 sigma, covariance = (1-a) I
  const double mean_band = 4.0 * std::sqrt((1.0 - a) / n);
  for (int i = 0; i < d; ++i)
    CHECK(std::abs(mean[i] - std::sqrt(a) * x0[i]) <= mean_band);
  const double cov_band = 5.0 * (1.0 - a) * std::sqrt(2.0 / n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double want = i == j ? 1.0 - a : 0.0;
      CHECK(std::abs(cov(i, j) - want) <= cov_band);
    }
}

TEST_CASE("log density closed forms") {
  const NoiseSchedule sched(ScheduleKind::kLinearAlpha);
  const double t = 0.4, a = sched.alpha(t);
  const int d = 4, r = 2;
  const SubspaceModel model = axis_model(d, {{0, 1}});

  SUBCASE("point orthogonal to the subspace") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    x[2] = 0.7;
    x[3] = -1.1;
    const double expect =
        -0.5 * (d * std::log(2.0 * M_PI) + (d - r) * std::log(1.0 - a) +
                x.squaredNorm() / (1.0 - a));
    CHECK(loco::log_density(model, sched, x, t) ==
          doctest::Approx(expect).epsilon(1e-13));
  }

  SUBCASE("origin value is the determinant mixture") {
    const SubspaceModel mixed = SubspaceModel::random(5, {2, 1}, 4);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
    double acc = 0.0;
    for (int k = 0; k < mixed.num_components(); ++k)
      acc += 0.5 * std::exp(-0.5 * (5 - mixed.rank(k)) * std::log(1.0 - a));
    const double expect = std::log(acc) - 0.5 * 5 * std::log(2.0 * M_PI);
    CHECK(loco::log_density(mixed, sched, zero, t) ==
          doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("log density agrees with the dense-covariance oracle") {
  const NoiseSchedule sched(ScheduleKind::kCosine);
  // unequal ranks on purpose: the determinant offsets differ per component
  const SubspaceModel model = SubspaceModel::random(6, {2, 1}, 9);
  Rng rng(21);
  for (double t : {0.2, 0.5, 0.9, 1.0}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd x = 2.0 * rng.normal_vector(6);
      const double got = loco::log_density(model, sched, x, t);
      const double want = dense_log_density(model, sched, x, t);
      CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("log density rejects the degenerate boundary") {
  const NoiseSchedule sched(ScheduleKind::kCosine);
  const SubspaceModel model = SubspaceModel::random(4, {1}, 0);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(4);
  CHECK_THROWS_AS(loco::log_density(model, sched, x, 0.0), std::domain_error);
  CHECK_THROWS_AS(loco::score(model, sched, x, 0.0), std::domain_error);
}

TEST_CASE("density integrates to one on a small instance") {
  // d = 2, K = 1, r = 1: trapezoid quadrature over [-L, L]^2
  const NoiseSchedule sched(ScheduleKind::kLinearAlpha);
  const SubspaceModel model = SubspaceModel::random(2, {1}, 5);
  const double t = 0.5, length = 8.0;
  const int n = 400;
  const double h = 2.0 * length / n;
  double integral = 0.0;
  Eigen::VectorXd x(2);
  for (int i = 0; i <= n; ++i) {
    const double wx = (i == 0 || i == n) ? 0.5 : 1.0;
    x[0] = -length + i * h;
    for (int j = 0; j <= n; ++j) {
      const double wy = (j == 0 || j == n) ? 0.5 : 1.0;
      x[1] = -length + j * h;
      integral += wx * wy * std::exp(loco::log_density(model, sched, x, t));
    }
  }
  integral *= h * h;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("score vanishes at the origin") {
  const NoiseSchedule sched(ScheduleKind::kCosine);
  const SubspaceModel model = SubspaceModel::random(5, {2, 1}, 8);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
  CHECK(loco::score(model, sched, zero, 0.5).norm() == 0.0);
}

TEST_CASE("score is the gradient of log density") {
  const NoiseSchedule sched(ScheduleKind::kCosine);
  const SubspaceModel model = SubspaceModel::random(6, {2, 1}, 13);
  Rng rng(2);
  const double h = 1e-4;
  for (double t : {0.25, 0.5, 0.85}) {
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd x = 1.5 * rng.normal_vector(6);
      const Eigen::VectorXd got = loco::score(model, sched, x, t);
      for (int i = 0; i < 6; ++i) {
        Eigen::VectorXd probe = x;
        probe[i] = x[i] + h;
        const double hi = loco::log_density(model, sched, probe, t);
        probe[i] = x[i] - h;
        const double lo = loco::log_density(model, sched, probe, t);
        CHECK(got[i] == doctest::Approx((hi - lo) / (2.0 * h)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("single-component score closed form") {
  const NoiseSchedule sched(ScheduleKind::kLinearAlpha);
  const SubspaceModel model = SubspaceModel::random(5, {2}, 6);
  const double t = 0.35, a = sched.alpha(t);
  Rng rng(4);
  const Eigen::VectorXd x = rng.normal_vector(5);
  const Eigen::MatrixXd proj = model.basis(0) * model.basis(0).transpose();
  const Eigen::VectorXd expect =
      -(x - a * proj * x) / (1.0 - a);
  CHECK((loco::score(model, sched, x, t) - expect).norm() <= 1e-12);
}

TEST_CASE("model files round-trip bit for bit") {
  namespace fs = std::filesystem;
  const fs::path file = fs::temp_directory_path() / "loco_model_test.txt";
  const SubspaceModel model = SubspaceModel::random(7, {2, 3}, 123);
  model.save(file);
  const SubspaceModel back = SubspaceModel::load(file);
  REQUIRE(back.dim() == 7);
  REQUIRE(back.num_components() == 2);
  for (int k = 0; k < 2; ++k) CHECK(back.basis(k) == model.basis(k));
  fs::remove(file);
}
