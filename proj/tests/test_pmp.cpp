#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <Eigen/Dense>

#include "loco/molrg.hpp"
#include "loco/pmp.hpp"
#include "loco/rng.hpp"
#include "loco/schedule.hpp"

using loco::JacobianMode;
using loco::JacobianOperator;
using loco::NoiseSchedule;
using loco::Rng;
using loco::Sample;
using loco::ScheduleKind;
using loco::SubspaceModel;

namespace {

SubspaceModel axis_model(int dim, const std::vector<std::vector<int>>& cols) {
  std::vector<Eigen::MatrixXd> bases;
  for (const auto& group : cols) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, group.size());
    for (std::size_t j = 0; j < group.size(); ++j) m(group[j], j) = 1.0;
    bases.push_back(m);
  }
  return SubspaceModel::from_bases(std::move(bases));
}

Eigen::MatrixXd fd_jacobian(const SubspaceModel& model,
                            const NoiseSchedule& sched,
                            const Eigen::VectorXd& x, double t, double h) {
  const int d = model.dim();
  Eigen::MatrixXd jac(d, d);
  Eigen::VectorXd probe = x;
  for (int j = 0; j < d; ++j) {
    probe[j] = x[j] + h;
    const Eigen::VectorXd hi = loco::posterior_mean(model, sched, probe, t);
    probe[j] = x[j] - h;
    const Eigen::VectorXd lo = loco::posterior_mean(model, sched, probe, t);
    probe[j] = x[j];
    jac.col(j) = (hi - lo) / (2.0 * h);
  }
  return jac;
}

}  // namespace

TEST_CASE("posterior weights basics") {
  const NoiseSchedule sched(ScheduleKind::kLinearAlpha);

  SUBCASE("single component is certain") {
    const SubspaceModel model = SubspaceModel::random(5, {2}, 1);
    Rng rng(0);
    const Eigen::VectorXd w =
        loco::posterior_weights(model, sched, rng.normal_vector(5), 0.3);
    REQUIRE(w.size() == 1);
    CHECK(w[0] == 1.0);
  }

  SUBCASE("origin gives uniform weights") {
    const SubspaceModel model = SubspaceModel::random(6, {2, 2}, 2);
    const Eigen::VectorXd w = loco::posterior_weights(
        model, sched, Eigen::VectorXd::Zero(6), 0.5);
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-14));
  }

  SUBCASE("axis-aligned worked instance") {
    const SubspaceModel model = axis_model(4, {{0}, {1}});
    Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
    x[0] = 1.0;
    const Eigen::VectorXd w = loco::posterior_weights(model, sched, x, 0.5);
    // logits (0.5, 0), so the first weight is logistic(0.5)
    CHECK(w[0] == doctest::Approx(0.62245933120185456).epsilon(1e-12));
    CHECK(w[0] + w[1] == doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("uniform at t = 1, rejected at t = 0") {
    const SubspaceModel model = SubspaceModel::random(6, {2, 1}, 3);
    Rng rng(1);
    const Eigen::VectorXd x = rng.normal_vector(6);
    const Eigen::VectorXd w = loco::posterior_weights(model, sched, x, 1.0);
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(loco::posterior_weights(model, sched, x, 0.0),
                    std::domain_error);
  }
}

TEST_CASE("weights are a probability vector everywhere tested") {
  const NoiseSchedule sched(ScheduleKind::kCosine);
  const SubspaceModel model = SubspaceModel::random(8, {2, 1, 2}, 5);
  Rng rng(3);
  for (double t : {0.05, 0.3, 0.6, 0.95}) {
    for (int trial = 0; trial < 25; ++trial) {
      const Eigen::VectorXd w = loco::posterior_weights(
          model, sched, 3.0 * rng.normal_vector(8), t);
      CHECK(w.minCoeff() >= 0.0);
      CHECK(std::abs(w.sum() - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("posterior mean closed forms") {
  const NoiseSchedule sched(ScheduleKind::kLinearAlpha);

  SUBCASE("single component projects and shrinks") {
    const SubspaceModel model = SubspaceModel::random(6, {2}, 7);
    const double t = 0.4, a = sched.alpha(t);
    Rng rng(2);
    const Eigen::VectorXd x = rng.normal_vector(6);
    const Eigen::VectorXd expect =
        std::sqrt(a) * model.basis(0) * (model.basis(0).transpose() * x);
    CHECK((loco::posterior_mean(model, sched, x, t) - expect).norm() <=
          1e-14);
  }

  SUBCASE("vanishes at t = 1") {
    const SubspaceModel model = SubspaceModel::random(6, {2, 2}, 8);
    Rng rng(3);
    CHECK(loco::posterior_mean(model, sched, rng.normal_vector(6), 1.0)
              .norm() == 0.0);
  }

  SUBCASE("axis-aligned worked instance") {
    const SubspaceModel model = axis_model(4, {{0}, {1}});
    Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
    x[0] = 1.0;
    const Eigen::VectorXd pm = loco::posterior_mean(model, sched, x, 0.5);
    // sqrt(0.5) * logistic(0.5) on the first coordinate, zero elsewhere
    CHECK(pm[0] == doctest::Approx(0.44014521410567449).epsilon(1e-12));
    for (int i = 1; i < 4; ++i) CHECK(pm[i] == 0.0);
  }
}

TEST_CASE("posterior mean matches a self-normalized Monte-Carlo oracle") {
  const NoiseSchedule sched(ScheduleKind::kLinearAlpha);
  const SubspaceModel model = SubspaceModel::random(4, {1, 1}, 10);
  const double t = 0.5, a = sched.alpha(t);
  Rng rng(31);
  const Eigen::VectorXd x_t = rng.normal_vector(4);
  const Eigen::VectorXd pm = loco::posterior_mean(model, sched, x_t, t);

  const int n = 1000000;
  Eigen::VectorXd weighted_sum = Eigen::VectorXd::Zero(4);
  double weight_sum = 0.0;
  std::vector<Eigen::VectorXd> kept;
  std::vector<double> weights;
  kept.reserve(n);
  weights.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Sample s = sample_x0(model, rng);
    const double w =
        std::exp(-(x_t - std::sqrt(a) * s.x0).squaredNorm() /
                 (2.0 * (1.0 - a)));
    weighted_sum += w * s.x0;
    weight_sum += w;
    kept.push_back(s.x0);
    weights.push_back(w);
  }
  const Eigen::VectorXd estimate = weighted_sum / weight_sum;
  // standard error of the self-normalized estimator, per coordinate
  Eigen::VectorXd se = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < n; ++i)
    se += (weights[i] * weights[i]) *
          (kept[i] - estimate).cwiseAbs2();
  se = (se / (weight_sum * weight_sum)).cwiseSqrt();
  for (int j = 0; j < 4; ++j)
    CHECK(std::abs(estimate[j] - pm[j]) <= 3.0 * se[j] + 1e-12);
}

TEST_CASE("Tweedie route agrees with the direct closed form") {
  const NoiseSchedule sched(ScheduleKind::kCosine);
  Rng rng(12);
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // mix of equal and unequal ranks
    const SubspaceModel model = seed % 2 == 0
                                    ? SubspaceModel::random(8, {2, 2}, seed)
                                    : SubspaceModel::random(7, {2, 1}, seed);
    for (double t : {0.15, 0.4, 0.6, 0.8, 0.95}) {
      for (int trial = 0; trial < 2; ++trial) {
        const Eigen::VectorXd x = 2.0 * rng.normal_vector(model.dim());
        const Eigen::VectorXd direct =
            loco::posterior_mean(model, sched, x, t);
        const Eigen::VectorXd tweedie =
            loco::posterior_mean_via_tweedie(model, sched, x, t);
        CHECK((direct - tweedie).norm() <=
              1e-10 * std::max(1.0, direct.norm()));
        ++checked;
      }
    }
  }
  CHECK(checked == 100);

  const SubspaceModel model = SubspaceModel::random(5, {2}, 3);
  CHECK(loco::posterior_mean_via_tweedie(model, sched,
                                         Eigen::VectorXd::Zero(5), 0.5)
            .norm() == 0.0);
}

TEST_CASE("dense Jacobian properties") {
  const NoiseSchedule sched(ScheduleKind::kCosine);

  SUBCASE("single component collapses to the scaled projector") {
    const SubspaceModel model = SubspaceModel::random(6, {2}, 4);
    const double t = 0.45, a = sched.alpha(t);
    Rng rng(5);
    const Eigen::VectorXd x = rng.normal_vector(6);
    const Eigen::MatrixXd jac = loco::jacobian_dense(model, sched, x, t);
    const Eigen::MatrixXd expect =
        std::sqrt(a) * model.basis(0) * model.basis(0).transpose();
    CHECK((jac - expect).cwiseAbs().maxCoeff() <= 1e-14);
  }

  SUBCASE("bitwise symmetric for random inputs") {
    const SubspaceModel model = SubspaceModel::random(10, {2, 3}, 6);
    Rng rng(6);
    for (double t : {0.2, 0.5, 0.9}) {
      const Eigen::MatrixXd jac = loco::jacobian_dense(
          model, sched, 2.0 * rng.normal_vector(10), t);
      CHECK((jac - jac.transpose()).norm() <= 1e-12 * jac.norm());
    }
  }

  SUBCASE("matches central finite differences") {
    const SubspaceModel model = SubspaceModel::random(6, {2, 1}, 7);
    Rng rng(7);
    for (double t : {0.35, 0.7}) {
      const Eigen::VectorXd x = rng.normal_vector(6);
      const Eigen::MatrixXd jac = loco::jacobian_dense(model, sched, x, t);
      const Eigen::MatrixXd fd = fd_jacobian(model, sched, x, t, 1e-5);
      CHECK((jac - fd).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }

  SUBCASE("boundary times are rejected") {
    const SubspaceModel model = SubspaceModel::random(4, {1}, 8);
    const Eigen::VectorXd x = Eigen::VectorXd::Ones(4);
    CHECK_THROWS_AS(loco::jacobian_dense(model, sched, x, 0.0),
                    std::domain_error);
    CHECK_THROWS_AS(loco::jacobian_dense(model, sched, x, 1.0),
                    std::domain_error);
  }
}

TEST_CASE("jacobian operator applications") {
  const NoiseSchedule sched(ScheduleKind::kCosine);
  const SubspaceModel model = SubspaceModel::random(8, {2, 2}, 9);
  const double t = 0.55;
  Rng rng(8);
  const Eigen::VectorXd x = rng.normal_vector(8);
  const JacobianOperator analytic(model, sched, x, t);
  const JacobianOperator fd(model, sched, x, t,
                            JacobianMode::kFiniteDifference);

  SUBCASE("analytic jvp equals the dense matrix action") {
    const Eigen::MatrixXd jac = loco::jacobian_dense(model, sched, x, t);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd v = rng.normal_vector(8);
      CHECK((analytic.jvp(v) - jac * v).norm() <= 1e-12 * (jac * v).norm());
    }
  }

  SUBCASE("finite differences agree with the analytic mode") {
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd v = rng.unit_vector(8);
      const Eigen::VectorXd a = analytic.jvp(v);
      CHECK((fd.jvp(v) - a).norm() <= 1e-5 * std::max(1.0, a.norm()));
      const Eigen::VectorXd u = rng.unit_vector(8);
      const Eigen::VectorXd av = analytic.vjp(u);
      CHECK((fd.vjp(u) - av).norm() <= 1e-5 * std::max(1.0, av.norm()));
    }
  }

  SUBCASE("vjp is jvp for the symmetric analytic map") {
    const Eigen::VectorXd u = rng.normal_vector(8);
    CHECK(analytic.vjp(u) == analytic.jvp(u));
    CHECK(analytic.vjp(Eigen::VectorXd::Zero(8)).norm() == 0.0);
  }

  SUBCASE("single-component actions") {
    const SubspaceModel single = SubspaceModel::random(6, {2}, 10);
    const double a = sched.alpha(t);
    const Eigen::VectorXd y = rng.normal_vector(6);
    const JacobianOperator op(single, sched, y, t);
    // a basis column maps to sqrt(alpha) times itself
    const Eigen::VectorXd column = single.basis(0).col(0);
    CHECK((op.jvp(column) - std::sqrt(a) * column).norm() <= 1e-12);
    // anything orthogonal to the subspace is annihilated
    Eigen::VectorXd ortho = rng.normal_vector(6);
    ortho -= single.basis(0) * (single.basis(0).transpose() * ortho);
    CHECK(op.jvp(ortho).norm() <= 1e-12 * ortho.norm());
  }
}

TEST_CASE("epsilon predictor closed forms") {
  const NoiseSchedule sched(ScheduleKind::kLinearAlpha);
  const SubspaceModel model = SubspaceModel::random(6, {2}, 11);
  const double t = 0.3, a = sched.alpha(t);
  Rng rng(9);

  SUBCASE("pure passthrough at t = 1") {
    const Eigen::VectorXd x = rng.normal_vector(6);
    CHECK(loco::epsilon_predictor(model, sched, x, 1.0) == x);
  }

  SUBCASE("orthogonal component is amplified") {
    Eigen::VectorXd x = rng.normal_vector(6);
    x -= model.basis(0) * (model.basis(0).transpose() * x);
    const Eigen::VectorXd eps = loco::epsilon_predictor(model, sched, x, t);
    CHECK((eps - x / std::sqrt(1.0 - a)).norm() <= 1e-12 * eps.norm());
  }

  SUBCASE("in-subspace component is attenuated") {
    const Eigen::VectorXd x =
        model.basis(0) * rng.normal_vector(model.rank(0));
    const Eigen::VectorXd eps = loco::epsilon_predictor(model, sched, x, t);
    CHECK((eps - std::sqrt(1.0 - a) * x).norm() <= 1e-12 * x.norm());
  }

  SUBCASE("rejected at t = 0") {
    CHECK_THROWS_AS(
        loco::epsilon_predictor(model, sched, Eigen::VectorXd::Ones(6), 0.0),
        std::domain_error);
  }
}

TEST_CASE("posterior mean output stays in the stacked span") {
  const NoiseSchedule sched(ScheduleKind::kCosine);
  const SubspaceModel model = SubspaceModel::random(9, {2, 2}, 12);
  const Eigen::MatrixXd stacked = model.stacked_basis();
  Rng rng(10);
  for (double t : {0.2, 0.6, 0.95}) {
    const Eigen::VectorXd pm =
        loco::posterior_mean(model, sched, 2.0 * rng.normal_vector(9), t);
    CHECK((pm - stacked * (stacked.transpose() * pm)).norm() <= 1e-10);
  }
}

TEST_CASE("linear denoiser approaches its population optimum") {
  const NoiseSchedule sched(ScheduleKind::kLinearAlpha);
  const SubspaceModel model = SubspaceModel::random(6, {2, 1}, 13);
  const double t = 0.45, a = sched.alpha(t);
  const int d = model.dim();

  // population optimum: sqrt(a) S0 (a S0 + (1-a) I)^{-1},
  // S0 = (1/K) sum_k M_k M_k^T
  Eigen::MatrixXd s0 = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < model.num_components(); ++k)
    s0 += model.basis(k) * model.basis(k).transpose() /
          model.num_components();
  const Eigen::MatrixXd population =
      std::sqrt(a) * s0 *
      (a * s0 + (1.0 - a) * Eigen::MatrixXd::Identity(d, d)).inverse();

  Rng rng(14);
  const Eigen::MatrixXd w8k =
      loco::fit_linear_denoiser(model, sched, t, 8000, rng);
  CHECK((w8k - population).norm() <= 0.12);
  Rng rng2(14);
  const Eigen::MatrixXd w32k =
      loco::fit_linear_denoiser(model, sched, t, 32000, rng2);
  CHECK((w32k - population).norm() <= 0.06);

  SUBCASE("population optimum has the stacked rank") {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(population);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > 1e-10 * svd.singularValues()[0]) ++rank;
    CHECK(rank == model.total_rank());
  }

  SUBCASE("fit degrades to zero at t = 1") {
    Rng rng3(15);
    const Eigen::MatrixXd w =
        loco::fit_linear_denoiser(model, sched, 1.0, 8000, rng3);
    CHECK(w.norm() <= 0.1);
  }

  SUBCASE("too few samples is a conditioning error") {
    Rng rng4(16);
    CHECK_THROWS_AS(loco::fit_linear_denoiser(model, sched, t, 4 * d, rng4),
                    std::invalid_argument);
  }
}

TEST_CASE("single-component map is globally linear") {
  const NoiseSchedule sched(ScheduleKind::kCosine);
  const SubspaceModel model = SubspaceModel::random(8, {3}, 17);
  const double t = 0.6;
  Rng rng(18);
  const Eigen::VectorXd x = rng.normal_vector(8);
  const Eigen::VectorXd dx = rng.unit_vector(8);
  const JacobianOperator op(model, sched, x, t);
  const Eigen::VectorXd f0 = loco::posterior_mean(model, sched, x, t);
  for (double lambda : {1.0, 100.0, 1000.0}) {
    const Eigen::VectorXd f1 =
        loco::posterior_mean(model, sched, x + lambda * dx, t);
    CHECK((f1 - f0 - lambda * op.jvp(dx)).norm() <= 1e-10);
  }
}
