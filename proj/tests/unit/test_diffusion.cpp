#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gmrfdiff/diffusion.hpp"
#include "gmrfdiff/errors.hpp"

using namespace gmrfdiff;
using fixtures::max_abs;

namespace {

// V_i = b_ii e_i^2 / 2 + sum_{j in A_i} b_ij e_i e_j with e_l = x_l - u_l^T theta.
double potential(const NetworkTopology& topo, const Eigen::MatrixXd& b, NodeIndex i, const Snapshot& d,
                 const Eigen::VectorXd& theta) {
  const auto e = [&](NodeIndex l) {
    const auto ll = static_cast<Eigen::Index>(l);
    return d.observations(ll) - d.regressors.row(ll).dot(theta);
  };
  const auto ii = static_cast<Eigen::Index>(i);
  double v = 0.5 * b(ii, ii) * e(i) * e(i);
  for (NodeIndex j : topo.forward_markov_neighborhood(i)) v += b(ii, static_cast<Eigen::Index>(j)) * e(i) * e(j);
  return v;
}

Snapshot snapshot(const GmrfModel& model, const RegressorStats& stats, const Eigen::VectorXd& theta,
                  RandomStream& stream) {
  Snapshot d;
  d.regressors = draw_regressors(stats, stream);
  d.observations = observe(theta, d.regressors, model.sample(stream));
  return d;
}

}  // namespace

TEST_CASE("potential gradients match central finite differences") {
  RandomStream stream(21);
  const auto topo = random_geometric_topology(8, 0.5, stream);
  const auto model = fixtures::field(topo, 0.7, 0.9, 0.5);
  const auto stats = fixtures::stats(4, std::vector<double>(8, 1.0));
  const PotentialField field(topo, model.precision());
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd theta0 = Eigen::VectorXd::Random(4);
    const Snapshot d = snapshot(model, stats, theta0, stream);
    const Eigen::VectorXd theta = Eigen::VectorXd::Random(4);
    for (NodeIndex i = 0; i < 8; ++i) {
      const Eigen::VectorXd g = field.gradient(i, d, theta);
      Eigen::VectorXd fd(4);
      const double h = 1e-5;
      for (int m = 0; m < 4; ++m) {
        Eigen::VectorXd tp = theta, tm = theta;
        tp(m) += h;
        tm(m) -= h;
        fd(m) = (potential(topo, model.precision(), i, d, tp) - potential(topo, model.precision(), i, d, tm)) / (2 * h);
      }
      const double scale = std::max(g.norm(), 1e-12);
      CHECK((g - fd).norm() / scale < 1e-5);
      CHECK(max_abs(potential_gradient(i, d, theta, topo, model.precision()) - g) == 0.0);
    }
  }
}

TEST_CASE("local gradients sum to the gradient of the global weighted cost") {
  RandomStream stream(5);
  const auto topo = fixtures::small_mesh();
  const auto model = fixtures::field(topo);
  const auto stats = fixtures::stats(3, {0.5, 1.0, 1.5, 2.0});
  const PotentialField field(topo, model.precision());
  const Snapshot d = snapshot(model, stats, Eigen::Vector3d(1, 2, 3), stream);
  const Eigen::Vector3d theta(0.3, -0.1, 0.7);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
  for (NodeIndex i = 0; i < 4; ++i) sum += field.gradient(i, d, theta);
  const Eigen::VectorXd global =
      -d.regressors.transpose() * model.precision() * (d.observations - d.regressors * theta);
  CHECK(max_abs(sum - global) < 1e-10 * global.norm());
}

TEST_CASE("gradient argument checks") {
  const auto topo = fixtures::chain(2);
  const PotentialField field(topo, Eigen::Matrix2d::Identity());
  Snapshot d{Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Ones(2)};
  CHECK_THROWS_AS(field.gradient(0, d, Eigen::VectorXd::Zero(2)), DimensionMismatch);
  CHECK_THROWS_AS(field.gradient(2, d, Eigen::VectorXd::Zero(3)), InvalidParameter);
  CHECK_THROWS_AS(PotentialField(topo, Eigen::Matrix3d::Identity()), DimensionMismatch);
}

TEST_CASE("combination rules are left-stochastic and respect neighbourhoods") {
  RandomStream stream(2);
  const auto topo = random_geometric_topology(10, 0.45, stream);
  for (auto rule : {CombinationRule::identity, CombinationRule::uniform, CombinationRule::metropolis}) {
    const Eigen::MatrixXd w = build_combination(topo, rule);
    CHECK(max_abs(w.colwise().sum() - Eigen::RowVectorXd::Ones(10)) < 1e-12);
    CHECK(w.minCoeff() >= 0.0);
    for (Eigen::Index j = 0; j < 10; ++j) {
      for (Eigen::Index i = 0; i < 10; ++i) {
        if (w(j, i) != 0.0 && i != j) CHECK(topo.communicates(static_cast<NodeIndex>(i), static_cast<NodeIndex>(j)));
      }
    }
    const Eigen::MatrixXd q = adaptation_weights(topo, rule);
    CHECK(max_abs(q.rowwise().sum() - Eigen::VectorXd::Ones(10)) < 1e-12);
    CHECK_NOTHROW(CombinationMatrices::atc(q, w).validate(topo));
    CHECK_NOTHROW(CombinationMatrices::cta(q, w).validate(topo));
  }
  CHECK(max_abs(build_combination(topo, CombinationRule::metropolis) -
                build_combination(topo, CombinationRule::metropolis).transpose()) < 1e-15);
}

TEST_CASE("weight validation rejects bad matrices") {
  const auto topo = fixtures::chain(3);
  auto m = CombinationMatrices::standalone(3);
  CHECK_NOTHROW(m.validate(topo));
  m.p2(0, 0) = 0.5;
  m.p2(2, 0) = 0.5;  // node 0 and node 2 are not linked
  CHECK_THROWS_AS(m.validate(topo), InvalidParameter);
  m = CombinationMatrices::standalone(3);
  m.p1(0, 0) = 0.9;
  CHECK_THROWS_AS(m.validate(topo), InvalidParameter);
  m = CombinationMatrices::standalone(3);
  m.s(0, 0) = 1.5;
  m.s(0, 1) = -0.5;
  CHECK_THROWS_AS(m.validate(topo), InvalidParameter);
}

TEST_CASE("the general step reproduces ATC and CTA") {
  RandomStream stream(13);
  const auto topo = fixtures::small_mesh();
  const auto model = fixtures::field(topo);
  const auto stats = fixtures::stats(3, {0.5, 1.0, 1.5, 2.0});
  const PotentialField field(topo, model.precision());
  const Eigen::MatrixXd w = build_combination(topo, CombinationRule::uniform);
  const Eigen::MatrixXd q = adaptation_weights(topo, CombinationRule::uniform);
  const Eigen::VectorXd mu = Eigen::Vector4d(0.01, 0.02, 0.015, 0.01);
  AlgorithmState atc(4, 3, mu), gen_atc(4, 3, mu), cta(4, 3, mu), gen_cta(4, 3, mu);
  for (int k = 0; k < 50; ++k) {
    const Snapshot d = snapshot(model, stats, Eigen::Vector3d(1, -1, 2), stream);
    atc_step(atc, q, w, d, field);
    general_diffusion_step(gen_atc, CombinationMatrices::atc(q, w), d, field);
    cta_step(cta, q, w, d, field);
    general_diffusion_step(gen_cta, CombinationMatrices::cta(q, w), d, field);
  }
  CHECK(max_abs(atc.thetas - gen_atc.thetas) < 1e-12);
  CHECK(max_abs(cta.thetas - gen_cta.thetas) < 1e-12);
  CHECK(max_abs(atc.thetas - cta.thetas) > 1e-6);
}

TEST_CASE("noise-free diffusion converges to the true parameter") {
  RandomStream stream(3);
  const auto topo = fixtures::chain(5);
  const auto model = fixtures::field(topo, 1.0);
  const auto stats = fixtures::stats(2, std::vector<double>(5, 1.0));
  const PotentialField field(topo, model.precision());
  const Eigen::MatrixXd w = build_combination(topo, CombinationRule::uniform);
  const Eigen::MatrixXd q = adaptation_weights(topo, CombinationRule::identity);
  AlgorithmState s(5, 2, Eigen::VectorXd::Constant(5, 0.05));
  const Eigen::Vector2d theta0(0.7, -1.3);
  for (int k = 0; k < 3000; ++k) {
    Snapshot d;
    d.regressors = draw_regressors(stats, stream);
    d.observations = d.regressors * theta0;
    atc_step(s, q, w, d, field);
  }
  for (Eigen::Index i = 0; i < 5; ++i) CHECK((s.thetas.row(i).transpose() - theta0).norm() < 1e-8);
}

TEST_CASE("centralized LMS applies the weighted correction") {
  Snapshot d{Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1.0, 2.0)};
  Eigen::Matrix2d b;
  b << 2.0, 0.5, 0.5, 1.0;
  const Eigen::VectorXd next = centralized_lms_step(Eigen::Vector2d::Zero(), d, b, 0.1);
  CHECK(max_abs(next - 0.1 * b * Eigen::Vector2d(1.0, 2.0)) < 1e-15);
  CHECK_THROWS_AS(centralized_lms_step(Eigen::Vector3d::Zero(), d, b, 0.1), DimensionMismatch);
}

TEST_CASE("non-finite or huge estimates count as divergence") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  CHECK_NOTHROW(check_finite(m));
  m(1, 1) = 2e12;
  CHECK_THROWS_AS(check_finite(m), Diverged);
  m(1, 1) = std::nan("");
  CHECK_THROWS_AS(check_finite(m), Diverged);
  CHECK_THROWS_AS(AlgorithmState(3, 2, Eigen::VectorXd::Ones(2)), DimensionMismatch);
}
