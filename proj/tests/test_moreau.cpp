#include <doctest.h>

#include "wcxopt/errors.hpp"
#include "wcxopt/moreau.hpp"

#include <cmath>

using namespace wcx;

namespace {

ProblemInstance data(ProblemKind kind, Eigen::MatrixXd A, Eigen::VectorXd b, ConvexSet set = {}) {
  ProblemOptions o;
  o.operating_radius = 10.0;
  return make_problem_from_data(kind, std::move(A), std::move(b), std::move(set), o);
}

MoreauConfig cfg_with(double rho_bar) {
  MoreauConfig c;
  c.rho_bar = rho_bar;
  c.inner_max_iters = 20000;
  return c;
}

Point scalar(double v) { return Point::Constant(1, v); }

}  // namespace

TEST_CASE("prox of a one-dimensional quadratic") {
  const auto p = data(ProblemKind::ConstrainedQuadratic, Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1));
  const auto r = prox_point(p, scalar(1.0), Weights::ones(1), cfg_with(1.0));
  CHECK(r.converged);
  CHECK(std::abs(r.x_hat[0] - 0.5) <= 1e-6);
}

TEST_CASE("prox of a separable quadratic in a weighted metric") {
  // (1/2)||y||^2 written as the average of two samples sqrt(2) e_i.
  const auto p = data(ProblemKind::ConstrainedQuadratic, std::sqrt(2.0) * Eigen::MatrixXd::Identity(2, 2),
                      Eigen::VectorXd::Zero(2));
  for (const auto& [w1, w2] : {std::pair{0.7, 3.0}, std::pair{1.0, 1.0}, std::pair{0.2, 0.5}}) {
    const Eigen::Vector2d w(w1, w2), x(1.5, -0.8);
    const auto r = prox_point(p, x, Weights(w), cfg_with(2.0));
    for (int i = 0; i < 2; ++i) CHECK(std::abs(r.x_hat[i] - 2.0 * w[i] * x[i] / (1.0 + 2.0 * w[i])) <= 1e-6);
  }
}

TEST_CASE("prox of a general quadratic against the linear system") {
  const auto p = make_problem(ProblemKind::ConstrainedQuadratic, 5, 80, ConvexSet::free_space(), 3,
                              ProblemOptions{{}, 1.0});
  const double rho_bar = 1.5;
  const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(5, 0.5, 2.0);
  const Point x = Eigen::VectorXd::LinSpaced(5, -0.4, 0.6);
  // (H + rho_bar W) x_hat = rho_bar W x + A^T b / N.
  const Eigen::MatrixXd H = p.features.transpose() * p.features / 80.0;
  const Eigen::MatrixXd M = H + rho_bar * Eigen::MatrixXd(w.asDiagonal());
  const Eigen::VectorXd rhs = rho_bar * w.cwiseProduct(x) + p.features.transpose() * p.targets / 80.0;
  const Point expect = M.ldlt().solve(rhs);
  const auto r = prox_point(p, x, Weights(w), cfg_with(rho_bar));
  CHECK((r.x_hat - expect).norm() <= 1e-6);
  CHECK(r.residual <= 1e-6);
}

TEST_CASE("soft threshold") {
  const auto p = data(ProblemKind::RobustRegression, Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1));
  for (double x : {2.0, -3.5, 0.4}) {
    const auto rep = stationarity_report(p, scalar(x), Weights::ones(1), cfg_with(1.0));
    const double expect = std::copysign(std::max(std::abs(x) - 1.0, 0.0), x);
    CHECK(std::abs(rep.x_hat[0] - expect) <= 1e-6);
  }
  const auto rep = stationarity_report(p, scalar(2.0), Weights::ones(1), cfg_with(1.0));
  CHECK(std::abs(rep.moreau_grad_sq - 1.0) <= 1e-6);
  CHECK(rep.phi_x == 2.0);
  CHECK(rep.phi_x_hat < rep.phi_x);
  CHECK(std::abs(rep.phi_x_hat - 1.0) <= 1e-6);
  CHECK(rep.moreau_grad_sq == 1.0 * 1.0 * rep.dist_sq_weighted);
}

TEST_CASE("kink on the boundary") {
  const double inf = std::numeric_limits<double>::infinity();
  const auto p = data(ProblemKind::RobustRegression, Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Constant(1, -10.0),
                      ConvexSet::box(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, inf)));
  CHECK(std::abs(prox_point(p, scalar(0.0), Weights::ones(1), cfg_with(1.0)).x_hat[0]) <= 1e-6);
}

TEST_CASE("moreau gradient formula") {
  CHECK(moreau_grad(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2), Weights::ones(2), 3.0).isZero(0.0));
  CHECK(moreau_grad(scalar(1.5), scalar(1.0), Weights(Eigen::VectorXd::Constant(1, 3.0)), 2.0)[0] == 3.0);
}

TEST_CASE("report at a minimiser is near zero") {
  const auto p = data(ProblemKind::ConstrainedQuadratic, Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d(1, -1, 2));
  MoreauConfig c = cfg_with(2.0);
  const auto rep = stationarity_report(p, Eigen::Vector3d(1, -1, 2), Weights::ones(3), c);
  CHECK(std::sqrt(rep.dist_sq) <= 10.0 * c.inner_tol);
  CHECK(rep.moreau_grad_sq <= 10.0 * c.inner_tol);
  CHECK(rep.phi_x_hat <= rep.phi_x + 10.0 * c.inner_tol);
}

TEST_CASE("gradient mapping") {
  const double inf = std::numeric_limits<double>::infinity();
  const auto half = data(ProblemKind::ConstrainedQuadratic, Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1),
                         ConvexSet::box(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, inf)));
  CHECK(gradient_mapping(half, scalar(0.5), Eigen::VectorXd::Ones(1), 1.0)[0] == 0.5);

  const auto free = make_problem(ProblemKind::ConstrainedQuadratic, 4, 60, ConvexSet::free_space(), 8,
                                 ProblemOptions{{}, 1.0});
  const Eigen::VectorXd vhat = Eigen::VectorXd::LinSpaced(4, 0.3, 3.0);
  for (double lambda : {0.1, 1.0, 7.0}) {
    const Point x = Eigen::VectorXd::LinSpaced(4, -1.0, 1.0);
    const double lhs = gradient_mapping(free, x, vhat, lambda).norm();
    const Point g = full_subgrad(free, x);
    const double rhs = std::sqrt((g.array().square() / vhat.array().sqrt()).sum());
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs));
  }

  const auto rr = data(ProblemKind::RobustRegression, Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1));
  CHECK_THROWS_AS(gradient_mapping(rr, scalar(1.0), Eigen::VectorXd::Ones(1), 1.0), ArgumentError);
}

TEST_CASE("mapping against the moreau gradient") {
  const auto p = data(ProblemKind::ConstrainedQuadratic, Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d(0.1, 0.2, 0.3),
                      ConvexSet::box(3, -1, 1));
  const auto at_min = compare_mapping_vs_moreau(p, Eigen::Vector3d(0.1, 0.2, 0.3), Eigen::VectorXd::Ones(3), cfg_with(2.0));
  CHECK(at_min.mapping_norm <= 1e-12);
  CHECK(at_min.moreau_grad_norm <= 1e-6);
  CHECK(at_min.holds);

  // Unconstrained with v_hat = 1: the mapping is the gradient, and the moreau
  // gradient of (1/2N)||Ay - b||^2 comes from the closed-form prox.
  const auto f = data(ProblemKind::ConstrainedQuadratic, Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, -1));
  const Point x(Eigen::Vector2d(0.5, 0.5));
  const double rho_bar = 1.0;
  // f = (1/4)||y - b||^2, so x_hat = (rho_bar x + b/2) / (rho_bar + 1/2).
  const Point x_hat = (rho_bar * x + 0.5 * Eigen::Vector2d(1, -1)) / (rho_bar + 0.5);
  const auto cmp = compare_mapping_vs_moreau(f, x, Eigen::VectorXd::Ones(2), cfg_with(rho_bar));
  CHECK(std::abs(cmp.mapping_norm - full_subgrad(f, x).norm()) <= 1e-14);
  CHECK(std::abs(cmp.moreau_grad_norm - rho_bar * (x - x_hat).norm()) <= 1e-6);
  CHECK(cmp.holds);
}

TEST_CASE("rho_hat and default configuration") {
  const auto p = make_problem(ProblemKind::PhaseRetrieval, 3, 20, ConvexSet::ball(Point::Zero(3), 1.0), 1);
  OptimizerConfig c;
  c.delta = 0.25;
  CHECK(rho_hat(p, c) == doctest::Approx(p.rho / 0.5));
  CHECK(default_moreau_config(p, c).rho_bar == doctest::Approx(4.0 * p.rho));
  c.variant = Variant::ScalarAdaGrad;
  CHECK(rho_hat(p, c) == p.rho);
}

TEST_CASE("prox errors") {
  const auto pr = data(ProblemKind::PhaseRetrieval, Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1));
  CHECK_THROWS_AS(prox_point(pr, scalar(0.5), Weights::ones(1), cfg_with(1.0)), ArgumentError);

  const auto rr = make_problem(ProblemKind::RobustRegression, 5, 200, ConvexSet::free_space(), 2);
  MoreauConfig tight = cfg_with(1.0);
  tight.inner_tol = 1e-14;
  tight.inner_max_iters = 50;
  tight.inner_restarts = 0;
  try {
    prox_point(rr, Point::Ones(5), Weights::ones(5), tight);
    FAIL("expected a ProxError");
  } catch (const ProxError& e) {
    CHECK(e.best().residual > 1e-14);
    CHECK(e.best().x_hat.size() == 5);
  }
  tight.accept_inexact = true;
  const auto r = prox_point(rr, Point::Ones(5), Weights::ones(5), tight);
  CHECK_FALSE(r.converged);
}

TEST_CASE("prox never increases the proximal objective over x") {
  const auto p = make_problem(ProblemKind::PhaseRetrieval, 4, 100, ConvexSet::ball(Point::Zero(4), 1.0), 5);
  MoreauConfig c;
  c.rho_bar = 2.0 * p.rho;
  c.inner_tol = 1e-4;
  const Point x = Point::Constant(4, 0.3);
  const auto rep = stationarity_report(p, x, Weights::ones(4), c);
  CHECK(rep.envelope <= rep.phi_x);
  CHECK(p.set.contains(rep.x_hat));
}
