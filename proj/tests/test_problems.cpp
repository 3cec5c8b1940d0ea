#include <doctest.h>

#include "wcxopt/errors.hpp"
#include "wcxopt/problems.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace wcx;

namespace {

ProblemInstance one_sample(ProblemKind kind, double a, double b, std::optional<double> radius = {}) {
  ProblemOptions o;
  o.operating_radius = radius;
  return make_problem_from_data(kind, Eigen::MatrixXd::Constant(1, 1, a), Eigen::VectorXd::Constant(1, b),
                                ConvexSet::free_space(), o);
}

Point scalar(double v) { return Point::Constant(1, v); }

}  // namespace

TEST_CASE("single absolute value sample") {
  const auto p = one_sample(ProblemKind::RobustRegression, 1.0, 0.0);
  CHECK(p.rho == 0.0);
  CHECK(p.G == 1.0);
  CHECK(p.f_star == 0.0);
  for (double x : {-2.0, -0.3, 0.0, 1.7}) CHECK(full_objective(p, scalar(x)) == std::abs(x));
}

TEST_CASE("single phase retrieval sample is 2-weakly convex") {
  const auto p = one_sample(ProblemKind::PhaseRetrieval, 1.0, 1.0, 3.0);
  CHECK(p.rho == 2.0);
  CHECK(p.f_star == 0.0);
  // Midpoint convexity of f(x) + x^2 on random segments of [-3, 3].
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  auto h = [&](double x) { return std::abs(x * x - 1.0) + x * x; };
  double worst = -1.0;
  for (int k = 0; k < 10000; ++k) {
    const double x = u(rng), y = u(rng);
    worst = std::max(worst, h(0.5 * (x + y)) - 0.5 * (h(x) + h(y)));
    CHECK(full_objective(p, scalar(x)) == std::abs(x * x - 1.0));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("smoothness constant of the quadratic") {
  const auto p = make_problem_from_data(ProblemKind::ConstrainedQuadratic, Eigen::MatrixXd::Identity(2, 2),
                                        Eigen::VectorXd::Zero(2), ConvexSet::box(2, -1, 1));
  REQUIRE(p.L);
  CHECK(*p.L == doctest::Approx(0.5));  // (1/N) A^T A = I/2
  CHECK(p.f_star == 0.0);

  const auto q = make_problem(ProblemKind::ConstrainedQuadratic, 6, 300, ConvexSet::ball(Point::Zero(6), 1.0), 9);
  const Eigen::MatrixXd gram = q.features.transpose() * q.features / 300.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  CHECK(*q.L == doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-8));
  CHECK(q.rho == *q.L);
}

TEST_CASE("sampling") {
  const auto single = one_sample(ProblemKind::RobustRegression, 2.0, 1.0);
  Rng r(5);
  for (int k = 0; k < 100; ++k) CHECK(sample_index(single, r) == 0);

  const auto p = make_problem(ProblemKind::RobustRegression, 3, 50, ConvexSet::free_space(), 1);
  Rng a(77), b(77);
  for (int k = 0; k < 1000; ++k) CHECK(sample_index(p, a) == sample_index(p, b));

  const auto four = make_problem(ProblemKind::RobustRegression, 2, 4, ConvexSet::free_space(), 1);
  Rng c(8);
  std::array<int, 4> counts{};
  const int draws = 1000000;
  for (int k = 0; k < draws; ++k) ++counts[static_cast<std::size_t>(sample_index(four, c))];
  for (int n : counts) {
    CHECK(n >= 0.24 * draws);
    CHECK(n <= 0.26 * draws);
  }
}

TEST_CASE("subgradient examples") {
  const auto rr = make_problem_from_data(ProblemKind::RobustRegression, Eigen::MatrixXd::Identity(2, 2),
                                         Eigen::VectorXd::Zero(2), ConvexSet::free_space());
  CHECK(stoch_subgrad(rr, Eigen::Vector2d(2, 5), Sample{Eigen::Vector2d(1, 0), 0.0}) ==
        Point(Eigen::Vector2d(1, 0)));
  CHECK(stoch_subgrad(rr, Eigen::Vector2d(3, 5), Sample{Eigen::Vector2d(1, 0), 3.0}).isZero(0.0));

  const auto pr = one_sample(ProblemKind::PhaseRetrieval, 1.0, 1.0, 3.0);
  CHECK(stoch_subgrad(pr, scalar(2.0), 0)[0] == 4.0);
  CHECK(stoch_subgrad(pr, scalar(1.0), 0)[0] == 0.0);

  const auto cq = one_sample(ProblemKind::ConstrainedQuadratic, 2.0, 1.0, 3.0);
  CHECK(stoch_subgrad(cq, scalar(1.5), 0)[0] == 2.0 * (3.0 - 1.0));
}

TEST_CASE("full objective and subgradient") {
  const auto sym = make_problem_from_data(ProblemKind::RobustRegression, Eigen::MatrixXd::Ones(2, 1),
                                          Eigen::Vector2d(1, -1), ConvexSet::free_space());
  CHECK(full_objective(sym, scalar(0.0)) == 1.0);
  CHECK(full_subgrad(sym, scalar(0.0))[0] == 0.0);

  for (auto kind : {ProblemKind::RobustRegression, ProblemKind::PhaseRetrieval, ProblemKind::ConstrainedQuadratic}) {
    const auto p = one_sample(kind, -0.7, 0.3, 2.0);
    for (double x : {-1.0, 0.2, 1.3}) {
      CHECK(full_objective(p, scalar(x)) == sample_loss(p, scalar(x), 0));
      CHECK(full_subgrad(p, scalar(x)) == stoch_subgrad(p, scalar(x), 0));
    }
  }
}

TEST_CASE("full subgradient matches a finite difference where smooth") {
  const auto p = make_problem(ProblemKind::ConstrainedQuadratic, 4, 100, ConvexSet::ball(Point::Zero(4), 1.0), 2);
  const Point x = Eigen::Vector4d(0.1, -0.2, 0.3, 0.05);
  const Point g = full_subgrad(p, x);
  for (Eigen::Index i = 0; i < 4; ++i) {
    Point e = Point::Zero(4);
    e[i] = 1e-6;
    const double fd = (full_objective(p, x + e) - full_objective(p, x - e)) / 2e-6;
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("G bounds every subgradient on the operating region") {
  for (auto kind : {ProblemKind::RobustRegression, ProblemKind::PhaseRetrieval, ProblemKind::ConstrainedQuadratic}) {
    const auto set = ConvexSet::ball(Point::Zero(5), 1.0);
    const auto p = make_problem(kind, 5, 200, set, 4);
    Rng rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
      Point x(5);
      for (auto& v : x) v = u(rng);
      x = project(set, x);
      CHECK(stoch_subgrad(p, x, sample_index(p, rng)).cwiseAbs().maxCoeff() <= p.G * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("weak convexity check") {
  const auto rr = make_problem(ProblemKind::RobustRegression, 5, 100, ConvexSet::free_space(), 1);
  CHECK(check_weak_convexity(rr, 0.0, 500, 2.0).pass);

  const auto pr = one_sample(ProblemKind::PhaseRetrieval, 1.0, 1.0, 3.0);
  CHECK(check_weak_convexity(pr, 2.0, 2000, 3.0).pass);
  const auto bad = check_weak_convexity(pr, 0.0, 2000, 1.0);
  CHECK_FALSE(bad.pass);
  CHECK(bad.worst_violation > 0.0);
  // h(0) = 1 against (h(-1) + h(1))/2 = 0.
  CHECK(full_objective(pr, scalar(0.0)) - 0.5 * (full_objective(pr, scalar(-1.0)) + full_objective(pr, scalar(1.0))) == 1.0);
}

TEST_CASE("argument errors") {
  const auto set = ConvexSet::free_space();
  CHECK_THROWS_AS(make_problem(ProblemKind::RobustRegression, 0, 10, set, 1), ArgumentError);
  CHECK_THROWS_AS(make_problem(ProblemKind::RobustRegression, 3, 0, set, 1), ArgumentError);
  CHECK_THROWS_AS(make_problem(ProblemKind::RobustRegression, 3, 10, ConvexSet::box(2, 0, 1), 1), ArgumentError);
  CHECK_THROWS_AS(make_problem(ProblemKind::PhaseRetrieval, 3, 10, set, 1), ArgumentError);
  ProblemOptions low;
  low.rho_declared = 0.5;
  CHECK_THROWS_AS(make_problem(ProblemKind::PhaseRetrieval, 3, 10, ConvexSet::ball(Point::Zero(3), 1.0), 1, low),
                  ArgumentError);
  const auto p = make_problem(ProblemKind::RobustRegression, 3, 10, set, 1);
  CHECK_THROWS_AS(full_objective(p, Point::Zero(2)), ArgumentError);
  CHECK_THROWS_AS(problem_kind_from_string("lasso"), ArgumentError);
}
