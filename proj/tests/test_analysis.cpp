#include <doctest.h>

#include "wcxopt/analysis.hpp"
#include "wcxopt/errors.hpp"
#include "wcxopt/optimizers.hpp"

#include <cmath>
#include <random>

using namespace wcx;

namespace {

std::vector<Point> random_seq(std::mt19937_64& rng, int len, Eigen::Index d) {
  std::normal_distribution<double> n;
  std::vector<Point> out(static_cast<std::size_t>(len));
  for (auto& p : out) p = Point::NullaryExpr(d, [&] { return n(rng); });
  return out;
}

TheoremInputs reference_inputs() {
  TheoremInputs in;
  in.rho = 2.0;
  in.G = 1.0;
  in.d = 2;
  in.delta = 1.0;
  in.alpha = 0.1;
  in.beta1 = 0.9;
  in.beta2 = 0.999;
  in.rho_bar = 4.0;
  in.envelope_x1 = 0.5;
  in.f_star = 0.0;
  in.vhat_sqrt_sum = 1.7;
  return in;
}

}  // namespace

TEST_CASE("momentum decomposition identity") {
  std::mt19937_64 rng(1);
  for (double beta1 : {0.0, 0.5, 0.9, 0.99}) {
    for (int k = 0; k < 20; ++k) {
      const auto A = random_seq(rng, 100, 8), g = random_seq(rng, 100, 8);
      CHECK(momentum_decomposition_check(A, g, beta1).max_rel <= 1e-10);
    }
  }
  const auto A = random_seq(rng, 50, 3), g = random_seq(rng, 50, 3);
  CHECK(momentum_decomposition_check(A, g, 0.0).max_abs <= 1e-13);
  const std::vector<Point> constant(50, A.front());
  CHECK(momentum_decomposition_check(constant, g, 0.9).max_rel <= 1e-13);
  CHECK_THROWS_AS(momentum_decomposition_check(A, g, 1.0), ArgumentError);
}

TEST_CASE("moment bound after one step") {
  // T = 1, beta1 = 0: lhs = alpha^2 ||g||^2_{v_hat^{-1/2}}, rhs = d G / sqrt(1 - beta2).
  OptimizerConfig c;
  c.alpha = 0.1;
  c.beta1 = 0.0;
  c.beta2 = 0.999;
  c.delta = 1.0;
  const auto set = ConvexSet::free_space();
  const double G = 0.8;
  const Point g = Eigen::Vector3d(0.8, -0.3, 0.5);
  auto s = step(initial_state(c, set, Point::Zero(3)), g, c, set);
  const double lhs = 0.01 * (g.array().square() / s.v_hat.array().sqrt()).sum();
  CHECK(s.moment_sum == doctest::Approx(lhs).epsilon(1e-15));
  CHECK(lhs <= 0.01 * 3 * G * G);
  const auto b = lemma4_bound(s.moment_sum, c, G, 3, 1);
  CHECK(b.rhs == doctest::Approx(3 * G / std::sqrt(0.001)));
  CHECK(b.holds);
  CHECK(b.rhs_step_scaled == doctest::Approx(0.01 * b.rhs));

  const auto zero = lemma4_bound(0.0, c, G, 3, 100);
  CHECK(zero.holds);
  c.beta1 = 0.9;
  c.beta2 = 0.5;
  CHECK_THROWS_AS(lemma4_bound(0.0, c, G, 3, 100), ArgumentError);
}

TEST_CASE("AdaGrad sum bound after one step") {
  const double alpha = 0.5, delta = 0.2, G = 1.5;
  OptimizerConfig c;
  c.variant = Variant::ScalarAdaGrad;
  c.alpha = alpha;
  c.beta1 = 0.0;
  c.delta = delta;
  const auto set = ConvexSet::free_space();
  const auto s = step(initial_state(c, set, Point::Zero(1)), Point::Constant(1, G), c, set);
  const double lhs = alpha * alpha * G * G / (delta + G * G);
  CHECK(s.moment_sum == doctest::Approx(lhs).epsilon(1e-15));
  const auto b = adagrad_sum_bound(s.moment_sum, alpha, 1, delta, G, 1);
  CHECK(b.rhs == doctest::Approx(alpha * (1.0 + std::log(G * G / delta + 1.0))));
  CHECK(b.holds);
  CHECK(adagrad_sum_bound(0.0, alpha, 4, delta, G, 1000).holds);
}

TEST_CASE("diagonal-method bound constants against a hand evaluation") {
  const auto tc = theorem_constants(1, reference_inputs());
  CHECK(tc.gamma == doctest::Approx(30.0 / 37.0).epsilon(1e-15));
  CHECK(tc.D_hat == doctest::Approx(1.41421356237309504880).epsilon(1e-14));
  CHECK(tc.C1 == doctest::Approx(14.9).epsilon(1e-13));
  CHECK(tc.C2 == doctest::Approx(10082.0838511995828314).epsilon(1e-13));
  CHECK(tc.C3 == doctest::Approx(13.6).epsilon(1e-13));
  CHECK(tc.C3_worst == doctest::Approx(16.0).epsilon(1e-13));
  CHECK(tc.bound(10000) == doctest::Approx(20594.0015559104427123).epsilon(1e-13));
}

TEST_CASE("scalar AdaGrad bound constants against a hand evaluation") {
  const auto tc = theorem_constants(2, reference_inputs());
  CHECK(tc.D_hat == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(tc.C1 == doctest::Approx(21.9960461480710447418).epsilon(1e-13));
  CHECK(tc.C2 == doctest::Approx(137.2).epsilon(1e-13));
  CHECK(tc.bound(10000) == doctest::Approx(284.573692899449809207).epsilon(1e-13));
}

TEST_CASE("theorem constants with beta1 = 0 and the guards") {
  auto in = reference_inputs();
  in.beta1 = 0.0;
  CHECK(theorem_constants(1, in).C1 == doctest::Approx(in.envelope_x1 - in.f_star));
  CHECK(theorem_constants(2, in).C1 == doctest::Approx(in.envelope_x1 - in.f_star + 2 * 2 * 0.1 * 2 * std::sqrt(2.0)));

  in = reference_inputs();
  in.beta2 = 0.8;  // gamma > 1
  CHECK_THROWS_AS(theorem_constants(1, in), ArgumentError);
  in = reference_inputs();
  in.rho_bar = 3.0;
  CHECK_THROWS_AS(theorem_constants(1, in), ArgumentError);
  CHECK_THROWS_AS(theorem_constants(3, reference_inputs()), ArgumentError);
}

TEST_CASE("theorem bound check") {
  const auto tc = theorem_constants(1, reference_inputs());
  std::vector<std::optional<double>> zeros(20, 0.0);
  const auto ok = theorem_bound_check(zeros, tc, 100);
  CHECK(ok.measured == 0.0);
  CHECK(ok.holds);
  CHECK(ok.valid_seeds == 20);

  std::vector<std::optional<double>> some(20, 2.0);
  some[3].reset();
  const auto partial = theorem_bound_check(some, tc, 100);
  CHECK(partial.excluded_seeds == 1);
  CHECK(partial.measured == 2.0);
  CHECK_FALSE(partial.warnings.empty());

  std::vector<std::optional<double>> few(20);
  for (int i = 0; i < 9; ++i) few[static_cast<std::size_t>(i)] = 1.0;
  CHECK_THROWS_AS(theorem_bound_check(few, tc, 100), NumericalError);
  CHECK_THROWS(theorem_bound_check(std::vector<std::optional<double>>(5, 1.0), tc, 100));
}

TEST_CASE("rate fit on synthetic curves") {
  std::vector<std::pair<double, double>> power, logged, flat;
  for (int k = 0; k <= 12; ++k) {
    const double t = std::pow(10.0, 2.0 + 0.25 * k);
    power.emplace_back(t, 7.0 / std::sqrt(t));
    logged.emplace_back(t, 3.0 * (1.0 + std::log(t)) / std::sqrt(t));
    flat.emplace_back(t, 0.4);
  }
  const auto p = rate_fit(power);
  CHECK(std::abs(p.slope + 0.5) <= 1e-12);
  CHECK(p.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.intercept == doctest::Approx(std::log(7.0)).epsilon(1e-10));

  const auto l = rate_fit(logged);
  CHECK(l.slope > -0.5);
  CHECK(l.slope < -0.3);

  CHECK(std::abs(rate_fit(flat).slope) <= 1e-12);

  auto scaled = logged;
  for (auto& [t, y] : scaled) y *= 1e-4;
  CHECK(rate_fit(scaled).slope == doctest::Approx(l.slope).epsilon(1e-10));
}

TEST_CASE("rate fit preconditions") {
  std::vector<std::pair<double, double>> pts{{1, 1.0}, {10, 0.5}, {100, 0.0}, {1000, -1.0}, {1e4, 0.1}, {1e5, 0.05}};
  CHECK_THROWS_AS(rate_fit(pts), ArgumentError);
  pts.emplace_back(1e6, 0.01);
  const auto f = rate_fit(pts);
  CHECK(f.points_used == 5);

  // Fitting with the running minimum equals fitting the explicit running minimum.
  std::vector<std::pair<double, double>> noisy{{1, 1.0}, {2, 0.5}, {4, 0.9}, {8, 0.25}, {16, 0.3}, {32, 0.0625}};
  auto envelope = noisy;
  for (std::size_t i = 1; i < envelope.size(); ++i)
    envelope[i].second = std::min(envelope[i].second, envelope[i - 1].second);
  const auto a = rate_fit(noisy, true);
  const auto b = rate_fit(envelope, false);
  CHECK(a.slope == doctest::Approx(b.slope).epsilon(1e-12));
  CHECK(a.intercept == doctest::Approx(b.intercept).epsilon(1e-12));
  CHECK(std::abs(rate_fit(noisy, false).slope - a.slope) > 1e-3);
}

TEST_CASE("distance radii") {
  CHECK(lemma1_radius(4, 0.5, 0.25, 3.0, 1.0) == doctest::Approx(std::sqrt(4.0 * 4 * 0.25 / (0.25 * 4.0))));
  const auto r = euclidean_radii(3, 2.0, 5.0, 1.0);
  CHECK(r.squared_denominator == doctest::Approx(std::sqrt(4.0 * 3 * 4 / 16.0)));
  CHECK(r.unsquared_denominator == doctest::Approx(std::sqrt(4.0 * 3 * 4 / 4.0)));
  CHECK_THROWS_AS(lemma1_radius(4, 0.5, 0.25, 1.0, 1.0), ArgumentError);
}
