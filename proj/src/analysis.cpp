#include "wcxopt/analysis.hpp"

#include "wcxopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wcx {

DecompositionResidual momentum_decomposition_check(const std::vector<Point>& A,
                                                   const std::vector<Point>& g, double beta1) {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ArgumentError("beta1 must lie in [0, 1)");
  if (A.size() != g.size()) throw ArgumentError("A and g sequences differ in length");
  DecompositionResidual out;
  if (A.empty()) return out;
  const auto d = A.front().size();
  const double c = 1.0 / (1.0 - beta1);

  Point m_prev = Point::Zero(d), A_prev = Point::Zero(d);
  for (std::size_t t = 0; t < A.size(); ++t) {
    if (A[t].size() != d || g[t].size() != d) throw ArgumentError("dimension mismatch in sequences");
    const Point m = beta1 * m_prev + (1.0 - beta1) * g[t];
    const double lhs = A[t].dot(g[t]);
    const double t1 = c * A[t].dot(m);
    const double t2 = c * A_prev.dot(m_prev);
    const double t3 = A_prev.dot(m_prev);
    const double t4 = beta1 * c * (A_prev - A[t]).dot(m_prev);
    const double rhs = t1 - t2 + t3 + t4;
    const double err = std::abs(lhs - rhs);
    const double scale =
        std::max({std::abs(lhs), std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4)});
    out.max_abs = std::max(out.max_abs, err);
    if (scale > 0.0) out.max_rel = std::max(out.max_rel, err / scale);
    m_prev = m;
    A_prev = A[t];
  }
  return out;
}

namespace {

void require_horizon(std::int64_t T) {
  if (T < 1) throw ArgumentError("T must be at least 1");
}

BoundCheck finish(double lhs, double rhs, double factor) {
  BoundCheck b;
  b.lhs = lhs;
  b.rhs = rhs;
  b.holds = lhs <= rhs;
  b.rhs_step_scaled = factor * rhs;
  b.holds_step_scaled = lhs <= b.rhs_step_scaled;
  return b;
}

double momentum_factor(double beta1) {
  const double r = beta1 / (1.0 - beta1);
  return r + 2.0 * r * r;
}

void require_rho_bar(double actual, double expected, const char* what) {
  if (std::abs(actual - expected) > 1e-12 * std::max(1.0, std::abs(expected)))
    throw ArgumentError(std::string("theorem constants assume rho_bar = ") + what + " (got " +
                        std::to_string(actual) + ", expected " + std::to_string(expected) + ")");
}

}  // namespace

BoundCheck lemma4_bound(double lhs, const OptimizerConfig& config, double G, Eigen::Index d,
                        std::int64_t T) {
  require_horizon(T);
  const OptimizerConfig c = config.resolved();
  const double gamma = c.gamma();
  if (!(gamma < 1.0)) throw ArgumentError("moment bound needs gamma = beta1^2/beta2 < 1");
  if (!(c.beta2 < 1.0)) throw ArgumentError("moment bound needs beta2 < 1");
  const double rhs = (1.0 - c.beta1) / std::sqrt((1.0 - c.beta2) * (1.0 - gamma)) *
                     static_cast<double>(d) * G * (1.0 + std::log(static_cast<double>(T)));
  return finish(lhs, rhs, c.alpha * c.alpha);
}

BoundCheck adagrad_sum_bound(double lhs, double alpha, Eigen::Index d, double delta, double G,
                             std::int64_t T) {
  require_horizon(T);
  if (!(alpha > 0.0) || !(delta > 0.0)) throw ArgumentError("alpha and delta must be positive");
  const double rhs = alpha * static_cast<double>(d) *
                     (1.0 + std::log(static_cast<double>(T) * G * G / delta + 1.0));
  return finish(lhs, rhs, alpha);
}

TheoremConstants theorem_constants(int theorem, const TheoremInputs& in) {
  if (theorem != 1 && theorem != 2) throw ArgumentError("theorem must be 1 or 2");
  if (!(in.rho > 0.0)) throw ArgumentError("rho must be positive");
  if (!(in.G >= 0.0) || in.d < 1) throw ArgumentError("need G >= 0 and d >= 1");
  if (!(in.delta > 0.0 && in.delta <= 1.0)) throw ArgumentError("delta must lie in (0, 1]");
  if (!(in.alpha > 0.0)) throw ArgumentError("alpha must be positive");
  if (!(in.beta1 >= 0.0 && in.beta1 < 1.0)) throw ArgumentError("beta1 must lie in [0, 1)");
  if (!(in.beta2 >= 0.0 && in.beta2 < 1.0)) throw ArgumentError("beta2 must lie in [0, 1)");

  TheoremConstants out;
  out.theorem = theorem;
  out.inputs = in;
  const double d = static_cast<double>(in.d);
  const double sd = std::sqrt(in.delta);
  const double rho = in.rho, G = in.G, a = in.alpha, b1 = in.beta1;
  out.gamma = b1 == 0.0 ? 0.0 : b1 * b1 / in.beta2;

  if (theorem == 1) {
    if (!(out.gamma < 1.0)) throw ArgumentError("the diagonal-method bound needs gamma = beta1^2/beta2 < 1");
    require_rho_bar(in.rho_bar, 2.0 * rho / sd, "2 rho/sqrt(delta)");
    out.D_hat = 2.0 * std::sqrt(d) * G / rho;
    out.C1 = 4.0 * rho * b1 * a / (sd * (1.0 - b1)) * std::sqrt(d) * out.D_hat * G +
             in.envelope_x1 - in.f_star;
    out.C2 = 5.0 * rho / in.delta * d * G * G +
             2.0 * rho / sd * (1.0 + G / sd + momentum_factor(b1)) * (1.0 - b1) /
                 std::sqrt((1.0 - in.beta2) * (1.0 - out.gamma)) * d * G;
    const double c3 = 2.0 * rho / sd * out.D_hat * out.D_hat;
    out.C3 = c3 * in.vhat_sqrt_sum;
    out.C3_worst = c3 * d * G;
  } else {
    require_rho_bar(in.rho_bar, 2.0 * rho, "2 rho");
    out.D_hat = 2.0 * std::sqrt(d) * G / std::sqrt(rho);
    out.C1 = in.envelope_x1 - in.f_star +
             2.0 * rho * (2.0 * b1 / (1.0 - b1) + 1.0) * a * out.D_hat * std::sqrt(d) * G / sd;
    out.C2 = 2.0 * rho * a * d * (0.5 + momentum_factor(b1));
  }
  return out;
}

double TheoremConstants::bound(std::int64_t T) const {
  require_horizon(T);
  const double t = static_cast<double>(T);
  const auto& in = inputs;
  if (theorem == 1)
    return 2.0 / (in.alpha * std::sqrt(t)) * (C1 + (1.0 + std::log(t)) * C2 + C3);
  return 2.0 * in.G / (in.alpha * std::sqrt(t)) *
         (C1 + (1.0 + std::log(t * in.G * in.G / in.delta + 1.0)) * C2);
}

double TheoremConstants::bound_worst(std::int64_t T) const {
  if (theorem == 2) return bound(T);
  const double t = static_cast<double>(T);
  return bound(T) + 2.0 / (inputs.alpha * std::sqrt(t)) * (C3_worst - C3);
}

TheoremCheck theorem_bound_check(const std::vector<std::optional<double>>& per_seed,
                                 const TheoremConstants& constants, std::int64_t T) {
  if (per_seed.size() < 20)
    throw ArgumentError("theorem check needs at least 20 seeds, got " +
                        std::to_string(per_seed.size()));
  TheoremCheck out;
  double sum = 0.0;
  for (std::size_t s = 0; s < per_seed.size(); ++s) {
    if (per_seed[s] && std::isfinite(*per_seed[s])) {
      sum += *per_seed[s];
      ++out.valid_seeds;
    } else {
      ++out.excluded_seeds;
      out.warnings.push_back("seed index " + std::to_string(s) +
                             " excluded: stationarity solve failed");
    }
  }
  if (out.valid_seeds < 10)
    throw NumericalError("theorem check: only " + std::to_string(out.valid_seeds) +
                         " valid seeds");
  out.measured = sum / out.valid_seeds;
  out.bound = constants.bound(T);
  out.bound_worst = constants.bound_worst(T);
  out.holds = out.measured <= out.bound;
  return out;
}

RateFit rate_fit(std::vector<std::pair<double, double>> points, bool running_min) {
  std::sort(points.begin(), points.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> xs, ys;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [t, y] : points) {
    if (!(t > 0.0)) throw ArgumentError("rate fit: t must be positive");
    if (!(y > 0.0) || !std::isfinite(y)) continue;
    best = running_min ? std::min(best, y) : y;
    xs.push_back(std::log(t));
    ys.push_back(std::log(best));
  }
  if (xs.size() < 5)
    throw ArgumentError("rate fit needs at least 5 positive points, got " +
                        std::to_string(xs.size()));

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw ArgumentError("rate fit needs at least two distinct t values");

  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.points_used = static_cast<int>(xs.size());
  return fit;
}

double lemma1_radius(Eigen::Index d, double G, double delta, double rho_bar, double rho_hat) {
  if (!(rho_bar > rho_hat)) throw ArgumentError("distance bound needs rho_bar > rho_hat");
  if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
  return 2.0 * std::sqrt(static_cast<double>(d)) * G / (std::sqrt(delta) * (rho_bar - rho_hat));
}

EuclideanRadii euclidean_radii(Eigen::Index d, double G, double rho_bar, double rho) {
  if (!(rho_bar > rho)) throw ArgumentError("distance bound needs rho_bar > rho");
  const double num = 4.0 * static_cast<double>(d) * G * G;
  return {std::sqrt(num) / (rho_bar - rho), std::sqrt(num / (rho_bar - rho))};
}

}  // namespace wcx
