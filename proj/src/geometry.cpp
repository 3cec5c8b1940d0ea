#include "wcxopt/geometry.hpp"

#include "wcxopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wcx {

namespace {

constexpr double kMultiplierTol = 1e-12;
constexpr int kMaxBisections = 200;
constexpr int kMaxBracketDoublings = 1100;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double clamp_bound(double b) {
  if (std::isnan(b)) throw ArgumentError("box bound is NaN");
  if (b >= kUnbounded) return kUnbounded;
  if (b <= -kUnbounded) return -kUnbounded;
  return b;
}

void check_dims(const ConvexSet& set, const Weights& w, const Point& y) {
  if (w.size() != y.size())
    throw ArgumentError("weights have dimension " + std::to_string(w.size()) +
                        ", point has " + std::to_string(y.size()));
  const auto d = set.dim();
  if (d >= 0 && d != y.size())
    throw ArgumentError("set has dimension " + std::to_string(d) +
                        ", point has " + std::to_string(y.size()));
}

bool bracket_done(double lo, double hi) {
  return hi - lo <= kMultiplierTol * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
}

Point project_ball(const EuclideanBall& ball, const Weights& w, const Point& y) {
  const Eigen::VectorXd u = y - ball.center;
  const double r2 = ball.radius * ball.radius;
  if (u.squaredNorm() <= r2 * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()))
    return y;

  const auto& wv = w.values();
  if (wv.maxCoeff() == wv.minCoeff()) return ball.center + u * (ball.radius / u.norm());

  // Stationarity gives z - c = w u / (w + lambda); the constraint residual
  // below is decreasing in lambda >= 0.
  auto excess = [&](double lambda) {
    return (wv.array() * u.array() / (wv.array() + lambda)).matrix().squaredNorm() - r2;
  };

  double lo = 0.0, hi = 1.0;
  for (int k = 0; excess(hi) > 0.0; ++k) {
    if (k >= kMaxBracketDoublings)
      throw NumericalError("ball projection: cannot bracket multiplier", excess(hi));
    lo = hi;
    hi *= 2.0;
  }
  int it = 0;
  for (; it < kMaxBisections && !bracket_done(lo, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  if (!bracket_done(lo, hi))
    throw NumericalError("ball projection: bisection did not converge", excess(hi));

  // hi is on the feasible side.
  return ball.center + (wv.array() * u.array() / (wv.array() + hi)).matrix();
}

Point project_simplex(const Simplex& simplex, const Weights& w, const Point& y) {
  const auto& wv = w.values();
  const double s = simplex.scale;
  // z_i = max(0, y_i - theta / w_i); the total mass is nonincreasing in theta.
  auto mass = [&](double theta) {
    return (y.array() - theta / wv.array()).max(0.0).sum();
  };

  double lo, hi;
  if (mass(0.0) >= s) {
    lo = 0.0;
    hi = 1.0;
    for (int k = 0; mass(hi) > s; ++k) {
      if (k >= kMaxBracketDoublings)
        throw NumericalError("simplex projection: cannot bracket multiplier", mass(hi) - s);
      lo = hi;
      hi *= 2.0;
    }
  } else {
    hi = 0.0;
    lo = -1.0;
    for (int k = 0; mass(lo) < s; ++k) {
      if (k >= kMaxBracketDoublings)
        throw NumericalError("simplex projection: cannot bracket multiplier", s - mass(lo));
      hi = lo;
      lo *= 2.0;
    }
  }
  for (int it = 0; it < kMaxBisections && !bracket_done(lo, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) > s)
      lo = mid;
    else
      hi = mid;
  }
  if (!bracket_done(lo, hi))
    throw NumericalError("simplex projection: bisection did not converge",
                         std::abs(mass(hi) - s));

  // Recover the multiplier in closed form on the support found by bisection.
  const double theta_mid = 0.5 * (lo + hi);
  double num = -s, den = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] - theta_mid / wv[i] > 0.0) {
      num += y[i];
      den += 1.0 / wv[i];
    }
  }
  const double theta = den > 0.0 ? num / den : theta_mid;
  return (y.array() - theta / wv.array()).max(0.0).matrix();
}

}  // namespace

Weights::Weights(Eigen::VectorXd v) : v_(std::move(v)) {
  for (Eigen::Index i = 0; i < v_.size(); ++i) {
    if (!(v_[i] > 0.0) || !std::isfinite(v_[i]))
      throw ArgumentError("weight " + std::to_string(i) + " is not a positive finite number");
  }
}

ConvexSet ConvexSet::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  if (lower.size() != upper.size()) throw ArgumentError("box bounds differ in dimension");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    lower[i] = clamp_bound(lower[i]);
    upper[i] = clamp_bound(upper[i]);
    if (lower[i] > upper[i]) throw ArgumentError("box lower bound exceeds upper bound");
  }
  return ConvexSet(Box{std::move(lower), std::move(upper)});
}

ConvexSet ConvexSet::box(Eigen::Index d, double lower, double upper) {
  return box(Eigen::VectorXd::Constant(d, lower), Eigen::VectorXd::Constant(d, upper));
}

ConvexSet ConvexSet::ball(Eigen::VectorXd center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ArgumentError("ball radius must be positive");
  if (!center.allFinite()) throw ArgumentError("ball center must be finite");
  return ConvexSet(EuclideanBall{std::move(center), radius});
}

ConvexSet ConvexSet::simplex(Eigen::Index d, double scale) {
  if (d < 1) throw ArgumentError("simplex dimension must be positive");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("simplex scale must be positive");
  return ConvexSet(Simplex{d, scale});
}

std::string ConvexSet::kind_name() const {
  return std::visit(overloaded{[](const FreeSpace&) { return std::string("free"); },
                               [](const Box&) { return std::string("box"); },
                               [](const EuclideanBall&) { return std::string("ball"); },
                               [](const Simplex&) { return std::string("simplex"); }},
                    set_);
}

Eigen::Index ConvexSet::dim() const {
  return std::visit(overloaded{[](const FreeSpace&) -> Eigen::Index { return -1; },
                               [](const Box& b) { return b.lower.size(); },
                               [](const EuclideanBall& b) { return b.center.size(); },
                               [](const Simplex& s) { return s.dim; }},
                    set_);
}

bool ConvexSet::is_bounded() const { return std::isfinite(enclosing_radius()); }

double ConvexSet::enclosing_radius() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      overloaded{[&](const FreeSpace&) { return inf; },
                 [&](const Box& b) {
                   if ((b.lower.array() <= -kUnbounded).any() || (b.upper.array() >= kUnbounded).any())
                     return inf;
                   return b.lower.cwiseAbs().cwiseMax(b.upper.cwiseAbs()).norm();
                 },
                 [](const EuclideanBall& b) { return b.center.norm() + b.radius; },
                 [](const Simplex& s) { return s.scale; }},
      set_);
}

bool ConvexSet::contains(const Point& x, double tol) const {
  const auto d = dim();
  if (d >= 0 && d != x.size()) throw ArgumentError("membership test: dimension mismatch");
  if (!x.allFinite()) return false;
  return std::visit(
      overloaded{[](const FreeSpace&) { return true; },
                 [&](const Box& b) {
                   for (Eigen::Index i = 0; i < x.size(); ++i) {
                     if (x[i] < b.lower[i] - tol * std::max(1.0, std::abs(b.lower[i]))) return false;
                     if (x[i] > b.upper[i] + tol * std::max(1.0, std::abs(b.upper[i]))) return false;
                   }
                   return true;
                 },
                 [&](const EuclideanBall& b) {
                   return (x - b.center).norm() <= b.radius + tol * std::max(1.0, b.radius);
                 },
                 [&](const Simplex& s) {
                   return x.minCoeff() >= -tol &&
                          std::abs(x.sum() - s.scale) <= tol * std::max(1.0, s.scale);
                 }},
      set_);
}

double ConvexSet::support(const Point& q) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto d = dim();
  if (d >= 0 && d != q.size()) throw ArgumentError("support: dimension mismatch");
  return std::visit(
      overloaded{[&](const FreeSpace&) { return q.isZero(0.0) ? 0.0 : inf; },
                 [&](const Box& b) {
                   double total = 0.0;
                   for (Eigen::Index i = 0; i < q.size(); ++i) {
                     if (q[i] > 0.0) {
                       if (b.upper[i] >= kUnbounded) return inf;
                       total += q[i] * b.upper[i];
                     } else if (q[i] < 0.0) {
                       if (b.lower[i] <= -kUnbounded) return inf;
                       total += q[i] * b.lower[i];
                     }
                   }
                   return total;
                 },
                 [&](const EuclideanBall& b) { return q.dot(b.center) + b.radius * q.norm(); },
                 [&](const Simplex& s) { return s.scale * q.maxCoeff(); }},
      set_);
}

bool ConvexSet::operator==(const ConvexSet& other) const {
  if (set_.index() != other.set_.index()) return false;
  return std::visit(
      overloaded{[](const FreeSpace&, const FreeSpace&) { return true; },
                 [](const Box& a, const Box& b) { return a.lower == b.lower && a.upper == b.upper; },
                 [](const EuclideanBall& a, const EuclideanBall& b) {
                   return a.center == b.center && a.radius == b.radius;
                 },
                 [](const Simplex& a, const Simplex& b) { return a.dim == b.dim && a.scale == b.scale; },
                 [](const auto&, const auto&) { return false; }},
      set_, other.set_);
}

double weighted_norm_sq(const Point& x, const Weights& w) {
  if (x.size() != w.size()) throw ArgumentError("weighted norm: dimension mismatch");
  return (w.values().array() * x.array().square()).sum();
}

double weighted_norm_sq(const Point& x, const Eigen::VectorXd& w) {
  if (x.size() != w.size()) throw ArgumentError("weighted norm: dimension mismatch");
  return (w.array() * x.array().square()).sum();
}

Point project_weighted(const ConvexSet& set, const Weights& w, const Point& y) {
  check_dims(set, w, y);
  if (!y.allFinite()) throw NumericalError("projection of a non-finite point");
  return std::visit(
      overloaded{[&](const FreeSpace&) -> Point { return y; },
                 // Separable in the coordinates, hence weight independent.
                 [&](const Box& b) -> Point { return y.cwiseMax(b.lower).cwiseMin(b.upper); },
                 [&](const EuclideanBall& b) { return project_ball(b, w, y); },
                 [&](const Simplex& s) {
                   if (set.contains(y)) return Point(y);
                   return project_simplex(s, w, y);
                 }},
      set.variant());
}

Point project(const ConvexSet& set, const Point& y) {
  return project_weighted(set, Weights::ones(y.size()), y);
}

}  // namespace wcx
