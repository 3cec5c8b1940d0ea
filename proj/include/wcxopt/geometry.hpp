#ifndef WCXOPT_GEOMETRY_HPP
#define WCXOPT_GEOMETRY_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <string>
#include <variant>

namespace wcx {

using Point = Eigen::VectorXd;

/// Diagonal metric with strictly positive entries.
class Weights {
 public:
  explicit Weights(Eigen::VectorXd v);
  static Weights ones(Eigen::Index d) { return Weights(Eigen::VectorXd::Ones(d)); }

  const Eigen::VectorXd& values() const noexcept { return v_; }
  Eigen::Index size() const noexcept { return v_.size(); }
  double operator[](Eigen::Index i) const { return v_[i]; }
  double min() const { return v_.minCoeff(); }
  double max() const { return v_.maxCoeff(); }

 private:
  Eigen::VectorXd v_;
};

/// Sentinel used in place of an infinite box bound.
inline constexpr double kUnbounded = std::numeric_limits<double>::max();

struct FreeSpace {};

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct EuclideanBall {
  Eigen::VectorXd center;
  double radius = 1.0;
};

/// {x >= 0, sum(x) = scale}
struct Simplex {
  Eigen::Index dim = 0;
  double scale = 1.0;
};

/// Closed convex feasible set. Instances are validated on construction and
/// immutable afterwards.
class ConvexSet {
 public:
  using Variant = std::variant<FreeSpace, Box, EuclideanBall, Simplex>;

  ConvexSet() = default;  // all of R^d

  static ConvexSet free_space() { return ConvexSet(); }
  /// Infinite entries are clamped to the +-kUnbounded sentinel.
  static ConvexSet box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static ConvexSet box(Eigen::Index d, double lower, double upper);
  static ConvexSet ball(Eigen::VectorXd center, double radius);
  static ConvexSet simplex(Eigen::Index d, double scale);

  const Variant& variant() const noexcept { return set_; }
  std::string kind_name() const;

  /// Dimension the set is tied to, or -1 for FreeSpace.
  Eigen::Index dim() const;
  bool is_bounded() const;
  /// Radius of the smallest origin-centred ball containing the set
  /// (infinite when unbounded).
  double enclosing_radius() const;

  bool contains(const Point& x, double tol = 1e-12) const;

  /// sup_{z in set} <q, z>; infinite for unbounded directions.
  double support(const Point& q) const;

  bool operator==(const ConvexSet& other) const;

 private:
  explicit ConvexSet(Variant v) : set_(std::move(v)) {}
  Variant set_{FreeSpace{}};
};

/// sum_i w_i x_i^2
double weighted_norm_sq(const Point& x, const Weights& w);
/// sum_i w_i x_i^2 without the positivity check, for metrics that may hit
/// zero (for instance a difference of two metrics).
double weighted_norm_sq(const Point& x, const Eigen::VectorXd& w);

/// argmin_{z in set} ||z - y||_w^2.
///
/// Ball and simplex are solved through their scalar KKT multiplier by
/// bisection; the bracket grows geometrically from [0, 1], stops once the
/// multiplier is pinned to 1e-12 (relative) and gives up after 200 halvings
/// with a NumericalError carrying the constraint residual.
Point project_weighted(const ConvexSet& set, const Weights& w, const Point& y);

/// Unweighted Euclidean projection.
Point project(const ConvexSet& set, const Point& y);

}  // namespace wcx

#endif  // WCXOPT_GEOMETRY_HPP
