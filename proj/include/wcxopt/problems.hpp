#ifndef WCXOPT_PROBLEMS_HPP
#define WCXOPT_PROBLEMS_HPP

#include "wcxopt/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>

namespace wcx {

using Rng = std::mt19937_64;

enum class ProblemKind { RobustRegression, PhaseRetrieval, ConstrainedQuadratic };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

/// One realisation of the random variable: feature row and target.
struct Sample {
  Eigen::VectorXd a;
  double b = 0.0;
};

/// Finite-sum stochastic objective f(x) = (1/N) sum_s f(x; s) over a fixed
/// dataset, together with its feasible set and analytic constants.
///
/// Losses per sample:
///   RobustRegression      |<a,x> - b|
///   PhaseRetrieval        |<a,x>^2 - b|
///   ConstrainedQuadratic  (1/2)(<a,x> - b)^2
struct ProblemInstance {
  ProblemKind kind = ProblemKind::RobustRegression;
  Eigen::MatrixXd features;  // N x d, one sample per row
  Eigen::VectorXd targets;   // N
  ConvexSet set;

  /// Weak-convexity constant handed to the analysis. At least rho_min; may be
  /// declared larger (any rho' >= rho is a valid constant).
  double rho = 0.0;
  /// Smallest weak-convexity constant known to hold; used for lower models.
  double rho_min = 0.0;
  /// Bound on ||g||_inf for every per-sample subgradient on the operating region.
  double G = 0.0;
  double f_star = 0.0;
  /// Smoothness constant, ConstrainedQuadratic only.
  std::optional<double> L;
  /// Radius of the origin-centred ball G is computed over.
  double operating_radius = 0.0;
  /// Planted point the targets were generated from (empty for raw data).
  Point planted;

  Eigen::Index dim() const { return features.cols(); }
  Eigen::Index n_samples() const { return features.rows(); }
  Sample sample_at(Eigen::Index i) const { return {features.row(i).transpose(), targets[i]}; }
};

struct ProblemOptions {
  /// Overrides rho when larger than the analytic value.
  std::optional<double> rho_declared;
  /// Needed by PhaseRetrieval/ConstrainedQuadratic on unbounded sets.
  std::optional<double> operating_radius;
  double noise = 0.1;
  double planted_scale = 0.5;
};

/// Draws features uniform on [-1, 1], a feasible planted point and targets
/// with bounded uniform noise, then computes rho, G, f* (and L).
ProblemInstance make_problem(ProblemKind kind, Eigen::Index dim, Eigen::Index n_samples,
                             const ConvexSet& set, std::uint64_t seed,
                             const ProblemOptions& opts = {});

/// Builds an instance from an explicit dataset.
ProblemInstance make_problem_from_data(ProblemKind kind, Eigen::MatrixXd features,
                                       Eigen::VectorXd targets, const ConvexSet& set,
                                       const ProblemOptions& opts = {});

Eigen::Index sample_index(const ProblemInstance& problem, Rng& rng);
Sample sample(const ProblemInstance& problem, Rng& rng);

double sample_loss(const ProblemInstance& problem, const Point& x, Eigen::Index i);
/// One element of the regular subdifferential of f(.; s) at x, with
/// sign(0) := 0 at kinks.
Point stoch_subgrad(const ProblemInstance& problem, const Point& x, const Sample& s);
Point stoch_subgrad(const ProblemInstance& problem, const Point& x, Eigen::Index i);

double full_objective(const ProblemInstance& problem, const Point& x);
Point full_subgrad(const ProblemInstance& problem, const Point& x);

/// Largest eigenvalue of the averaged Gram matrix (1/N) A^T A by power
/// iteration (stops at 1e-10 relative change).
double gram_top_eigenvalue(const Eigen::MatrixXd& features);

struct WeakConvexityCheck {
  bool pass = true;
  double worst_violation = -std::numeric_limits<double>::infinity();
};

/// Samples random segments in the ball of `region_radius` and checks the
/// convexity inequality for f + (rho/2)||.||^2.
WeakConvexityCheck check_weak_convexity(const ProblemInstance& problem, double rho_claimed,
                                        int trials, double region_radius,
                                        std::uint64_t seed = 0);

}  // namespace wcx

#endif  // WCXOPT_PROBLEMS_HPP
