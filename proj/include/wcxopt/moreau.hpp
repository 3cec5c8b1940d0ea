#ifndef WCXOPT_MOREAU_HPP
#define WCXOPT_MOREAU_HPP

#include "wcxopt/errors.hpp"
#include "wcxopt/geometry.hpp"
#include "wcxopt/optimizers.hpp"
#include "wcxopt/problems.hpp"

#include <optional>

namespace wcx {

struct MoreauConfig {
  double rho_bar = 1.0;
  int inner_max_iters = 5000;
  double inner_tol = 1e-6;
  int inner_restarts = 3;
  /// Return the best point instead of throwing when the certified accuracy
  /// stays above inner_tol.
  bool accept_inexact = false;

  bool operator==(const MoreauConfig&) const = default;
};

/// rho / sqrt(delta) for the diagonal methods, rho otherwise.
double rho_hat(const ProblemInstance& problem, const OptimizerConfig& config);

/// rho_bar = 2 * rho_hat; other fields at their defaults.
MoreauConfig default_moreau_config(const ProblemInstance& problem, const OptimizerConfig& config);

struct ProxResult {
  Point x_hat;
  /// Certified bound on ||x_hat - exact prox point||.
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Thrown when the prox solve misses inner_tol and inexact results are not
/// accepted.
class ProxError : public NumericalError {
 public:
  ProxError(const std::string& what, ProxResult best)
      : NumericalError(what, best.residual), best_(std::move(best)) {}
  const ProxResult& best() const noexcept { return best_; }

 private:
  ProxResult best_;
};

/// argmin_{y in X} f(y) + (rho_bar/2) ||y - x||_w^2 with w = v_hat^{1/2}.
///
/// Projected subgradient on the exact finite-sum objective with steps
/// 2/(mu (k+1)) and k-weighted iterate averaging, mu = rho_bar min(w) - rho_min.
/// Each restart opens a fresh averaging window. The residual comes from the
/// averaged linearisation lower model: the objective is 1-strongly convex in
/// the (rho_bar w - rho_min) metric, so the primal-dual gap bounds the distance
/// to the true prox point.
ProxResult prox_point(const ProblemInstance& problem, const Point& x, const Weights& w,
                      const MoreauConfig& cfg, const std::optional<Point>& warm_start = {});

/// rho_bar * w * (x - x_hat), elementwise.
Point moreau_grad(const Point& x, const Point& x_hat, const Weights& w, double rho_bar);

struct StationarityReport {
  Point x_hat;
  double dist_sq = 0.0;           // ||x - x_hat||^2
  double dist_sq_weighted = 0.0;  // ||x - x_hat||^2_w
  double moreau_grad_sq = 0.0;    // ||grad phi||^2_{w^{-1}} = rho_bar^2 dist_sq_weighted
  double subdiff_dist_sq_bound = 0.0;  // G * moreau_grad_sq
  double phi_x = 0.0;
  double phi_x_hat = 0.0;
  double envelope = 0.0;  // phi(x_hat) + (rho_bar/2) dist_sq_weighted
  double inner_residual = 0.0;
  bool inner_converged = false;
  int inner_iterations = 0;
};

StationarityReport stationarity_report(const ProblemInstance& problem, const Point& x,
                                       const Weights& w, const MoreauConfig& cfg,
                                       const std::optional<Point>& warm_start = {});

/// (v_hat^{1/4}/lambda) (x - P^{v_hat^{1/2}}(x - lambda v_hat^{-1/2} grad f(x))).
/// Takes the raw v_hat. Smooth problems only.
Point gradient_mapping(const ProblemInstance& problem, const Point& x,
                       const Eigen::VectorXd& v_hat, double lambda);

struct MappingComparison {
  double mapping_norm = 0.0;     // ||G_{1/rho_bar}(x)||
  double moreau_grad_norm = 0.0; // ||grad phi(x)||_{v_hat^{-1/2}}
  double constant = 0.0;         // 1 + L_hat / rho_bar
  double ratio = 0.0;            // mapping_norm / moreau_grad_norm (0 when both vanish)
  double slack = 0.0;            // allowance for the inexact prox solve
  bool holds = false;
};

/// Checks ||G_{1/rho_bar}(x)|| <= (1 + L_hat/rho_bar) ||grad phi(x)||_{v_hat^{-1/2}}
/// with L_hat = L / min(v_hat^{1/2}).
MappingComparison compare_mapping_vs_moreau(const ProblemInstance& problem, const Point& x,
                                            const Eigen::VectorXd& v_hat,
                                            const MoreauConfig& cfg);

}  // namespace wcx

#endif  // WCXOPT_MOREAU_HPP
