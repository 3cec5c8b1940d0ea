#ifndef WCXOPT_ANALYSIS_HPP
#define WCXOPT_ANALYSIS_HPP

#include "wcxopt/geometry.hpp"
#include "wcxopt/optimizers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wcx {

struct DecompositionResidual {
  double max_abs = 0.0;
  /// Each step's residual divided by the largest term magnitude in that step.
  double max_rel = 0.0;
};

/// Rebuilds m_t = beta1 m_{t-1} + (1 - beta1) g_t from m_0 = 0, A_0 = 0 and
/// compares <A_t, g_t> with its momentum decomposition at every t.
DecompositionResidual momentum_decomposition_check(const std::vector<Point>& A,
                                                   const std::vector<Point>& g, double beta1);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  /// The right side multiplied by the missing step-size factor (alpha^2
  /// instead of 1 or alpha), which is what the telescoping argument yields.
  double rhs_step_scaled = 0.0;
  bool holds_step_scaled = false;
};

/// sum alpha_t^2 ||m_t||^2_{v_hat^{-1/2}} <= (1-beta1)/sqrt((1-beta2)(1-gamma)) d G (1 + log T).
BoundCheck lemma4_bound(double lhs, const OptimizerConfig& config, double G, Eigen::Index d,
                        std::int64_t T);

/// sum alpha_t^2/v_t ||m_t||^2 <= alpha d (1 + log(T G^2/delta + 1)).
BoundCheck adagrad_sum_bound(double lhs, double alpha, Eigen::Index d, double delta, double G,
                             std::int64_t T);

struct TheoremInputs {
  double rho = 0.0;
  double G = 0.0;
  Eigen::Index d = 0;
  double delta = 1.0;
  double alpha = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double rho_bar = 0.0;
  /// Moreau envelope at x_1 (seed average).
  double envelope_x1 = 0.0;
  double f_star = 0.0;
  /// sum_i E v_hat_{T+1,i}^{1/2}; diagonal methods only.
  double vhat_sqrt_sum = 0.0;
};

struct TheoremConstants {
  int theorem = 1;
  TheoremInputs inputs;
  double gamma = 0.0;
  double D_hat = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  /// Diagonal methods only: with the measured v_hat sum, and with the d G worst case.
  double C3 = 0.0;
  double C3_worst = 0.0;

  double bound(std::int64_t T) const;
  double bound_worst(std::int64_t T) const;
};

/// theorem = 1 (diagonal methods) requires gamma < 1 and rho_bar = 2 rho/sqrt(delta);
/// theorem = 2 (scalar AdaGrad) requires rho_bar = 2 rho.
TheoremConstants theorem_constants(int theorem, const TheoremInputs& inputs);

struct TheoremCheck {
  double measured = 0.0;
  double bound = 0.0;
  double bound_worst = 0.0;
  bool holds = false;
  int valid_seeds = 0;
  int excluded_seeds = 0;
  std::vector<std::string> warnings;
};

/// Averages the per-seed measure at x_{t*}; a missing value marks a seed whose
/// stationarity solve failed. Needs at least 20 seeds and 10 valid ones.
TheoremCheck theorem_bound_check(const std::vector<std::optional<double>>& per_seed,
                                 const TheoremConstants& constants, std::int64_t T);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};

/// Least squares on (log t, log y). Nonpositive y are dropped; with
/// `running_min` each y is replaced by the minimum over all t' <= t first.
RateFit rate_fit(std::vector<std::pair<double, double>> points, bool running_min = true);

/// Distance radius sqrt(4 d G^2 / (delta (rho_bar - rho_hat)^2)).
double lemma1_radius(Eigen::Index d, double G, double delta, double rho_bar, double rho_hat);

/// The two readings of the Euclidean distance bound used for scalar AdaGrad:
/// 4 d G^2 / (rho_bar - rho)^2 and 4 d G^2 / (rho_bar - rho).
struct EuclideanRadii {
  double squared_denominator = 0.0;
  double unsquared_denominator = 0.0;
};
EuclideanRadii euclidean_radii(Eigen::Index d, double G, double rho_bar, double rho);

}  // namespace wcx

#endif  // WCXOPT_ANALYSIS_HPP
