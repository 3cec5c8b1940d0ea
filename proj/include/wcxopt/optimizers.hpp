#ifndef WCXOPT_OPTIMIZERS_HPP
#define WCXOPT_OPTIMIZERS_HPP

#include "wcxopt/geometry.hpp"

#include <cstdint>
#include <string>

namespace wcx {

enum class Variant { AMSGrad, RMSpropVariant, MomentumSGD, ScalarAdaGrad };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

/// Test hooks that break the update on purpose so the verification suite can
/// show it notices. Never set outside mutation tests.
struct StepFaults {
  bool skip_vhat_max = false;          // v_hat <- v instead of max(v_hat, v)
  bool unweighted_projection = false;  // Euclidean instead of v_hat^{1/2} projection

  bool any() const { return skip_vhat_max || unweighted_projection; }
  bool operator==(const StepFaults&) const = default;
};

struct OptimizerConfig {
  Variant variant = Variant::AMSGrad;
  double alpha = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double delta = 1e-8;
  StepFaults faults;

  /// beta1^2 / beta2 (0 when beta1 = 0).
  double gamma() const;
  /// Throws ArgumentError unless alpha > 0, beta1, beta2 in [0, 1),
  /// delta in (0, 1] and gamma < 1 where it matters.
  void validate() const;
  /// Copy with the variant's forced/ignored parameters normalised
  /// (RMSpropVariant: beta1 = 0).
  OptimizerConfig resolved() const;
  /// The diagonal variants (AMSGrad, RMSpropVariant) step in the v_hat metric.
  bool weighted() const {
    return variant == Variant::AMSGrad || variant == Variant::RMSpropVariant;
  }

  bool operator==(const OptimizerConfig&) const = default;
};

/// Recurrence state of one run. `t` counts completed steps; after step t the
/// vectors hold m_t, v_t, v_hat_t and x holds x_{t+1}.
struct MomentState {
  std::int64_t t = 0;
  Point x;
  Eigen::VectorXd m;
  Eigen::VectorXd v;      // size 1 (the scalar v_t) for ScalarAdaGrad
  Eigen::VectorXd v_hat;  // all ones for MomentumSGD and ScalarAdaGrad
  double grad_sq_sum = 0.0;  // sum_j ||g_j||^2, ScalarAdaGrad only
  /// Running sum of alpha_t^2 ||m_t||^2_{v_hat_t^{-1/2}} (or alpha_t^2/v_t ||m_t||^2
  /// for ScalarAdaGrad).
  double moment_sum = 0.0;
};

/// m_0 = v_0 = 0, v_hat_0 = delta * 1 (ones for the unweighted variants).
/// x1 must be feasible.
MomentState initial_state(const OptimizerConfig& config, const ConvexSet& set, const Point& x1);

/// alpha / sqrt(t), t >= 1.
double step_size(const OptimizerConfig& config, std::int64_t t);

/// Performs step t+1 of the configured method with subgradient g at state.x.
MomentState step(MomentState state, const Point& g, const OptimizerConfig& config,
                 const ConvexSet& set);

}  // namespace wcx

#endif  // WCXOPT_OPTIMIZERS_HPP
