#include "wcxopt/optimizers.hpp"

#include "wcxopt/errors.hpp"

#include <cmath>

namespace wcx {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::AMSGrad: return "amsgrad";
    case Variant::RMSpropVariant: return "rmsprop";
    case Variant::MomentumSGD: return "momentum_sgd";
    case Variant::ScalarAdaGrad: return "scalar_adagrad";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name) {
  if (name == "amsgrad") return Variant::AMSGrad;
  if (name == "rmsprop") return Variant::RMSpropVariant;
  if (name == "momentum_sgd") return Variant::MomentumSGD;
  if (name == "scalar_adagrad") return Variant::ScalarAdaGrad;
  throw ArgumentError("unknown optimizer '" + name + "'");
}

double OptimizerConfig::gamma() const {
  if (beta1 == 0.0) return 0.0;
  if (beta2 == 0.0) return std::numeric_limits<double>::infinity();
  return beta1 * beta1 / beta2;
}

void OptimizerConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ArgumentError("alpha must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ArgumentError("beta1 must lie in [0, 1)");
  if (variant == Variant::MomentumSGD) return;
  if (!(delta > 0.0 && delta <= 1.0)) throw ArgumentError("delta must lie in (0, 1]");
  if (variant == Variant::ScalarAdaGrad) return;
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ArgumentError("beta2 must lie in [0, 1)");
  if (!(resolved().gamma() < 1.0))
    throw ArgumentError("gamma = beta1^2/beta2 = " + std::to_string(gamma()) + " must be < 1");
}

OptimizerConfig OptimizerConfig::resolved() const {
  OptimizerConfig c = *this;
  if (c.variant == Variant::RMSpropVariant) c.beta1 = 0.0;
  return c;
}

double step_size(const OptimizerConfig& config, std::int64_t t) {
  return config.alpha / std::sqrt(static_cast<double>(t));
}

MomentState initial_state(const OptimizerConfig& config, const ConvexSet& set, const Point& x1) {
  config.validate();
  if (set.dim() >= 0 && set.dim() != x1.size()) throw ArgumentError("x1 dimension mismatch");
  if (!set.contains(x1)) throw ArgumentError("x1 must be feasible");
  const auto d = x1.size();
  MomentState s;
  s.x = x1;
  s.m = Eigen::VectorXd::Zero(d);
  if (config.variant == Variant::ScalarAdaGrad) {
    s.v = Eigen::VectorXd::Zero(1);
  } else {
    s.v = Eigen::VectorXd::Zero(d);
  }
  s.v_hat = config.weighted() ? Eigen::VectorXd::Constant(d, config.delta)
                              : Eigen::VectorXd::Ones(d);
  return s;
}

MomentState step(MomentState s, const Point& g, const OptimizerConfig& config,
                 const ConvexSet& set) {
  if (g.size() != s.x.size())
    throw ArgumentError("gradient has dimension " + std::to_string(g.size()) + ", iterate has " +
                        std::to_string(s.x.size()));
  if (!g.allFinite()) throw NumericalError("non-finite subgradient at step " + std::to_string(s.t + 1));

  const std::int64_t t = s.t + 1;
  const double alpha_t = step_size(config, t);
  const double b1 = config.variant == Variant::RMSpropVariant ? 0.0 : config.beta1;
  s.m = b1 * s.m + (1.0 - b1) * g;

  switch (config.variant) {
    case Variant::AMSGrad:
    case Variant::RMSpropVariant: {
      s.v = config.beta2 * s.v + (1.0 - config.beta2) * g.cwiseAbs2();
      s.v_hat = config.faults.skip_vhat_max ? s.v : s.v_hat.cwiseMax(s.v);
      const Eigen::VectorXd root = s.v_hat.cwiseSqrt();
      const Point y = s.x - alpha_t * s.m.cwiseQuotient(root);
      if (config.faults.unweighted_projection) {
        s.x = project(set, y);
      } else {
        s.x = project_weighted(set, Weights(root), y);
      }
      s.moment_sum += alpha_t * alpha_t * s.m.cwiseAbs2().cwiseQuotient(root).sum();
      break;
    }
    case Variant::MomentumSGD: {
      s.x = project(set, s.x - alpha_t * s.m);
      s.moment_sum += alpha_t * alpha_t * s.m.squaredNorm();
      break;
    }
    case Variant::ScalarAdaGrad: {
      const double d = static_cast<double>(g.size());
      s.grad_sq_sum += g.squaredNorm();
      s.v[0] = (config.delta + s.grad_sq_sum / d) / static_cast<double>(t);
      s.x = project(set, s.x - (alpha_t / std::sqrt(s.v[0])) * s.m);
      s.moment_sum += alpha_t * alpha_t / s.v[0] * s.m.squaredNorm();
      break;
    }
  }
  s.t = t;
  return s;
}

}  // namespace wcx
