#include "wcxopt/moreau.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace wcx {

namespace {

constexpr int kDualIters = 300;

struct Evaluation {
  double value;
  Point subgrad;
};

// f and one subgradient from a single pass over the dataset.
Evaluation evaluate(const ProblemInstance& p, const Point& y) {
  const Eigen::VectorXd r = p.features * y;
  const auto n = p.n_samples();
  Eigen::VectorXd coef(n);
  double total = 0.0;
  for (Eigen::Index s = 0; s < n; ++s) {
    const double b = p.targets[s];
    switch (p.kind) {
      case ProblemKind::RobustRegression: {
        const double e = r[s] - b;
        total += std::abs(e);
        coef[s] = e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0);
        break;
      }
      case ProblemKind::PhaseRetrieval: {
        const double e = r[s] * r[s] - b;
        total += std::abs(e);
        coef[s] = (e > 0.0 ? 2.0 : (e < 0.0 ? -2.0 : 0.0)) * r[s];
        break;
      }
      case ProblemKind::ConstrainedQuadratic: {
        const double e = r[s] - b;
        total += 0.5 * e * e;
        coef[s] = e;
        break;
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  return {total * inv_n, p.features.transpose() * coef * inv_n};
}

}  // namespace

double rho_hat(const ProblemInstance& problem, const OptimizerConfig& config) {
  return config.weighted() ? problem.rho / std::sqrt(config.delta) : problem.rho;
}

MoreauConfig default_moreau_config(const ProblemInstance& problem, const OptimizerConfig& config) {
  MoreauConfig cfg;
  cfg.rho_bar = 2.0 * rho_hat(problem, config);
  return cfg;
}

ProxResult prox_point(const ProblemInstance& p, const Point& x, const Weights& w,
                      const MoreauConfig& cfg, const std::optional<Point>& warm_start) {
  const auto d = p.dim();
  if (x.size() != d || w.size() != d) throw ArgumentError("prox: dimension mismatch");
  if (cfg.inner_max_iters < 1 || cfg.inner_restarts < 0 || !(cfg.inner_tol > 0.0))
    throw ArgumentError("prox: invalid inner solver settings");
  const double mu = cfg.rho_bar * w.min() - p.rho_min;
  if (!(cfg.rho_bar > 0.0) || !(mu > 0.0))
    throw ArgumentError("prox: rho_bar * min(w) must exceed the weak-convexity constant");

  const auto& wv = w.values();
  const Eigen::VectorXd h = cfg.rho_bar * wv.array() - p.rho_min;
  const Weights h_metric(h);
  const double h_min = h.minCoeff();

  auto F = [&](const Point& y, double fy) {
    return fy + 0.5 * cfg.rho_bar * weighted_norm_sq(Point(y - x), wv);
  };

  // Lower models have the form c + <l, y> - (rho_min/2)||y||^2 + (rho_bar/2)||y - x||_w^2
  // = c + <q, y> + (1/2)||y||_h^2 + (rho_bar/2)||x||_w^2 with q = l - rho_bar w x.
  struct ModelMin {
    double value;
    Point y;
  };
  const double x_term = 0.5 * cfg.rho_bar * weighted_norm_sq(x, wv);
  auto model_min = [&](double c, const Point& l) {
    const Point q = l - cfg.rho_bar * wv.cwiseProduct(x);
    Point ym = project_weighted(p.set, h_metric, Point(-q.cwiseQuotient(h)));
    const double v = c + q.dot(ym) + 0.5 * weighted_norm_sq(ym, h) + x_term;
    return ModelMin{v, std::move(ym)};
  };

  // Per-sample model at a point z. Each residual e_s = <a_s, y> - b_s (or
  // <a_s, y>^2 - b_s) enters as u_s (e_s(z) + k_s <a_s, y - z>) with u_s in
  // [-1, 1]; |e| >= u e and convexity of +-e + (rho_min/2)||.||^2 make every
  // such u a lower bound. u is chosen by projected accelerated ascent on the
  // concave model minimum, starting from the signs at z.
  auto dual_model = [&](const Point& z) {
    const Eigen::VectorXd r = p.features * z;
    const auto n = p.n_samples();
    const double inv_n = 1.0 / static_cast<double>(n);
    Eigen::VectorXd e(n), kappa(n);
    for (Eigen::Index s = 0; s < n; ++s) {
      switch (p.kind) {
        case ProblemKind::RobustRegression: e[s] = r[s] - p.targets[s]; kappa[s] = 1.0; break;
        case ProblemKind::PhaseRetrieval: e[s] = r[s] * r[s] - p.targets[s]; kappa[s] = 2.0 * r[s]; break;
        case ProblemKind::ConstrainedQuadratic: e[s] = r[s] - p.targets[s]; kappa[s] = 1.0; break;
      }
    }
    const double z_sq = z.squaredNorm();
    auto evaluate_u = [&](const Eigen::VectorXd& u) {
      const Eigen::VectorXd coef = u.cwiseProduct(kappa) * inv_n;
      const Point grad = p.features.transpose() * coef;
      const double c = inv_n * u.dot(e) - grad.dot(z) - 0.5 * p.rho_min * z_sq;
      return model_min(c, grad + p.rho_min * z);
    };
    if (p.kind == ProblemKind::ConstrainedQuadratic) {
      // Smooth: the tangent model of (1/2) e^2 at z.
      const Point grad = p.features.transpose() * e * inv_n;
      return model_min(0.5 * inv_n * e.squaredNorm() - grad.dot(z), grad);
    }

    // Step 1/L with L the largest eigenvalue of H^{-1/2} J^T J H^{-1/2}, J = diag(kappa/N) A.
    const Eigen::MatrixXd J = (kappa * inv_n).asDiagonal() * p.features;
    const Eigen::VectorXd hs = h.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd S = hs.asDiagonal() * (J.transpose() * J) * hs.asDiagonal();
    const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();

    Eigen::VectorXd u = e.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    ModelMin best_model = evaluate_u(u);
    if (!(L > 0.0)) return best_model;
    Eigen::VectorXd u_prev = u, v = u;
    double tk = 1.0;
    for (int it = 0; it < kDualIters; ++it) {
      const ModelMin m = evaluate_u(v);
      if (m.value > best_model.value) best_model = m;
      const Eigen::VectorXd grad_u = inv_n * e + J * (m.y - z);
      u_prev = u;
      u = (v + grad_u / L).cwiseMax(-1.0).cwiseMin(1.0);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      v = u + ((tk - 1.0) / t_next) * (u - u_prev);
      tk = t_next;
    }
    const ModelMin last = evaluate_u(u);
    return last.value > best_model.value ? last : best_model;
  };

  // x itself is feasible in every caller; keeping it as a candidate makes
  // phi(x_hat) <= phi(x) hold exactly.
  ProxResult out;
  Point best = x;
  double F_best = p.set.contains(x) ? F(x, full_objective(p, x))
                                     : std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();

  Point y = project(p.set, warm_start ? *warm_start : x);
  std::int64_t k = 0;
  for (int round = 0; round <= cfg.inner_restarts; ++round) {
    double weight_sum = 0.0;
    Point y_acc = Point::Zero(d), g_acc = Point::Zero(d);
    double const_acc = 0.0;
    for (int j = 0; j < cfg.inner_max_iters; ++j) {
      ++k;
      const auto ev = evaluate(p, y);
      const double lam = static_cast<double>(k);
      weight_sum += lam;
      y_acc += lam * y;
      g_acc += lam * ev.subgrad;
      const_acc += lam * (ev.value - ev.subgrad.dot(y) - 0.5 * p.rho_min * y.squaredNorm());

      const Point s = ev.subgrad + cfg.rho_bar * wv.cwiseProduct(y - x);
      const double eta = 2.0 / (mu * static_cast<double>(k + 1));
      y = project(p.set, y - eta * s);
    }
    out.iterations = static_cast<int>(k);

    const Point y_bar = y_acc / weight_sum;
    const double F_bar = F(y_bar, full_objective(p, y_bar));
    if (F_bar < F_best) {
      F_best = F_bar;
      best = y_bar;
    }

    const Point g_bar = g_acc / weight_sum;
    lower = std::max(lower, model_min(const_acc / weight_sum, g_bar + p.rho_min * y_bar).value);

    const auto dual = dual_model(best);
    lower = std::max(lower, dual.value);
    const double F_dual = F(dual.y, full_objective(p, dual.y));
    if (F_dual < F_best) {
      F_best = F_dual;
      best = dual.y;
    }

    out.residual = std::sqrt(2.0 * std::max(0.0, F_best - lower) / h_min);
    if (out.residual <= cfg.inner_tol) {
      out.converged = true;
      break;
    }
    y = best;
  }
  out.x_hat = best;
  if (!out.converged && !cfg.accept_inexact)
    throw ProxError("prox: certified accuracy " + std::to_string(out.residual) +
                        " above tolerance " + std::to_string(cfg.inner_tol),
                    out);
  return out;
}

Point moreau_grad(const Point& x, const Point& x_hat, const Weights& w, double rho_bar) {
  if (x.size() != x_hat.size() || x.size() != w.size())
    throw ArgumentError("moreau_grad: dimension mismatch");
  return rho_bar * w.values().cwiseProduct(x - x_hat);
}

StationarityReport stationarity_report(const ProblemInstance& problem, const Point& x,
                                       const Weights& w, const MoreauConfig& cfg,
                                       const std::optional<Point>& warm_start) {
  auto prox = prox_point(problem, x, w, cfg, warm_start);
  StationarityReport r;
  const Point diff = x - prox.x_hat;
  r.dist_sq = diff.squaredNorm();
  r.dist_sq_weighted = weighted_norm_sq(diff, w);
  r.moreau_grad_sq = cfg.rho_bar * cfg.rho_bar * r.dist_sq_weighted;
  r.subdiff_dist_sq_bound = problem.G * r.moreau_grad_sq;
  r.phi_x = problem.set.contains(x) ? full_objective(problem, x)
                                    : std::numeric_limits<double>::infinity();
  r.phi_x_hat = full_objective(problem, prox.x_hat);
  r.envelope = r.phi_x_hat + 0.5 * cfg.rho_bar * r.dist_sq_weighted;
  r.inner_residual = prox.residual;
  r.inner_converged = prox.converged;
  r.inner_iterations = prox.iterations;
  r.x_hat = std::move(prox.x_hat);
  return r;
}

Point gradient_mapping(const ProblemInstance& problem, const Point& x,
                       const Eigen::VectorXd& v_hat, double lambda) {
  if (problem.kind != ProblemKind::ConstrainedQuadratic)
    throw ArgumentError("gradient mapping needs a differentiable objective");
  if (!(lambda > 0.0)) throw ArgumentError("gradient mapping: lambda must be positive");
  if (x.size() != problem.dim() || v_hat.size() != problem.dim())
    throw ArgumentError("gradient mapping: dimension mismatch");
  const Eigen::VectorXd root = v_hat.cwiseSqrt();
  const Point grad = full_subgrad(problem, x);
  const Point moved = project_weighted(problem.set, Weights(root), x - lambda * grad.cwiseQuotient(root));
  return root.cwiseSqrt().cwiseProduct(x - moved) / lambda;
}

MappingComparison compare_mapping_vs_moreau(const ProblemInstance& problem, const Point& x,
                                            const Eigen::VectorXd& v_hat,
                                            const MoreauConfig& cfg) {
  if (!problem.L) throw ArgumentError("mapping comparison needs a smoothness constant");
  const Weights w(v_hat.cwiseSqrt());
  const auto prox = prox_point(problem, x, w, cfg);
  const Point z = moreau_grad(x, prox.x_hat, w, cfg.rho_bar);

  MappingComparison out;
  out.mapping_norm = gradient_mapping(problem, x, v_hat, 1.0 / cfg.rho_bar).norm();
  out.moreau_grad_norm = std::sqrt(weighted_norm_sq(z, Eigen::VectorXd(w.values().cwiseInverse())));
  out.constant = 1.0 + (*problem.L / w.min()) / cfg.rho_bar;
  out.ratio = out.moreau_grad_norm > 0.0 ? out.mapping_norm / out.moreau_grad_norm : 0.0;
  // ||grad phi||_{w^{-1}} moves by at most rho_bar sqrt(max w) per unit error in x_hat.
  out.slack = 1e-12 + out.constant * cfg.rho_bar * std::sqrt(w.max()) * prox.residual;
  out.holds = out.mapping_norm <= out.constant * out.moreau_grad_norm + out.slack;
  return out;
}

}  // namespace wcx
