#include "wcxopt/errors.hpp"
#include "wcxopt/experiment.hpp"

#include <algorithm>
#include <cmath>

namespace wcx {

using nlohmann::json;

namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Eigen::VectorXd uniform_vec(Rng& rng, Eigen::Index d, double lo, double hi) {
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

Weights random_weights(Rng& rng, Eigen::Index d) {
  Eigen::VectorXd w(d);
  for (Eigen::Index i = 0; i < d; ++i) w[i] = std::exp(uniform(rng, -2.0, 2.0));
  return Weights(w);
}

std::vector<ConvexSet> sample_sets(Rng& rng, Eigen::Index d) {
  return {ConvexSet::free_space(), ConvexSet::box(uniform_vec(rng, d, -1.0, -0.2), uniform_vec(rng, d, 0.1, 0.9)),
          ConvexSet::ball(uniform_vec(rng, d, -0.5, 0.5), 0.8), ConvexSet::simplex(d, 1.5)};
}

// Minimises obj(lift(u)) over u in [lo, hi] by a pattern search on a 41-point
// grid per axis: the window shrinks around the best point, or slides when the
// best point sits on an inner window edge. Infeasible lifts are skipped.
template <class Lift>
Point grid_search(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, const Lift& lift,
                  const ConvexSet& set, const Weights& w, const Point& y) {
  constexpr int n = 41;
  const auto k = lo.size();
  Eigen::VectorXd best_u = 0.5 * (lo + hi);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd a = lo, b = hi;
  for (int iter = 0; iter < 400 && (b - a).maxCoeff() > 1e-10; ++iter) {
    std::vector<int> idx(static_cast<std::size_t>(k), 0), best_idx(idx);
    bool improved = false;
    const Eigen::VectorXd step = (b - a) / (n - 1);
    while (true) {
      Eigen::VectorXd u(k);
      for (Eigen::Index i = 0; i < k; ++i) u[i] = a[i] + step[i] * idx[static_cast<std::size_t>(i)];
      const Point z = lift(u);
      if (set.contains(z, 1e-12)) {
        const double v = weighted_norm_sq(Point(z - y), w);
        if (v < best) {
          best = v;
          best_u = u;
          best_idx = idx;
          improved = true;
        }
      }
      Eigen::Index i = 0;
      while (i < k && ++idx[static_cast<std::size_t>(i)] == n) idx[static_cast<std::size_t>(i++)] = 0;
      if (i == k) break;
    }
    bool on_edge = false;
    for (Eigen::Index i = 0; improved && i < k; ++i) {
      const int j = best_idx[static_cast<std::size_t>(i)];
      on_edge = on_edge || (j == 0 && a[i] > lo[i]) || (j == n - 1 && b[i] < hi[i]);
    }
    const Eigen::VectorXd half = on_edge ? Eigen::VectorXd(0.5 * (b - a)) : Eigen::VectorXd(6.0 * step);
    a = (best_u - half).cwiseMax(lo);
    b = (best_u + half).cwiseMin(hi);
  }
  return lift(best_u);
}

CheckResult momentum_check() {
  Rng rng(11);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (double beta1 : {0.0, 0.5, 0.9, 0.99}) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Point> A(100), g(100);
      for (int t = 0; t < 100; ++t) {
        A[t] = Point::NullaryExpr(8, [&] { return normal(rng); });
        g[t] = Point::NullaryExpr(8, [&] { return normal(rng); });
      }
      worst = std::max(worst, momentum_decomposition_check(A, g, beta1).max_rel);
    }
  }
  return {"momentum_decomposition", worst <= 1e-10, {{"max_relative_residual", worst}}};
}

std::vector<CheckResult> projection_checks() {
  Rng rng(12);
  int idem_fail = 0, nonexp_fail = 0, grid_fail = 0;
  double worst_ratio = 0.0, worst_grid = 0.0;
  for (Eigen::Index d : {2, 3, 6}) {
    for (const auto& set : sample_sets(rng, d)) {
      for (int trial = 0; trial < 500; ++trial) {
        const Weights w = random_weights(rng, d);
        const Point y1 = uniform_vec(rng, d, -3.0, 3.0), y2 = uniform_vec(rng, d, -3.0, 3.0);
        const Point p1 = project_weighted(set, w, y1), p2 = project_weighted(set, w, y2);
        if (project_weighted(set, w, p1) != p1) ++idem_fail;
        const double lhs = std::sqrt(weighted_norm_sq(Point(p1 - p2), w));
        const double rhs = std::sqrt(weighted_norm_sq(Point(y1 - y2), w));
        if (rhs > 0.0) worst_ratio = std::max(worst_ratio, lhs / rhs);
        if (lhs > rhs * (1.0 + 1e-10)) ++nonexp_fail;
      }
      if (d <= 3 && set.is_bounded()) {
        for (int trial = 0; trial < 5; ++trial) {
          const Weights w = random_weights(rng, d);
          const Point y = uniform_vec(rng, d, -2.0, 2.0);
          const double err = (grid_project(set, w, y) - project_weighted(set, w, y)).norm();
          worst_grid = std::max(worst_grid, err);
          if (err > 1e-3) ++grid_fail;
        }
      }
    }
  }
  return {{"projection_idempotence", idem_fail == 0, {{"failures", idem_fail}}},
          {"projection_nonexpansive", nonexp_fail == 0,
           {{"failures", nonexp_fail}, {"worst_ratio", worst_ratio}}},
          {"projection_grid_oracle", grid_fail == 0, {{"failures", grid_fail}, {"worst_distance", worst_grid}}}};
}

ProblemInstance data_problem(ProblemKind kind, Eigen::MatrixXd A, Eigen::VectorXd b, ConvexSet set) {
  ProblemOptions o;
  o.operating_radius = 10.0;
  return make_problem_from_data(kind, std::move(A), std::move(b), std::move(set), o);
}

CheckResult prox_check() {
  MoreauConfig cfg;
  cfg.accept_inexact = true;
  cfg.inner_max_iters = 20000;
  json details;
  double worst = 0.0;

  // f = y^2/2, rho_bar = 1, x = 1 -> 0.5
  auto quad1 = data_problem(ProblemKind::ConstrainedQuadratic, Eigen::MatrixXd::Ones(1, 1),
                            Eigen::VectorXd::Zero(1), ConvexSet::free_space());
  cfg.rho_bar = 1.0;
  double e = std::abs(prox_point(quad1, Point::Ones(1), Weights::ones(1), cfg).x_hat[0] - 0.5);
  details["quadratic_1d"] = e;
  worst = std::max(worst, e);

  // f = ||y||^2/2 with weights w, rho_bar = 2 -> 2 w x / (1 + 2 w)
  auto quad2 = data_problem(ProblemKind::ConstrainedQuadratic, std::sqrt(2.0) * Eigen::MatrixXd::Identity(2, 2),
                            Eigen::VectorXd::Zero(2), ConvexSet::free_space());
  cfg.rho_bar = 2.0;
  const Eigen::Vector2d w(0.7, 3.0), x(1.5, -0.8);
  const Point expect = (2.0 * w.array() * x.array() / (1.0 + 2.0 * w.array())).matrix();
  e = (prox_point(quad2, x, Weights(w), cfg).x_hat - expect).cwiseAbs().maxCoeff();
  details["weighted_quadratic"] = e;
  worst = std::max(worst, e);

  // f = |y|, rho_bar = 1, x = 2 -> 1
  auto absval = data_problem(ProblemKind::RobustRegression, Eigen::MatrixXd::Ones(1, 1),
                             Eigen::VectorXd::Zero(1), ConvexSet::free_space());
  cfg.rho_bar = 1.0;
  const auto rep = stationarity_report(absval, Point::Constant(1, 2.0), Weights::ones(1), cfg);
  e = std::max(std::abs(rep.x_hat[0] - 1.0), std::abs(rep.moreau_grad_sq - 1.0));
  details["soft_threshold"] = e;
  worst = std::max(worst, e);

  // f = y on [0, inf), x = 0 -> 0 (|y + 10| agrees with y + 10 there)
  auto ramp = data_problem(ProblemKind::RobustRegression, Eigen::MatrixXd::Ones(1, 1),
                           Eigen::VectorXd::Constant(1, -10.0),
                           ConvexSet::box(Eigen::VectorXd::Zero(1),
                                          Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity())));
  e = std::abs(prox_point(ramp, Point::Zero(1), Weights::ones(1), cfg).x_hat[0]);
  details["boundary_kink"] = e;
  worst = std::max(worst, e);

  details["worst"] = worst;
  return {"prox_closed_forms", worst <= 1e-6, details};
}

std::vector<CheckResult> weak_convexity_checks() {
  std::vector<CheckResult> out;
  bool all = true;
  json details;
  for (const char* name : {"robust-reg", "phase-retrieval", "quadratic-box"}) {
    const auto p = build_problem(preset(name).problem);
    const auto c = check_weak_convexity(p, p.rho_min, 300, 2.0, 5);
    details[name] = {{"rho", p.rho_min}, {"worst_violation", c.worst_violation}, {"pass", c.pass}};
    all = all && c.pass;
  }
  out.push_back({"weak_convexity", all, details});

  // The check must be able to fail: phase retrieval is not convex.
  const auto p = build_problem(preset("phase-retrieval").problem);
  const auto c = check_weak_convexity(p, 0.0, 300, 0.3, 5);
  out.push_back({"weak_convexity_sensitivity", !c.pass, {{"worst_violation_at_rho_0", c.worst_violation}}});
  return out;
}

void run_checks(const std::string& label, RunConfig cfg, const VerifyOptions& vo, bool theorem,
                std::vector<CheckResult>& out) {
  cfg.optimizer.faults = vo.faults;
  const auto problem = build_problem(cfg.problem);
  validate(cfg, problem);
  const RunConfig rc = resolve(cfg, problem);
  const auto runs = run_seeds(problem, rc, vo.workers);
  const auto& opt = rc.optimizer;
  const double delta = opt.delta, G = problem.G;
  const double rho_bar = *rc.moreau.rho_bar, tol = rc.moreau.inner_tol;

  json errors = json::array();
  int inv_fail = 0, gap_fail = 0, moment_fail = 0, triple_fail = 0, dist_fail = 0, dist_fail_alt = 0;
  double worst_gap = 0.0, worst_dist = 0.0, worst_moment_ratio = 0.0;
  double D = 0.0, D_alt = 0.0;
  if (opt.weighted()) {
    D = lemma1_radius(problem.dim(), G, delta, rho_bar, rho_hat(problem, opt));
    D_alt = D;
  } else {
    const auto radii = euclidean_radii(problem.dim(), G, rho_bar, problem.rho);
    D = radii.unsquared_denominator;
    D_alt = radii.squared_denominator;
  }

  for (const auto& run : runs) {
    if (!run.result) {
      errors.push_back("seed " + std::to_string(run.seed) + ": " + run.error);
      continue;
    }
    const auto& r = *run.result;
    const auto& dg = r.diagnostics;
    bool ok = dg.all_feasible && dg.max_grad_inf <= G * (1.0 + 1e-12);
    if (opt.weighted())
      ok = ok && dg.vhat_monotone && dg.vhat_min_seen >= delta && dg.vhat_max_seen <= std::max(delta, G * G);
    if (!ok) ++inv_fail;
    worst_gap = std::max(worst_gap, dg.max_projection_gap);
    if (!(dg.max_projection_gap <= 1e-9)) ++gap_fail;

    const BoundCheck b = opt.variant == Variant::ScalarAdaGrad
                             ? adagrad_sum_bound(r.moment_sum, opt.alpha, problem.dim(), delta, G, rc.T)
                             : lemma4_bound(r.moment_sum, opt, G, problem.dim(), rc.T);
    worst_moment_ratio = std::max(worst_moment_ratio, b.lhs / b.rhs);
    if (!b.holds) ++moment_fail;

    for (const auto& row : r.records) {
      if (!(row.phi_x_hat <= row.phi_x + 10.0 * tol * rho_bar * G) ||
          row.moreau_grad_sq != rho_bar * rho_bar * row.dist_sq_weighted)
        ++triple_fail;
      const double dist = std::sqrt(row.dist_sq);
      worst_dist = std::max(worst_dist, dist);
      if (dist > D + 10.0 * tol) ++dist_fail;
      if (dist > D_alt + 10.0 * tol) ++dist_fail_alt;
    }
  }
  const bool complete = errors.empty();
  out.push_back({label + "/runs_complete", complete, {{"errors", errors}}});
  out.push_back({label + "/step_invariants", complete && inv_fail == 0,
                 {{"failing_seeds", inv_fail}, {"vhat_upper", std::max(delta, G * G)}, {"delta", delta}}});
  out.push_back({label + "/projection_certificate", complete && gap_fail == 0,
                 {{"failing_seeds", gap_fail}, {"worst_gap", worst_gap}}});
  out.push_back({label + "/moment_bound", complete && moment_fail == 0,
                 {{"failing_seeds", moment_fail}, {"worst_lhs_over_rhs", worst_moment_ratio}}});
  out.push_back({label + "/near_stationarity_triple", complete && triple_fail == 0,
                 {{"failing_rows", triple_fail}}});
  out.push_back({label + "/distance_bound", complete && dist_fail == 0,
                 {{"failing_rows", dist_fail},
                  {"D_hat", D},
                  {"alternative_D_hat", D_alt},
                  {"failing_rows_alternative", dist_fail_alt},
                  {"max_distance", worst_dist}}});
  if (theorem) {
    CheckResult tc{label + "/theorem_bound", false, json::object()};
    try {
      const auto rep = theorem_report(problem, rc, runs);
      tc.pass = rep.check.holds;
      tc.details = {{"theorem", rep.constants.theorem},
                    {"measured", rep.check.measured},
                    {"bound", rep.check.bound},
                    {"bound_worst_case", rep.check.bound_worst},
                    {"valid_seeds", rep.check.valid_seeds},
                    {"warnings", rep.check.warnings}};
    } catch (const std::exception& e) {
      tc.details = {{"error", e.what()}};
    }
    out.push_back(tc);
  }
}

std::vector<CheckResult> equivalence_checks(const VerifyOptions& vo) {
  std::vector<CheckResult> out;
  auto final_x = [](const ProblemInstance& p, const RunConfig& c, OptimizerConfig opt) {
    RunConfig rc = resolve(c, p);
    auto o = run_options(rc, 0);
    o.stationarity = false;
    o.checkpoints.clear();
    return run(p, opt, o).final_state;
  };

  {
    RunConfig c = preset("phase-retrieval-small");
    c.T = 500;
    const auto p = build_problem(c.problem);
    OptimizerConfig a = c.optimizer, b = c.optimizer;
    a.beta1 = 0.0;
    a.faults = vo.faults;
    b.variant = Variant::RMSpropVariant;
    const auto sa = final_x(p, c, a), sb = final_x(p, c, b);
    const bool eq = sa.x == sb.x && sa.v_hat == sb.v_hat && sa.m == sb.m;
    out.push_back({"equivalence_rmsprop", eq, {{"max_abs_diff", (sa.x - sb.x).cwiseAbs().maxCoeff()}}});
  }
  {
    // delta = 1 >= G^2 keeps v_hat at exactly one, so AMSGrad steps like momentum SGD.
    RunConfig c = preset("robust-reg-small");
    const auto p = build_problem(c.problem);
    OptimizerConfig a = c.optimizer, b = c.optimizer;
    a.faults = vo.faults;
    b.variant = Variant::MomentumSGD;
    const auto sa = final_x(p, c, a), sb = final_x(p, c, b);
    out.push_back({"equivalence_momentum_sgd", sa.x == sb.x,
                   {{"G", p.G}, {"max_abs_diff", (sa.x - sb.x).cwiseAbs().maxCoeff()}}});
  }
  {
    ProblemSpec spec = preset("quadratic-box").problem;
    spec.set = ConvexSet::free_space();
    spec.operating_radius = 1.0;
    const auto p = build_problem(spec);
    Rng rng(21);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const Point x = uniform_vec(rng, p.dim(), -1.0, 1.0);
      const Eigen::VectorXd vhat = uniform_vec(rng, p.dim(), 0.1, 4.0);
      const double lam = uniform(rng, 0.05, 2.0);
      const double lhs = gradient_mapping(p, x, vhat, lam).norm();
      const Point grad = full_subgrad(p, x);
      const double rhs = std::sqrt(weighted_norm_sq(grad, Eigen::VectorXd(vhat.cwiseSqrt().cwiseInverse())));
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, rhs));
    }
    out.push_back({"gradient_mapping_unconstrained", worst <= 1e-12, {{"worst_relative", worst}}});
  }
  {
    RunConfig c = preset("quadratic-box");
    const auto p = build_problem(c.problem);
    MoreauConfig cfg = default_moreau_config(p, c.optimizer);
    cfg.accept_inexact = true;
    Rng rng(22);
    int fail = 0;
    double worst_ratio = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Point x = project(p.set, uniform_vec(rng, p.dim(), -0.6, 0.6));
      const Eigen::VectorXd vhat = uniform_vec(rng, p.dim(), c.optimizer.delta, std::max(c.optimizer.delta, p.G * p.G));
      const auto cmp = compare_mapping_vs_moreau(p, x, vhat, cfg);
      if (!cmp.holds) ++fail;
      if (cmp.constant > 0.0) worst_ratio = std::max(worst_ratio, cmp.ratio / cmp.constant);
    }
    out.push_back({"mapping_vs_moreau", fail == 0, {{"failures", fail}, {"worst_ratio_over_constant", worst_ratio}}});
  }
  return out;
}

CheckResult gamma_guard() {
  RunConfig c = preset("robust-reg-small");
  c.optimizer.beta2 = 0.5;  // gamma = 0.81 / 0.5 > 1
  try {
    validate(c, build_problem(c.problem));
  } catch (const ArgumentError& e) {
    return {"gamma_guard", true, {{"message", e.what()}}};
  }
  return {"gamma_guard", false, {{"message", "configuration with gamma >= 1 was accepted"}}};
}

}  // namespace

// Brute-force weighted projection in 2-D/3-D. Boxes are gridded directly,
// simplices through their first d-1 coordinates and balls through the angles
// of their boundary sphere (a point outside projects onto the sphere). The
// angle ranges overlap past the seam and the poles so no minimiser sits on
// the edge of the search box.
Point grid_project(const ConvexSet& set, const Weights& w, const Point& y) {
  const auto d = y.size();
  if (set.contains(y, 0.0)) return y;
  if (const auto* box = std::get_if<Box>(&set.variant()))
    return grid_search(box->lower, box->upper, [](const Eigen::VectorXd& u) { return Point(u); }, set, w, y);
  if (const auto* sx = std::get_if<Simplex>(&set.variant())) {
    auto lift = [&](const Eigen::VectorXd& u) {
      Point z(d);
      z.head(d - 1) = u;
      z[d - 1] = sx->scale - u.sum();
      return z;
    };
    return grid_search(Eigen::VectorXd::Zero(d - 1), Eigen::VectorXd::Constant(d - 1, sx->scale), lift, set, w, y);
  }
  if (const auto* ball = std::get_if<EuclideanBall>(&set.variant())) {
    // Shrink slightly so rounding never pushes a sphere point outside.
    const double r = ball->radius * (1.0 - 1e-14);
    if (d == 2) {
      auto lift = [&](const Eigen::VectorXd& u) {
        return Point(ball->center + r * Eigen::Vector2d(std::cos(u[0]), std::sin(u[0])));
      };
      return grid_search(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 2.0 * M_PI + 1.0), lift, set, w,
                         y);
    }
    if (d == 3) {
      auto lift = [&](const Eigen::VectorXd& u) {
        return Point(ball->center + r * Eigen::Vector3d(std::sin(u[1]) * std::cos(u[0]),
                                                        std::sin(u[1]) * std::sin(u[0]), std::cos(u[1])));
      };
      return grid_search(Eigen::Vector2d(-1.0, -1.0), Eigen::Vector2d(2.0 * M_PI + 1.0, M_PI + 1.0), lift, set, w, y);
    }
  }
  throw ArgumentError("grid oracle supports bounded sets in two or three dimensions");
}

std::vector<CheckResult> verify_suite(const VerifyOptions& options) {
  std::vector<CheckResult> out;
  out.push_back(momentum_check());
  for (auto& c : projection_checks()) out.push_back(std::move(c));
  out.push_back(prox_check());
  for (auto& c : weak_convexity_checks()) out.push_back(std::move(c));
  out.push_back(gamma_guard());

  RunConfig small = preset("robust-reg-small");
  small.seeds.resize(20);
  for (std::size_t i = 0; i < small.seeds.size(); ++i) small.seeds[i] = i;
  run_checks("robust-reg-small", small, options, true, out);

  RunConfig phase = preset("phase-retrieval-small");
  run_checks("phase-retrieval-small", phase, options, true, out);

  RunConfig ada = small;
  ada.name = "adagrad-small";
  ada.optimizer.variant = Variant::ScalarAdaGrad;
  run_checks("adagrad-small", ada, options, true, out);

  for (auto& c : equivalence_checks(options)) out.push_back(std::move(c));
  return out;
}

}  // namespace wcx
