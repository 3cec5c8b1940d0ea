#include "wcxopt/problems.hpp"

#include "wcxopt/errors.hpp"

#include <cassert>
#include <cmath>

namespace wcx {

namespace {

double sign0(double r) { return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0); }

double operating_radius_for(ProblemKind kind, const ConvexSet& set, const ProblemOptions& opts) {
  if (opts.operating_radius) {
    if (!(*opts.operating_radius > 0.0)) throw ArgumentError("operating radius must be positive");
    return *opts.operating_radius;
  }
  const double r = set.enclosing_radius();
  if (std::isfinite(r)) return r;
  if (kind == ProblemKind::RobustRegression) return r;  // G does not depend on the region
  throw ArgumentError(to_string(kind) +
                      " on an unbounded set needs an explicit operating radius");
}

void check_point(const ProblemInstance& p, const Point& x) {
  if (x.size() != p.dim())
    throw ArgumentError("point has dimension " + std::to_string(x.size()) + ", problem has " +
                        std::to_string(p.dim()));
}

}  // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::RobustRegression: return "robust_regression";
    case ProblemKind::PhaseRetrieval: return "phase_retrieval";
    case ProblemKind::ConstrainedQuadratic: return "constrained_quadratic";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "robust_regression") return ProblemKind::RobustRegression;
  if (name == "phase_retrieval") return ProblemKind::PhaseRetrieval;
  if (name == "constrained_quadratic") return ProblemKind::ConstrainedQuadratic;
  throw ArgumentError("unknown problem kind '" + name + "'");
}

double gram_top_eigenvalue(const Eigen::MatrixXd& features) {
  const auto n = static_cast<double>(features.rows());
  const Eigen::MatrixXd gram = features.transpose() * features / n;
  const auto d = gram.rows();
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i) / static_cast<double>(d);
  v.normalize();
  double lambda = v.dot(gram * v);
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd w = gram * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    const double next = v.dot(gram * v);
    if (std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next))) return next;
    lambda = next;
  }
  return lambda;
}

ProblemInstance make_problem_from_data(ProblemKind kind, Eigen::MatrixXd features,
                                       Eigen::VectorXd targets, const ConvexSet& set,
                                       const ProblemOptions& opts) {
  if (features.rows() < 1 || features.cols() < 1) throw ArgumentError("dataset must be nonempty");
  if (targets.size() != features.rows()) throw ArgumentError("one target per sample required");
  if (set.dim() >= 0 && set.dim() != features.cols())
    throw ArgumentError("set dimension does not match the features");
  if (!features.allFinite() || !targets.allFinite()) throw ArgumentError("dataset must be finite");

  ProblemInstance p;
  p.kind = kind;
  p.features = std::move(features);
  p.targets = std::move(targets);
  p.set = set;
  p.operating_radius = operating_radius_for(kind, set, opts);
  p.f_star = 0.0;  // every loss is nonnegative

  const double R = p.operating_radius;
  double G = 0.0;
  switch (kind) {
    case ProblemKind::RobustRegression:
      p.rho_min = 0.0;
      for (Eigen::Index s = 0; s < p.n_samples(); ++s)
        G = std::max(G, p.features.row(s).cwiseAbs().maxCoeff());
      break;
    case ProblemKind::PhaseRetrieval:
      // -(<a,x>^2 - b) has Hessian -2 a a^T, so each sample is 2||a||^2-weakly convex.
      p.rho_min = 0.0;
      for (Eigen::Index s = 0; s < p.n_samples(); ++s) {
        const auto a = p.features.row(s);
        p.rho_min = std::max(p.rho_min, 2.0 * a.squaredNorm());
        G = std::max(G, 2.0 * a.norm() * R * a.cwiseAbs().maxCoeff());
      }
      break;
    case ProblemKind::ConstrainedQuadratic:
      p.rho_min = 0.0;  // convex
      p.L = gram_top_eigenvalue(p.features);
      for (Eigen::Index s = 0; s < p.n_samples(); ++s) {
        const auto a = p.features.row(s);
        G = std::max(G, a.cwiseAbs().maxCoeff() * (a.norm() * R + std::abs(p.targets[s])));
      }
      break;
  }
  p.G = G;
  p.rho = kind == ProblemKind::ConstrainedQuadratic ? *p.L : p.rho_min;
  if (opts.rho_declared) {
    if (*opts.rho_declared < p.rho)
      throw ArgumentError("declared rho is below the analytic weak-convexity constant");
    p.rho = *opts.rho_declared;
  }
  return p;
}

ProblemInstance make_problem(ProblemKind kind, Eigen::Index dim, Eigen::Index n_samples,
                             const ConvexSet& set, std::uint64_t seed, const ProblemOptions& opts) {
  if (dim < 1) throw ArgumentError("dimension must be positive");
  if (n_samples < 1) throw ArgumentError("sample count must be positive");
  if (set.dim() >= 0 && set.dim() != dim) throw ArgumentError("set dimension does not match");
  if (!(opts.noise >= 0.0)) throw ArgumentError("noise level must be nonnegative");

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> noise(-opts.noise, opts.noise);

  Point planted(dim);
  for (auto& v : planted) v = opts.planted_scale * unit(rng);
  planted = project(set, planted);

  Eigen::MatrixXd A(n_samples, dim);
  Eigen::VectorXd b(n_samples);
  for (Eigen::Index s = 0; s < n_samples; ++s) {
    for (Eigen::Index j = 0; j < dim; ++j) A(s, j) = unit(rng);
    const double r = A.row(s).dot(planted);
    b[s] = (kind == ProblemKind::PhaseRetrieval ? r * r : r) + noise(rng);
  }
  auto p = make_problem_from_data(kind, std::move(A), std::move(b), set, opts);
  p.planted = std::move(planted);
  return p;
}

Eigen::Index sample_index(const ProblemInstance& problem, Rng& rng) {
  std::uniform_int_distribution<Eigen::Index> pick(0, problem.n_samples() - 1);
  return pick(rng);
}

Sample sample(const ProblemInstance& problem, Rng& rng) {
  return problem.sample_at(sample_index(problem, rng));
}

double sample_loss(const ProblemInstance& p, const Point& x, Eigen::Index i) {
  const double r = p.features.row(i).dot(x);
  switch (p.kind) {
    case ProblemKind::RobustRegression: return std::abs(r - p.targets[i]);
    case ProblemKind::PhaseRetrieval: return std::abs(r * r - p.targets[i]);
    case ProblemKind::ConstrainedQuadratic: return 0.5 * (r - p.targets[i]) * (r - p.targets[i]);
  }
  return 0.0;
}

namespace {

double subgrad_coefficient(ProblemKind kind, double r, double b) {
  switch (kind) {
    case ProblemKind::RobustRegression: return sign0(r - b);
    case ProblemKind::PhaseRetrieval: return sign0(r * r - b) * 2.0 * r;
    case ProblemKind::ConstrainedQuadratic: return r - b;
  }
  return 0.0;
}

}  // namespace

Point stoch_subgrad(const ProblemInstance& p, const Point& x, const Sample& s) {
  check_point(p, x);
  if (s.a.size() != p.dim()) throw ArgumentError("sample dimension mismatch");
  Point g = subgrad_coefficient(p.kind, s.a.dot(x), s.b) * s.a;
  assert(g.cwiseAbs().maxCoeff() <= p.G * (1.0 + 1e-12) || !p.set.contains(x));
  return g;
}

Point stoch_subgrad(const ProblemInstance& p, const Point& x, Eigen::Index i) {
  check_point(p, x);
  const auto a = p.features.row(i);
  Point g = subgrad_coefficient(p.kind, a.dot(x), p.targets[i]) * a.transpose();
  assert(g.cwiseAbs().maxCoeff() <= p.G * (1.0 + 1e-12) || !p.set.contains(x));
  return g;
}

double full_objective(const ProblemInstance& p, const Point& x) {
  check_point(p, x);
  const Eigen::VectorXd r = p.features * x;
  double total = 0.0;
  for (Eigen::Index s = 0; s < p.n_samples(); ++s) {
    switch (p.kind) {
      case ProblemKind::RobustRegression: total += std::abs(r[s] - p.targets[s]); break;
      case ProblemKind::PhaseRetrieval: total += std::abs(r[s] * r[s] - p.targets[s]); break;
      case ProblemKind::ConstrainedQuadratic:
        total += 0.5 * (r[s] - p.targets[s]) * (r[s] - p.targets[s]);
        break;
    }
  }
  return total / static_cast<double>(p.n_samples());
}

Point full_subgrad(const ProblemInstance& p, const Point& x) {
  check_point(p, x);
  const Eigen::VectorXd r = p.features * x;
  Eigen::VectorXd coef(p.n_samples());
  for (Eigen::Index s = 0; s < p.n_samples(); ++s)
    coef[s] = subgrad_coefficient(p.kind, r[s], p.targets[s]);
  return p.features.transpose() * coef / static_cast<double>(p.n_samples());
}

WeakConvexityCheck check_weak_convexity(const ProblemInstance& problem, double rho_claimed,
                                        int trials, double region_radius, std::uint64_t seed) {
  if (trials < 1) throw ArgumentError("at least one trial required");
  if (!(region_radius > 0.0)) throw ArgumentError("region radius must be positive");
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto d = problem.dim();

  auto random_point = [&] {
    Point z(d);
    for (auto& v : z) v = gauss(rng);
    const double radius = region_radius * std::pow(unit(rng), 1.0 / static_cast<double>(d));
    return Point(z * (radius / z.norm()));
  };
  auto h = [&](const Point& z) {
    return full_objective(problem, z) + 0.5 * rho_claimed * z.squaredNorm();
  };

  WeakConvexityCheck out;
  for (int k = 0; k < trials; ++k) {
    const Point x = random_point();
    const Point y = random_point();
    double lambda = unit(rng);
    if (lambda <= 0.0) lambda = 0.5;
    const double hx = h(x), hy = h(y);
    const double rhs = lambda * hx + (1.0 - lambda) * hy;
    const double violation = h(lambda * x + (1.0 - lambda) * y) - rhs;
    out.worst_violation = std::max(out.worst_violation, violation);
    if (violation > 1e-9 * std::max(1.0, std::abs(rhs))) out.pass = false;
  }
  return out;
}

}  // namespace wcx
