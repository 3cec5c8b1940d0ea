#include "wcxopt/config.hpp"

#include "wcxopt/errors.hpp"
#include "wcxopt/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace wcx {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ArgumentError(std::string(where) + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ArgumentError(std::string(where) + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

std::optional<double> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Infinite bounds travel as null.
json bound_array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(std::abs(v[i]) >= kUnbounded ? json(nullptr) : json(v[i]));
  return a;
}

Eigen::VectorXd bound_from_json(const json& j, Eigen::Index dim, double infinite) {
  if (j.is_null()) return Eigen::VectorXd::Constant(dim, infinite);
  if (j.is_number()) return Eigen::VectorXd::Constant(dim, j.get<double>());
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim)
    throw ArgumentError("box bound must be a number, null or an array of length " + std::to_string(dim));
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = j[i].is_null() ? infinite : j[i].get<double>();
  return v;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ProblemSpec spec(ProblemKind kind, Eigen::Index dim, Eigen::Index n, ConvexSet set,
                 std::uint64_t seed, std::optional<double> rho = std::nullopt) {
  ProblemSpec s;
  s.kind = kind;
  s.dim = dim;
  s.n_samples = n;
  s.set = std::move(set);
  s.seed = seed;
  s.rho_declared = rho;
  return s;
}

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::uint64_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

}  // namespace

ProblemInstance build_problem(const ProblemSpec& spec) {
  if (spec.dim < 1 || spec.n_samples < 1) throw ArgumentError("problem needs dim >= 1 and n_samples >= 1");
  ProblemOptions opts;
  opts.rho_declared = spec.rho_declared;
  opts.operating_radius = spec.operating_radius;
  opts.noise = spec.noise;
  opts.planted_scale = spec.planted_scale;
  return make_problem(spec.kind, spec.dim, spec.n_samples, spec.set, spec.seed, opts);
}

RunConfig resolve(const RunConfig& config, const ProblemInstance& problem) {
  RunConfig r = config;
  if (!r.moreau.rho_bar) r.moreau.rho_bar = 2.0 * rho_hat(problem, r.optimizer);
  if (r.checkpoints.empty()) r.checkpoints = log_spaced_checkpoints(r.T, r.checkpoint_count);
  return r;
}

void validate(const RunConfig& config, const ProblemInstance& problem) {
  config.optimizer.validate();
  if (config.T < 1) throw ArgumentError("T must be at least 1");
  if (config.checkpoint_count < 1) throw ArgumentError("checkpoint_count must be positive");
  for (auto t : config.checkpoints)
    if (t < 1 || t > config.T) throw ArgumentError("checkpoint " + std::to_string(t) + " outside [1, T]");
  if (config.seeds.empty()) throw ArgumentError("at least one seed is required");
  if (std::set<std::uint64_t>(config.seeds.begin(), config.seeds.end()).size() != config.seeds.size())
    throw ArgumentError("seeds must be distinct");
  for (auto t : config.rate_T)
    if (t < 1) throw ArgumentError("rate horizons must be positive");

  const auto& m = config.moreau;
  if (m.inner_max_iters < 1 || m.inner_restarts < 0 || !(m.inner_tol > 0.0))
    throw ArgumentError("invalid inner solver settings");
  const double rh = rho_hat(problem, config.optimizer);
  const double rb = m.rho_bar ? *m.rho_bar : 2.0 * rh;
  if (!(rb > rh))
    throw ArgumentError("rho_bar must exceed rho_hat = " + std::to_string(rh));

  if (!config.x1.empty()) {
    if (static_cast<Eigen::Index>(config.x1.size()) != problem.dim())
      throw ArgumentError("x1 has the wrong dimension");
    if (!problem.set.contains(*initial_point(config))) throw ArgumentError("x1 is not feasible");
  }
  if (problem.set.dim() >= 0 && problem.set.dim() != problem.dim())
    throw ArgumentError("feasible set dimension differs from the problem dimension");
}

MoreauConfig moreau_config(const RunConfig& resolved) {
  if (!resolved.moreau.rho_bar) throw ArgumentError("moreau_config needs a resolved config");
  MoreauConfig m;
  m.rho_bar = *resolved.moreau.rho_bar;
  m.inner_max_iters = resolved.moreau.inner_max_iters;
  m.inner_tol = resolved.moreau.inner_tol;
  m.inner_restarts = resolved.moreau.inner_restarts;
  m.accept_inexact = resolved.moreau.accept_inexact;
  return m;
}

std::optional<Point> initial_point(const RunConfig& config) {
  if (config.x1.empty()) return std::nullopt;
  return Point(Eigen::Map<const Eigen::VectorXd>(config.x1.data(),
                                                 static_cast<Eigen::Index>(config.x1.size())));
}

json to_json(const ConvexSet& set) {
  json j;
  j["kind"] = set.kind_name();
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Box>) {
          j["lower"] = bound_array(s.lower);
          j["upper"] = bound_array(s.upper);
        } else if constexpr (std::is_same_v<S, EuclideanBall>) {
          j["center"] = vector_json(s.center);
          j["radius"] = s.radius;
        } else if constexpr (std::is_same_v<S, Simplex>) {
          j["scale"] = s.scale;
        }
      },
      set.variant());
  return j;
}

ConvexSet set_from_json(const json& j, Eigen::Index dim) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "free") {
    check_keys(j, {"kind"}, "set");
    return ConvexSet::free_space();
  }
  if (kind == "box") {
    check_keys(j, {"kind", "lower", "upper"}, "set");
    constexpr double inf = std::numeric_limits<double>::infinity();
    return ConvexSet::box(bound_from_json(j.value("lower", json(nullptr)), dim, -inf),
                          bound_from_json(j.value("upper", json(nullptr)), dim, inf));
  }
  if (kind == "ball") {
    check_keys(j, {"kind", "center", "radius"}, "set");
    Eigen::VectorXd c = j.contains("center") ? vector_from_json(j.at("center")) : Eigen::VectorXd::Zero(dim);
    if (c.size() != dim) throw ArgumentError("ball center has the wrong dimension");
    return ConvexSet::ball(std::move(c), j.at("radius").get<double>());
  }
  if (kind == "simplex") {
    check_keys(j, {"kind", "scale"}, "set");
    return ConvexSet::simplex(dim, get_or(j, "scale", 1.0));
  }
  throw ArgumentError("unknown set kind '" + kind + "'");
}

json to_json(const ProblemSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"dim", s.dim},
          {"n_samples", s.n_samples},
          {"set", to_json(s.set)},
          {"seed", s.seed},
          {"rho_declared", opt_json(s.rho_declared)},
          {"operating_radius", opt_json(s.operating_radius)},
          {"noise", s.noise},
          {"planted_scale", s.planted_scale}};
}

ProblemSpec problem_spec_from_json(const json& j) {
  check_keys(j, {"kind", "dim", "n_samples", "set", "seed", "rho_declared", "operating_radius", "noise",
                 "planted_scale"},
             "problem");
  ProblemSpec s;
  s.kind = problem_kind_from_string(j.at("kind").get<std::string>());
  s.dim = get_or<Eigen::Index>(j, "dim", s.dim);
  s.n_samples = get_or<Eigen::Index>(j, "n_samples", s.n_samples);
  if (s.dim < 1 || s.n_samples < 1) throw ArgumentError("problem needs dim >= 1 and n_samples >= 1");
  if (j.contains("set")) s.set = set_from_json(j.at("set"), s.dim);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  s.rho_declared = get_opt(j, "rho_declared");
  s.operating_radius = get_opt(j, "operating_radius");
  s.noise = get_or(j, "noise", s.noise);
  s.planted_scale = get_or(j, "planted_scale", s.planted_scale);
  return s;
}

json to_json(const OptimizerConfig& c) {
  return {{"variant", to_string(c.variant)},
          {"alpha", c.alpha},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"delta", c.delta},
          {"faults",
           {{"skip_vhat_max", c.faults.skip_vhat_max},
            {"unweighted_projection", c.faults.unweighted_projection}}}};
}

OptimizerConfig optimizer_from_json(const json& j) {
  check_keys(j, {"variant", "alpha", "beta1", "beta2", "delta", "faults"}, "optimizer");
  OptimizerConfig c;
  if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
  c.alpha = get_or(j, "alpha", c.alpha);
  c.beta1 = get_or(j, "beta1", c.beta1);
  c.beta2 = get_or(j, "beta2", c.beta2);
  c.delta = get_or(j, "delta", c.delta);
  if (j.contains("faults")) {
    const auto& f = j.at("faults");
    check_keys(f, {"skip_vhat_max", "unweighted_projection"}, "faults");
    c.faults.skip_vhat_max = get_or(f, "skip_vhat_max", false);
    c.faults.unweighted_projection = get_or(f, "unweighted_projection", false);
  }
  return c;
}

json to_json(const RunConfig& c) {
  return {{"name", c.name},
          {"problem", to_json(c.problem)},
          {"optimizer", to_json(c.optimizer)},
          {"T", c.T},
          {"checkpoint_count", c.checkpoint_count},
          {"checkpoints", c.checkpoints},
          {"seeds", c.seeds},
          {"moreau",
           {{"rho_bar", opt_json(c.moreau.rho_bar)},
            {"inner_max_iters", c.moreau.inner_max_iters},
            {"inner_tol", c.moreau.inner_tol},
            {"inner_restarts", c.moreau.inner_restarts},
            {"accept_inexact", c.moreau.accept_inexact}}},
          {"x1", c.x1},
          {"rate_T", c.rate_T},
          {"out", c.out}};
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j, {"name", "problem", "optimizer", "T", "checkpoint_count", "checkpoints", "seeds", "moreau",
                 "x1", "rate_T", "out"},
             "config");
  RunConfig c;
  c.name = get_or<std::string>(j, "name", c.name);
  if (j.contains("problem")) c.problem = problem_spec_from_json(j.at("problem"));
  if (j.contains("optimizer")) c.optimizer = optimizer_from_json(j.at("optimizer"));
  c.T = get_or<std::int64_t>(j, "T", c.T);
  c.checkpoint_count = get_or(j, "checkpoint_count", c.checkpoint_count);
  c.checkpoints = get_or(j, "checkpoints", c.checkpoints);
  c.seeds = get_or(j, "seeds", c.seeds);
  if (j.contains("moreau")) {
    const auto& m = j.at("moreau");
    check_keys(m, {"rho_bar", "inner_max_iters", "inner_tol", "inner_restarts", "accept_inexact"}, "moreau");
    c.moreau.rho_bar = get_opt(m, "rho_bar");
    c.moreau.inner_max_iters = get_or(m, "inner_max_iters", c.moreau.inner_max_iters);
    c.moreau.inner_tol = get_or(m, "inner_tol", c.moreau.inner_tol);
    c.moreau.inner_restarts = get_or(m, "inner_restarts", c.moreau.inner_restarts);
    c.moreau.accept_inexact = get_or(m, "accept_inexact", c.moreau.accept_inexact);
  }
  c.x1 = get_or(j, "x1", c.x1);
  c.rate_T = get_or(j, "rate_T", c.rate_T);
  c.out = get_or<std::string>(j, "out", c.out);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ArgumentError("config file " + path + ": " + e.what());
  }
  try {
    return run_config_from_json(j);
  } catch (const json::exception& e) {
    throw ArgumentError("config file " + path + ": " + e.what());
  }
}

std::vector<std::string> preset_names() {
  return {"robust-reg-small", "robust-reg",     "phase-retrieval", "phase-retrieval-small",
          "quadratic-box",    "adagrad-robust", "rate-robust"};
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.name = name;
  c.optimizer.alpha = 0.1;
  c.optimizer.beta1 = 0.9;
  c.optimizer.beta2 = 0.999;
  c.optimizer.delta = 1.0;
  c.moreau.inner_tol = 1e-4;
  c.T = 10000;
  c.seeds = seed_range(20);

  auto& p = c.problem;
  if (name == "robust-reg-small") {
    p = spec(ProblemKind::RobustRegression, 5, 200, ConvexSet::ball(Eigen::VectorXd::Zero(5), 1.0), 1, 1.0);
    c.T = 1000;
    c.checkpoint_count = 10;
    c.seeds = seed_range(3);
  } else if (name == "robust-reg") {
    p = spec(ProblemKind::RobustRegression, 10, 1000, ConvexSet::free_space(), 7, 1.0);
  } else if (name == "phase-retrieval") {
    p = spec(ProblemKind::PhaseRetrieval, 10, 1000, ConvexSet::ball(Eigen::VectorXd::Zero(10), 1.0), 7);
    c.x1.assign(10, 0.3);
  } else if (name == "phase-retrieval-small") {
    p = spec(ProblemKind::PhaseRetrieval, 5, 200, ConvexSet::ball(Eigen::VectorXd::Zero(5), 0.5), 3);
    c.x1.assign(5, 0.2);
    c.optimizer.delta = 1e-3;
    c.T = 2000;
    c.checkpoint_count = 10;
  } else if (name == "quadratic-box") {
    p = spec(ProblemKind::ConstrainedQuadratic, 10, 500, ConvexSet::box(10, -0.5, 0.5), 5);
  } else if (name == "adagrad-robust") {
    p = spec(ProblemKind::RobustRegression, 10, 1000, ConvexSet::free_space(), 7, 1.0);
    c.optimizer.variant = Variant::ScalarAdaGrad;
  } else if (name == "rate-robust") {
    p = spec(ProblemKind::RobustRegression, 10, 1000, ConvexSet::free_space(), 7, 1.0);
    c.optimizer.alpha = 1.0;
    c.seeds = seed_range(10);
    c.rate_T = {100, 316, 1000, 3162, 10000, 31623, 100000};
    c.T = 100000;
  } else {
    throw ArgumentError("unknown preset '" + name + "'");
  }
  return c;
}

}  // namespace wcx
