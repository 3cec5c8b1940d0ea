#ifndef WCXOPT_CONFIG_HPP
#define WCXOPT_CONFIG_HPP

#include "wcxopt/moreau.hpp"
#include "wcxopt/optimizers.hpp"
#include "wcxopt/problems.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wcx {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct ProblemSpec {
  ProblemKind kind = ProblemKind::RobustRegression;
  Eigen::Index dim = 10;
  Eigen::Index n_samples = 1000;
  ConvexSet set;
  std::uint64_t seed = 0;
  std::optional<double> rho_declared;
  std::optional<double> operating_radius;
  double noise = 0.1;
  double planted_scale = 0.5;

  bool operator==(const ProblemSpec&) const = default;
};

/// Moreau settings as configured; rho_bar left empty means 2 rho_hat.
struct MoreauSpec {
  std::optional<double> rho_bar;
  int inner_max_iters = 5000;
  double inner_tol = 1e-6;
  int inner_restarts = 3;
  bool accept_inexact = false;

  bool operator==(const MoreauSpec&) const = default;
};

struct RunConfig {
  std::string name = "run";
  ProblemSpec problem;
  OptimizerConfig optimizer;
  std::int64_t T = 1000;
  /// Used only when `checkpoints` is empty.
  int checkpoint_count = 30;
  std::vector<std::int64_t> checkpoints;
  std::vector<std::uint64_t> seeds{0};
  MoreauSpec moreau;
  /// Starting point; the projection of the origin when empty.
  std::vector<double> x1;
  /// Horizons for the rate sweep.
  std::vector<std::int64_t> rate_T;
  std::string out;

  bool operator==(const RunConfig&) const = default;
};

ProblemInstance build_problem(const ProblemSpec& spec);

/// Fills the defaults that depend on the problem (rho_bar, checkpoint list).
/// Idempotent.
RunConfig resolve(const RunConfig& config, const ProblemInstance& problem);

/// Checks every precondition of the modules involved; throws ArgumentError.
void validate(const RunConfig& config, const ProblemInstance& problem);

MoreauConfig moreau_config(const RunConfig& resolved);
std::optional<Point> initial_point(const RunConfig& config);

nlohmann::json to_json(const ConvexSet& set);
ConvexSet set_from_json(const nlohmann::json& j, Eigen::Index dim);
nlohmann::json to_json(const ProblemSpec& spec);
ProblemSpec problem_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OptimizerConfig& config);
OptimizerConfig optimizer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
/// Missing keys take their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::string& path);

std::vector<std::string> preset_names();
/// Throws ArgumentError for an unknown name.
RunConfig preset(const std::string& name);

}  // namespace wcx

#endif  // WCXOPT_CONFIG_HPP
