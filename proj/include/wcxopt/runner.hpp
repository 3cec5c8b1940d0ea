#ifndef WCXOPT_RUNNER_HPP
#define WCXOPT_RUNNER_HPP

#include "wcxopt/moreau.hpp"
#include "wcxopt/optimizers.hpp"
#include "wcxopt/problems.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace wcx {

/// Independent streams: one for sampling xi_t, one for drawing t*.
struct RunSeeds {
  std::uint64_t sampling = 0;
  std::uint64_t output = 1;

  /// Both streams derived from a single user-facing seed.
  static RunSeeds from(std::uint64_t seed);
  bool operator==(const RunSeeds&) const = default;
};

/// One checkpoint row. The pair (x_t, v_hat_t) is the iterate entering step t
/// and the metric computed in that step.
struct TrajectoryRecord {
  std::int64_t t = 0;
  double alpha_t = 0.0;
  double f_x = 0.0;
  double phi_x = 0.0;
  double phi_x_hat = 0.0;
  double dist_sq_weighted = 0.0;
  double moreau_grad_sq = 0.0;
  double subdiff_dist_sq_bound = 0.0;
  double vhat_min = 0.0;
  double vhat_max = 0.0;
  double vhat_sqrt_sum = 0.0;
  double lemma_lhs_running = 0.0;
  // Not part of the CSV.
  double dist_sq = 0.0;
  double envelope = 0.0;
  double inner_residual = 0.0;
  bool inner_converged = false;
};

/// Per-step invariants observed while running.
struct StepDiagnostics {
  bool vhat_monotone = true;
  double vhat_min_seen = std::numeric_limits<double>::infinity();
  double vhat_max_seen = 0.0;
  bool all_feasible = true;
  double max_grad_inf = 0.0;
  /// Largest relative variational-inequality gap of a projection step;
  /// zero up to rounding when every step lands on the exact projection.
  double max_projection_gap = 0.0;
};

struct RunOptions {
  std::int64_t T = 1;
  /// Steps at which a stationarity report is logged, subset of [1, T].
  std::vector<std::int64_t> checkpoints;
  RunSeeds seeds;
  MoreauConfig moreau;
  /// Defaults to the Euclidean projection of the origin.
  std::optional<Point> x1;
  /// Skip the stationarity solves at checkpoints (only t* gets a report).
  bool reports_at_checkpoints = true;
  /// Skip every stationarity solve, including t = 1 and t*; checkpoint rows
  /// then carry only the optimizer-side columns.
  bool stationarity = true;
};

struct RunResult {
  std::vector<TrajectoryRecord> records;
  std::int64_t t_star = 1;
  Point x_tstar;
  Eigen::VectorXd vhat_tstar;
  StationarityReport tstar_report;
  /// sum_i v_hat_{T+1,i}^{1/2}, from one extra draw at x_{T+1}.
  double vhat_sqrt_sum_next = 0.0;
  /// Running moment sum after T steps (left side of the moment lemmas).
  double moment_sum = 0.0;
  /// Moreau envelope at x_1 in the v_hat_1 metric.
  double envelope_x1 = 0.0;
  StepDiagnostics diagnostics;
  MomentState final_state;
};

/// Integer log-spaced steps in [1, T], always containing 1 and T.
std::vector<std::int64_t> log_spaced_checkpoints(std::int64_t T, int count);

/// Runs T steps with one sample per step, logs a report at each checkpoint
/// and returns the uniformly drawn output iterate x_{t*} with its report.
/// Errors raised inside a step are rethrown with the step index prepended.
RunResult run(const ProblemInstance& problem, const OptimizerConfig& config,
              const RunOptions& options);

}  // namespace wcx

#endif  // WCXOPT_RUNNER_HPP
