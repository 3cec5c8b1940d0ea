#include "wcxopt/runner.hpp"

#include "wcxopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wcx {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string at_step(std::int64_t t, const char* what) {
  return "step " + std::to_string(t) + ": " + what;
}

}  // namespace

RunSeeds RunSeeds::from(std::uint64_t seed) {
  return {splitmix64(2 * seed), splitmix64(2 * seed + 1)};
}

std::vector<std::int64_t> log_spaced_checkpoints(std::int64_t T, int count) {
  if (T < 1) throw ArgumentError("horizon must be positive");
  if (count < 1) throw ArgumentError("checkpoint count must be positive");
  std::vector<std::int64_t> out{1, T};
  const double top = std::log(static_cast<double>(T));
  for (int k = 1; k + 1 < count; ++k) {
    const double e = top * static_cast<double>(k) / static_cast<double>(count - 1);
    out.push_back(std::clamp<std::int64_t>(std::llround(std::exp(e)), 1, T));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

RunResult run(const ProblemInstance& problem, const OptimizerConfig& config_in,
              const RunOptions& options) {
  const std::int64_t T = options.T;
  if (T < 1) throw ArgumentError("horizon T must be at least 1");
  auto checkpoints = options.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (!checkpoints.empty() && (checkpoints.front() < 1 || checkpoints.back() > T))
    throw ArgumentError("checkpoints must lie in [1, T]");

  config_in.validate();
  const OptimizerConfig config = config_in.resolved();
  const auto d = problem.dim();
  const ConvexSet& set = problem.set;
  const bool weighted = config.weighted();

  const Point x1 = options.x1 ? *options.x1 : project(set, Point::Zero(d));
  MomentState state = initial_state(config, set, x1);

  Rng sample_rng(options.seeds.sampling);
  Rng output_rng(options.seeds.output);

  RunResult result;
  result.t_star = std::uniform_int_distribution<std::int64_t>(1, T)(output_rng);
  result.records.reserve(checkpoints.size());

  std::optional<Point> warm;
  auto next_checkpoint = checkpoints.begin();
  StepDiagnostics& diag = result.diagnostics;

  for (std::int64_t t = 1; t <= T; ++t) {
    try {
      const Point x_t = state.x;
      const Eigen::VectorXd vhat_prev = state.v_hat;
      const Point g = stoch_subgrad(problem, x_t, sample_index(problem, sample_rng));
      const double g_inf = g.cwiseAbs().maxCoeff();
      diag.max_grad_inf = std::max(diag.max_grad_inf, g_inf);
      if (g_inf > problem.G * (1.0 + 1e-12))
        throw NumericalError("subgradient exceeds the bound G", g_inf);

      state = step(std::move(state), g, config, set);

      if (weighted) {
        diag.vhat_monotone = diag.vhat_monotone && (state.v_hat.array() >= vhat_prev.array()).all();
        diag.vhat_min_seen = std::min(diag.vhat_min_seen, state.v_hat.minCoeff());
        diag.vhat_max_seen = std::max(diag.vhat_max_seen, state.v_hat.maxCoeff());
      }
      diag.all_feasible = diag.all_feasible && set.contains(state.x);

      // Projection certificate: q = W (y - x+) must satisfy sup_X <q, z> = <q, x+>.
      const double alpha_t = step_size(config, t);
      Point q;
      if (weighted) {
        const Eigen::VectorXd root = state.v_hat.cwiseSqrt();
        q = root.cwiseProduct(x_t - alpha_t * state.m.cwiseQuotient(root) - state.x);
      } else if (config.variant == Variant::ScalarAdaGrad) {
        q = x_t - (alpha_t / std::sqrt(state.v[0])) * state.m - state.x;
      } else {
        q = x_t - alpha_t * state.m - state.x;
      }
      const double qn = q.norm();
      if (qn > 0.0) {
        const double gap = set.support(q) - q.dot(state.x);
        diag.max_projection_gap =
            std::max(diag.max_projection_gap, gap / (qn * (1.0 + state.x.norm())));
      }

      const bool at_checkpoint = next_checkpoint != checkpoints.end() && *next_checkpoint == t;
      if (at_checkpoint) ++next_checkpoint;
      const bool need_report =
          options.stationarity &&
          ((at_checkpoint && options.reports_at_checkpoints) || t == 1 || t == result.t_star);
      if (!need_report && !at_checkpoint && t != result.t_star) continue;

      StationarityReport report;
      if (need_report) {
        const Weights w = weighted ? Weights(state.v_hat.cwiseSqrt()) : Weights::ones(d);
        report = stationarity_report(problem, x_t, w, options.moreau, warm);
        warm = report.x_hat;
        if (t == 1) result.envelope_x1 = report.envelope;
      }

      if (at_checkpoint) {
        TrajectoryRecord row;
        row.t = t;
        row.alpha_t = alpha_t;
        row.f_x = full_objective(problem, x_t);
        row.phi_x = report.phi_x;
        row.phi_x_hat = report.phi_x_hat;
        row.dist_sq_weighted = report.dist_sq_weighted;
        row.moreau_grad_sq = report.moreau_grad_sq;
        row.subdiff_dist_sq_bound = report.subdiff_dist_sq_bound;
        row.vhat_min = state.v_hat.minCoeff();
        row.vhat_max = state.v_hat.maxCoeff();
        row.vhat_sqrt_sum = state.v_hat.cwiseSqrt().sum();
        row.lemma_lhs_running = state.moment_sum;
        row.dist_sq = report.dist_sq;
        row.envelope = report.envelope;
        row.inner_residual = report.inner_residual;
        row.inner_converged = report.inner_converged;
        result.records.push_back(row);
      }
      if (t == result.t_star) {
        result.x_tstar = x_t;
        result.vhat_tstar = state.v_hat;
        result.tstar_report = std::move(report);
      }
    } catch (const ProxError& e) {
      throw ProxError(at_step(t, e.what()), e.best());
    } catch (const NumericalError& e) {
      throw NumericalError(at_step(t, e.what()), e.residual());
    } catch (const ArgumentError& e) {
      throw ArgumentError(at_step(t, e.what()));
    }
  }

  // One extra draw at x_{T+1} gives v_hat_{T+1} without moving the iterate.
  if (weighted) {
    const Point g = stoch_subgrad(problem, state.x, sample_index(problem, sample_rng));
    const Eigen::VectorXd v = config.beta2 * state.v + (1.0 - config.beta2) * g.cwiseAbs2();
    result.vhat_sqrt_sum_next = state.v_hat.cwiseMax(v).cwiseSqrt().sum();
  } else {
    result.vhat_sqrt_sum_next = static_cast<double>(d);
  }
  result.moment_sum = state.moment_sum;
  result.final_state = std::move(state);
  return result;
}

}  // namespace wcx
