#ifndef WCXOPT_EXPERIMENT_HPP
#define WCXOPT_EXPERIMENT_HPP

#include "wcxopt/analysis.hpp"
#include "wcxopt/config.hpp"
#include "wcxopt/runner.hpp"

#include <json.hpp>

#include <atomic>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace wcx {

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Results come back in
/// index order; the first exception (by index) is rethrown after all workers join.
template <class R>
std::vector<R> parallel_map(std::size_t n, int workers, const std::function<R(std::size_t)>& fn) {
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t k = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (k <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < k; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  std::vector<R> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

int default_workers();

struct SeedRun {
  std::uint64_t seed = 0;
  std::optional<RunResult> result;
  std::string error;
};

RunOptions run_options(const RunConfig& resolved, std::uint64_t seed);

/// Runs every seed of a resolved config. A seed whose run throws is kept with
/// its error message instead of a result.
std::vector<SeedRun> run_seeds(const ProblemInstance& problem, const RunConfig& resolved, int workers,
                               const std::function<void(RunOptions&)>& adjust = {});

/// Problem constants written to meta.json.
nlohmann::json constants_json(const ProblemInstance& problem, const RunConfig& resolved);

std::string trajectory_csv(const std::vector<TrajectoryRecord>& records);
nlohmann::json tstar_json(const RunResult& result, std::uint64_t seed);

/// Writes meta.json and one seed_<s>/ directory per seed. A PARTIAL marker is
/// present while writing and left behind when a seed failed or a value is not
/// finite; returns false in that case.
bool write_run_directory(const std::string& dir, const ProblemInstance& problem,
                         const RunConfig& resolved, const std::vector<SeedRun>& runs);

/// Convergence-bound check (diagonal methods, or scalar AdaGrad) from
/// multi-seed runs, using each seed's report at t*.
struct TheoremReport {
  TheoremConstants constants;
  TheoremCheck check;
};
TheoremReport theorem_report(const ProblemInstance& problem, const RunConfig& resolved,
                             const std::vector<SeedRun>& runs);

struct RateRow {
  std::int64_t T = 0;
  double mean = 0.0;
  int valid_seeds = 0;
};

struct RateSweep {
  std::vector<RateRow> rows;
  RateFit fit;
  double window_low = -1.0;
  double window_high = -0.3;
  bool pass = false;
};

/// Runs every (T, seed) pair of config.rate_T, averaging the t* measure per T,
/// and fits the slope. With `synthetic` the optimizer is replaced by the
/// curve 0.7 T^{-1/2}.
RateSweep rate_sweep(const ProblemInstance& problem, const RunConfig& resolved, int workers,
                     bool synthetic = false);

std::string rate_csv(const RateSweep& sweep);
nlohmann::json rate_summary_json(const RateSweep& sweep);
/// Log-log line chart of the rate table with the fitted line.
std::string rate_svg(const RateSweep& sweep);

struct CheckResult {
  std::string name;
  bool pass = false;
  nlohmann::json details;
};

struct VerifyOptions {
  StepFaults faults;
  int workers = 1;
};

/// The property suite behind `verify`: lemma identity and bounds, projection
/// and prox oracles, weak convexity, step invariants, theorem bounds on small
/// presets and the method equivalences.
/// Brute-force weighted projection for bounded sets in two or three dimensions,
/// by pattern search over a parametrisation of the set.
Point grid_project(const ConvexSet& set, const Weights& w, const Point& y);

std::vector<CheckResult> verify_suite(const VerifyOptions& options);
nlohmann::json verify_report_json(const std::vector<CheckResult>& checks);

}  // namespace wcx

#endif  // WCXOPT_EXPERIMENT_HPP
