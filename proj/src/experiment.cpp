#include "wcxopt/experiment.hpp"

#include "wcxopt/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace wcx {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(finite_or_null(v[i]));
  return a;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

bool records_finite(const std::vector<TrajectoryRecord>& rows) {
  for (const auto& r : rows) {
    for (double v : {r.alpha_t, r.f_x, r.phi_x, r.phi_x_hat, r.dist_sq_weighted, r.moreau_grad_sq,
                     r.subdiff_dist_sq_bound, r.vhat_min, r.vhat_max, r.vhat_sqrt_sum,
                     r.lemma_lhs_running})
      if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

RunOptions run_options(const RunConfig& resolved, std::uint64_t seed) {
  RunOptions o;
  o.T = resolved.T;
  o.checkpoints = resolved.checkpoints;
  o.seeds = RunSeeds::from(seed);
  o.moreau = moreau_config(resolved);
  o.x1 = initial_point(resolved);
  return o;
}

std::vector<SeedRun> run_seeds(const ProblemInstance& problem, const RunConfig& resolved, int workers,
                               const std::function<void(RunOptions&)>& adjust) {
  return parallel_map<SeedRun>(resolved.seeds.size(), workers, [&](std::size_t i) {
    SeedRun out;
    out.seed = resolved.seeds[i];
    try {
      auto opts = run_options(resolved, out.seed);
      if (adjust) adjust(opts);
      out.result = run(problem, resolved.optimizer, opts);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    return out;
  });
}

json constants_json(const ProblemInstance& problem, const RunConfig& resolved) {
  const double rh = rho_hat(problem, resolved.optimizer);
  const double rb = *resolved.moreau.rho_bar;
  const auto d = problem.dim();
  json c = {{"rho", problem.rho},
            {"rho_min", problem.rho_min},
            {"rho_hat", rh},
            {"rho_bar", rb},
            {"G", problem.G},
            {"f_star", problem.f_star},
            {"L", problem.L ? json(*problem.L) : json(nullptr)},
            {"operating_radius", finite_or_null(problem.operating_radius)}};
  if (resolved.optimizer.weighted()) {
    c["D_hat"] = lemma1_radius(d, problem.G, resolved.optimizer.delta, rb, rh);
  } else {
    const auto radii = euclidean_radii(d, problem.G, rb, problem.rho);
    c["D_hat"] = radii.unsquared_denominator;
    c["D_hat_squared_reading"] = radii.squared_denominator;
  }
  return c;
}

std::string trajectory_csv(const std::vector<TrajectoryRecord>& records) {
  std::string s =
      "t,alpha_t,f_x,phi_x,phi_x_hat,dist_sq_weighted,moreau_grad_sq,subdiff_dist_sq_bound,"
      "vhat_min,vhat_max,vhat_sqrt_sum,lemma_lhs_running\n";
  for (const auto& r : records) {
    s += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.t, r.alpha_t, r.f_x, r.phi_x,
                     r.phi_x_hat, r.dist_sq_weighted, r.moreau_grad_sq, r.subdiff_dist_sq_bound,
                     r.vhat_min, r.vhat_max, r.vhat_sqrt_sum, r.lemma_lhs_running);
  }
  return s;
}

json tstar_json(const RunResult& r, std::uint64_t seed) {
  const auto& rep = r.tstar_report;
  const auto& dg = r.diagnostics;
  return {{"seed", seed},
          {"t_star", r.t_star},
          {"x_tstar", vec_json(r.x_tstar)},
          {"vhat_tstar", vec_json(r.vhat_tstar)},
          {"report",
           {{"x_hat", vec_json(rep.x_hat)},
            {"dist_sq", rep.dist_sq},
            {"dist_sq_weighted", rep.dist_sq_weighted},
            {"moreau_grad_sq", rep.moreau_grad_sq},
            {"subdiff_dist_sq_bound", rep.subdiff_dist_sq_bound},
            {"phi_x", finite_or_null(rep.phi_x)},
            {"phi_x_hat", rep.phi_x_hat},
            {"envelope", rep.envelope},
            {"inner_residual", rep.inner_residual},
            {"inner_converged", rep.inner_converged},
            {"inner_iterations", rep.inner_iterations}}},
          {"envelope_x1", r.envelope_x1},
          {"vhat_sqrt_sum_next", r.vhat_sqrt_sum_next},
          {"moment_sum", r.moment_sum},
          {"diagnostics",
           {{"vhat_monotone", dg.vhat_monotone},
            {"vhat_min_seen", finite_or_null(dg.vhat_min_seen)},
            {"vhat_max_seen", dg.vhat_max_seen},
            {"all_feasible", dg.all_feasible},
            {"max_grad_inf", dg.max_grad_inf},
            {"max_projection_gap", dg.max_projection_gap}}}};
}

bool write_run_directory(const std::string& dir, const ProblemInstance& problem,
                         const RunConfig& resolved, const std::vector<SeedRun>& runs) {
  const fs::path root(dir);
  fs::create_directories(root);
  const fs::path marker = root / "PARTIAL";
  write_file(marker, "incomplete output\n");

  json meta = {{"artifact_version", kArtifactVersion},
               {"config", to_json(resolved)},
               {"constants", constants_json(problem, resolved)}};
  write_file(root / "meta.json", meta.dump(2) + "\n");

  bool ok = true;
  std::string failures;
  for (const auto& run : runs) {
    const fs::path sd = root / ("seed_" + std::to_string(run.seed));
    fs::create_directories(sd);
    if (!run.result) {
      ok = false;
      failures += "seed " + std::to_string(run.seed) + ": " + run.error + "\n";
      continue;
    }
    if (!records_finite(run.result->records)) {
      ok = false;
      failures += "seed " + std::to_string(run.seed) + ": non-finite value in trajectory\n";
    }
    write_file(sd / "trajectory.csv", trajectory_csv(run.result->records));
    write_file(sd / "tstar.json", tstar_json(*run.result, run.seed).dump(2) + "\n");
  }
  if (ok)
    fs::remove(marker);
  else
    write_file(marker, "incomplete output\n" + failures);
  return ok;
}

TheoremReport theorem_report(const ProblemInstance& problem, const RunConfig& resolved,
                             const std::vector<SeedRun>& runs) {
  const auto& opt = resolved.optimizer;
  int theorem = 0;
  if (opt.weighted()) theorem = 1;
  if (opt.variant == Variant::ScalarAdaGrad) theorem = 2;
  if (theorem == 0) throw ArgumentError("no convergence theorem covers " + to_string(opt.variant));

  const OptimizerConfig c = opt.resolved();
  std::vector<std::optional<double>> per_seed;
  double env = 0.0, vsum = 0.0;
  int n = 0;
  for (const auto& r : runs) {
    if (r.result && r.result->tstar_report.inner_converged) {
      per_seed.push_back(r.result->tstar_report.moreau_grad_sq);
      env += r.result->envelope_x1;
      vsum += r.result->vhat_sqrt_sum_next;
      ++n;
    } else {
      per_seed.push_back(std::nullopt);
    }
  }
  TheoremInputs in;
  in.rho = problem.rho;
  in.G = problem.G;
  in.d = problem.dim();
  in.delta = c.delta;
  in.alpha = c.alpha;
  in.beta1 = c.beta1;
  in.beta2 = c.beta2;
  in.rho_bar = *resolved.moreau.rho_bar;
  in.envelope_x1 = n > 0 ? env / n : 0.0;
  in.f_star = problem.f_star;
  in.vhat_sqrt_sum = n > 0 ? vsum / n : 0.0;

  TheoremReport out;
  out.constants = theorem_constants(theorem, in);
  out.check = theorem_bound_check(per_seed, out.constants, resolved.T);
  return out;
}

RateSweep rate_sweep(const ProblemInstance& problem, const RunConfig& resolved, int workers,
                     bool synthetic) {
  std::vector<std::int64_t> Ts = resolved.rate_T;
  std::sort(Ts.begin(), Ts.end());
  Ts.erase(std::unique(Ts.begin(), Ts.end()), Ts.end());
  if (Ts.size() < 4) throw ArgumentError("rate sweep needs at least 4 distinct horizons");
  if (Ts.size() < 5)
    throw ArgumentError("rate sweep needs at least 5 distinct horizons for the slope fit");
  if (Ts.front() < 1) throw ArgumentError("rate horizons must be positive");

  RateSweep sweep;
  const std::size_t S = resolved.seeds.size();
  std::vector<std::optional<double>> values(Ts.size() * S);
  if (synthetic) {
    for (std::size_t k = 0; k < values.size(); ++k)
      values[k] = 0.7 / std::sqrt(static_cast<double>(Ts[k / S]));
  } else {
    values = parallel_map<std::optional<double>>(values.size(), workers, [&](std::size_t k) {
      RunConfig cfg = resolved;
      cfg.T = Ts[k / S];
      auto opts = run_options(cfg, resolved.seeds[k % S]);
      opts.checkpoints.clear();
      try {
        const auto r = run(problem, cfg.optimizer, opts);
        if (!r.tstar_report.inner_converged) return std::optional<double>();
        return std::optional<double>(r.tstar_report.moreau_grad_sq);
      } catch (const NumericalError&) {
        return std::optional<double>();
      }
    });
  }

  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < Ts.size(); ++i) {
    RateRow row;
    row.T = Ts[i];
    double sum = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      if (const auto& v = values[i * S + s]) {
        sum += *v;
        ++row.valid_seeds;
      }
    }
    row.mean = row.valid_seeds > 0 ? sum / row.valid_seeds : std::numeric_limits<double>::quiet_NaN();
    sweep.rows.push_back(row);
    points.emplace_back(static_cast<double>(row.T), row.mean);
  }
  sweep.fit = rate_fit(points);
  sweep.pass = sweep.fit.slope >= sweep.window_low && sweep.fit.slope <= sweep.window_high;
  return sweep;
}

std::string rate_csv(const RateSweep& sweep) {
  std::string s = "T,mean_moreau_grad_sq,running_min,valid_seeds\n";
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : sweep.rows) {
    if (r.mean > 0.0) best = std::min(best, r.mean);
    s += fmt::format("{},{},{},{}\n", r.T, r.mean, best, r.valid_seeds);
  }
  return s;
}

json rate_summary_json(const RateSweep& sweep) {
  return {{"slope", sweep.fit.slope},
          {"intercept", sweep.fit.intercept},
          {"r_squared", sweep.fit.r_squared},
          {"points_used", sweep.fit.points_used},
          {"window", {sweep.window_low, sweep.window_high}},
          {"pass", sweep.pass}};
}

std::string rate_svg(const RateSweep& sweep) {
  constexpr double W = 640, H = 420, L = 70, R = 20, Tp = 20, B = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  std::vector<std::pair<double, double>> pts;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : sweep.rows) {
    if (!(r.mean > 0.0)) continue;
    best = std::min(best, r.mean);
    const double x = std::log10(static_cast<double>(r.T)), y = std::log10(best);
    pts.emplace_back(x, y);
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (pts.empty()) return "<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n";
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax - ymin < 1e-9) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return Tp + (ymax - y) / (ymax - ymin) * (H - Tp - B); };

  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      W, H);
  s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", L, H - B, W - R, H - B);
  s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", L, Tp, L, H - B);
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">log10 T</text>\n", (L + W - R) / 2, H - 12);
  s += fmt::format(
      "<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">log10 running min "
      "E|grad phi|^2</text>\n",
      (Tp + H - B) / 2, (Tp + H - B) / 2);
  for (const auto& [x, y] : pts) {
    s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"steelblue\"/>\n", px(x), py(y));
    s += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.1f}</text>\n", px(x), H - B + 16, x);
  }
  const double ln10 = std::log(10.0);
  auto fit_y = [&](double x) { return (sweep.fit.intercept + sweep.fit.slope * x * ln10) / ln10; };
  s += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"firebrick\" "
                   "stroke-dasharray=\"6 4\"/>\n",
                   px(xmin), py(fit_y(xmin)), px(xmax), py(fit_y(xmax)));
  s += fmt::format("<text x=\"{}\" y=\"{}\">slope {:.3f}, R^2 {:.3f}</text>\n", W - R - 170, Tp + 14,
                   sweep.fit.slope, sweep.fit.r_squared);
  s += "</svg>\n";
  return s;
}

json verify_report_json(const std::vector<CheckResult>& checks) {
  json list = json::array();
  bool all = true;
  std::vector<std::string> failed;
  for (const auto& c : checks) {
    list.push_back({{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
    all = all && c.pass;
    if (!c.pass) failed.push_back(c.name);
  }
  return {{"artifact_version", kArtifactVersion}, {"pass", all}, {"failed", failed}, {"checks", list}};
}

}  // namespace wcx
