#include "wcxopt/errors.hpp"
#include "wcxopt/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace wcx;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string preset_name = "robust-reg-small";
  std::string problem;
  std::string optimizer;
  std::optional<std::int64_t> T;
  std::optional<double> alpha, beta1, beta2, delta;
  std::string seeds;
  std::string out;
  int workers = default_workers();
  std::optional<int> checkpoints;
  std::string fault;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--preset", f.preset_name, "named preset used when no --config is given");
  app->add_option("--problem", f.problem, "robust_regression | phase_retrieval | constrained_quadratic");
  app->add_option("--optimizer", f.optimizer, "amsgrad | rmsprop | momentum_sgd | scalar_adagrad");
  app->add_option("--T", f.T, "number of iterations");
  app->add_option("--alpha", f.alpha);
  app->add_option("--beta1", f.beta1);
  app->add_option("--beta2", f.beta2);
  app->add_option("--delta", f.delta);
  app->add_option("--seeds", f.seeds, "count N (seeds 0..N-1) or comma-separated list");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--checkpoints", f.checkpoints, "number of log-spaced checkpoints")
      ->check(CLI::PositiveNumber);
  app->add_option("--inject-fault", f.fault, "mutation test: skip_vhat_max | unweighted_projection");
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  if (s.find(',') == std::string::npos) {
    const auto n = std::stoull(s);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
  return out;
}

StepFaults parse_fault(const std::string& name) {
  StepFaults f;
  if (name.empty()) return f;
  if (name == "skip_vhat_max")
    f.skip_vhat_max = true;
  else if (name == "unweighted_projection")
    f.unweighted_projection = true;
  else
    throw ArgumentError("unknown fault '" + name + "'");
  return f;
}

RunConfig build_config(const CommonFlags& f) {
  RunConfig c = f.config_path.empty() ? preset(f.preset_name) : load_run_config(f.config_path);
  if (!f.problem.empty()) c.problem.kind = problem_kind_from_string(f.problem);
  if (!f.optimizer.empty()) c.optimizer.variant = variant_from_string(f.optimizer);
  if (f.T) {
    c.T = *f.T;
    c.checkpoints.clear();
  }
  if (f.alpha) c.optimizer.alpha = *f.alpha;
  if (f.beta1) c.optimizer.beta1 = *f.beta1;
  if (f.beta2) c.optimizer.beta2 = *f.beta2;
  if (f.delta) c.optimizer.delta = *f.delta;
  if (!f.seeds.empty()) c.seeds = parse_seeds(f.seeds);
  if (f.checkpoints) {
    c.checkpoint_count = *f.checkpoints;
    c.checkpoints.clear();
  }
  c.optimizer.faults = parse_fault(f.fault);
  if (!f.out.empty()) c.out = f.out;
  if (c.out.empty()) {
    const char* root = std::getenv("WCXOPT_OUT");
    c.out = (fs::path(root && *root ? root : "runs") / c.name).string();
  }
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_run(const CommonFlags& f) {
  const RunConfig cfg = build_config(f);
  const auto problem = build_problem(cfg.problem);
  validate(cfg, problem);
  const RunConfig rc = resolve(cfg, problem);
  const auto runs = run_seeds(problem, rc, f.workers);
  const bool ok = write_run_directory(rc.out, problem, rc, runs);
  for (const auto& r : runs) {
    if (r.result)
      std::cerr << "seed " << r.seed << ": t* = " << r.result->t_star
                << ", moreau_grad_sq = " << r.result->tstar_report.moreau_grad_sq << "\n";
    else
      std::cerr << "seed " << r.seed << " failed: " << r.error << "\n";
  }
  std::cerr << (ok ? "wrote " : "incomplete output in ") << rc.out << "\n";
  return ok ? 0 : 3;
}

int cmd_verify(const CommonFlags& f) {
  VerifyOptions vo;
  vo.faults = parse_fault(f.fault);
  vo.workers = f.workers;
  const auto checks = verify_suite(vo);
  const auto report = verify_report_json(checks);
  for (const auto& c : checks) std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << "\n";
  if (f.out.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    if (fs::path(f.out).has_parent_path()) fs::create_directories(fs::path(f.out).parent_path());
    write_text(f.out, report.dump(2) + "\n");
  }
  return report["pass"].get<bool>() ? 0 : 1;
}

int cmd_rate(const CommonFlags& f, const std::vector<std::int64_t>& horizons, bool synthetic, bool svg) {
  RunConfig cfg = build_config(f);
  if (!horizons.empty()) cfg.rate_T = horizons;
  const auto problem = build_problem(cfg.problem);
  validate(cfg, problem);
  const RunConfig rc = resolve(cfg, problem);
  const auto sweep = rate_sweep(problem, rc, f.workers, synthetic);
  fs::create_directories(rc.out);
  write_text(fs::path(rc.out) / "rate.csv", rate_csv(sweep));
  write_text(fs::path(rc.out) / "rate_summary.json", rate_summary_json(sweep).dump(2) + "\n");
  if (svg) write_text(fs::path(rc.out) / "rate.svg", rate_svg(sweep));
  std::cerr << "slope " << sweep.fit.slope << " (R^2 " << sweep.fit.r_squared << "), window ["
            << sweep.window_low << ", " << sweep.window_high << "]: " << (sweep.pass ? "pass" : "fail")
            << "\n";
  return sweep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive stochastic methods for weakly convex problems: runs and checks"};
  app.require_subcommand(1);

  CommonFlags run_flags, verify_flags, rate_flags;
  auto* run_cmd = app.add_subcommand("run", "run every seed and write trajectories");
  add_common(run_cmd, run_flags);

  auto* verify_cmd = app.add_subcommand("verify", "run the property suite; exit 0 iff all checks pass");
  verify_cmd->add_option("--out", verify_flags.out, "write the JSON report here instead of stdout");
  verify_cmd->add_option("--workers", verify_flags.workers)->check(CLI::PositiveNumber);
  verify_cmd->add_option("--inject-fault", verify_flags.fault,
                         "mutation test: skip_vhat_max | unweighted_projection");

  bool synthetic = false, svg = false;
  std::vector<std::int64_t> horizons;
  auto* rate_cmd = app.add_subcommand("rate", "sweep horizons and fit the log-log slope");
  add_common(rate_cmd, rate_flags);
  rate_cmd->add_flag("--synthetic", synthetic, "replace the optimizer by an exact T^-1/2 curve");
  rate_cmd->add_flag("--svg", svg, "also write rate.svg");
  rate_cmd->add_option("--horizons", horizons, "comma-separated horizons T to sweep")->delimiter(',');
  rate_flags.preset_name = "rate-robust";

  auto* presets_cmd = app.add_subcommand("presets", "list presets, or print one as JSON");
  std::string show;
  presets_cmd->add_option("name", show);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(run_flags);
    if (*verify_cmd) return cmd_verify(verify_flags);
    if (*rate_cmd) return cmd_rate(rate_flags, horizons, synthetic, svg);
    if (*presets_cmd) {
      if (show.empty())
        for (const auto& n : preset_names()) std::cout << n << "\n";
      else
        std::cout << to_json(preset(show)).dump(2) << "\n";
      return 0;
    }
  } catch (const ArgumentError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
