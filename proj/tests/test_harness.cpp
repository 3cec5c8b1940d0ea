#include <doctest.h>

#include "wcxopt/errors.hpp"
#include "wcxopt/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wcx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wcxopt_test_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> keys(const json& j) {
  std::vector<std::string> out;
  for (const auto& [k, v] : j.items()) out.push_back(k);
  return out;
}

// File list, CSV headers, checkpoint steps and JSON key sets of a run directory.
json layout(const fs::path& root) {
  json files = json::array();
  std::vector<std::string> names;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) names.push_back(fs::relative(e.path(), root).generic_string());
  std::sort(names.begin(), names.end());
  for (const auto& n : names) files.push_back(n);

  const json meta = json::parse(slurp(root / "meta.json"));
  json out = {{"files", files},
              {"meta_keys", keys(meta)},
              {"config_keys", keys(meta["config"])},
              {"constants_keys", keys(meta["constants"])}};
  for (const auto& n : names) {
    if (n.ends_with("trajectory.csv")) {
      const auto rows = lines(slurp(root / n));
      json steps = json::array();
      for (std::size_t i = 1; i < rows.size(); ++i) steps.push_back(std::stoll(rows[i].substr(0, rows[i].find(','))));
      out["csv_header"] = rows.at(0);
      out["csv_steps"][n] = steps;
    } else if (n.ends_with("tstar.json")) {
      const json t = json::parse(slurp(root / n));
      out["tstar_keys"] = keys(t);
      out["tstar_report_keys"] = keys(t["report"]);
    }
  }
  return out;
}

RunConfig small_config() {
  RunConfig c = preset("robust-reg-small");
  c.T = 200;
  c.checkpoint_count = 6;
  c.seeds = {0, 1};
  return c;
}

}  // namespace

TEST_CASE("checkpoints are sorted, unique and contain both ends") {
  for (std::int64_t T : {1, 2, 7, 1000, 100000}) {
    const auto c = log_spaced_checkpoints(T, 30);
    CHECK(c.front() == 1);
    CHECK(c.back() == T);
    CHECK(std::is_sorted(c.begin(), c.end()));
    CHECK(std::adjacent_find(c.begin(), c.end()) == c.end());
  }
  CHECK_THROWS_AS(log_spaced_checkpoints(0, 3), ArgumentError);
}

TEST_CASE("a horizon of one step") {
  const auto p = build_problem(preset("robust-reg-small").problem);
  OptimizerConfig c;
  c.delta = 1.0;
  RunOptions o;
  o.T = 1;
  o.checkpoints = {1};
  o.moreau = default_moreau_config(p, c);
  o.moreau.inner_tol = 1e-4;
  for (std::uint64_t s = 0; s < 20; ++s) {
    o.seeds = RunSeeds::from(s);
    const auto r = run(p, c, o);
    CHECK(r.t_star == 1);
    CHECK(r.records.size() == 1);
  }
  const auto csv = trajectory_csv(run(p, c, o).records);
  CHECK(lines(csv).size() == 2);
}

TEST_CASE("identical seeds give identical trajectories") {
  const RunConfig c = small_config();
  const auto p = build_problem(c.problem);
  const auto rc = resolve(c, p);
  const auto a = run(p, rc.optimizer, run_options(rc, 3));
  const auto b = run(p, rc.optimizer, run_options(rc, 3));
  CHECK(trajectory_csv(a.records) == trajectory_csv(b.records));
  CHECK(a.t_star == b.t_star);
  CHECK(a.x_tstar == b.x_tstar);
  const auto other = run(p, rc.optimizer, run_options(rc, 4));
  CHECK(trajectory_csv(a.records) != trajectory_csv(other.records));
  CHECK(RunSeeds::from(3).sampling != RunSeeds::from(3).output);
}

TEST_CASE("run preconditions") {
  const RunConfig c = small_config();
  const auto p = build_problem(c.problem);
  auto o = run_options(resolve(c, p), 0);
  o.checkpoints = {0, 5};
  CHECK_THROWS_AS(run(p, c.optimizer, o), ArgumentError);
  o.checkpoints = {c.T + 1};
  CHECK_THROWS_AS(run(p, c.optimizer, o), ArgumentError);
  o.checkpoints = {};
  o.T = 0;
  CHECK_THROWS_AS(run(p, c.optimizer, o), ArgumentError);

  // A prox failure is reported with the step it happened at.
  o.T = 5;
  o.moreau.inner_tol = 1e-15;
  o.moreau.inner_max_iters = 5;
  o.moreau.inner_restarts = 0;
  try {
    run(p, c.optimizer, o);
    FAIL("expected a ProxError");
  } catch (const ProxError& e) {
    CHECK(std::string(e.what()).starts_with("step 1: "));
  }
}

TEST_CASE("configuration JSON round trip") {
  for (const auto& name : preset_names()) {
    const RunConfig c = preset(name);
    const json j = to_json(c);
    CHECK(run_config_from_json(j) == c);
    CHECK(run_config_from_json(json::parse(j.dump())) == c);
    const auto p = build_problem(c.problem);
    const auto r = resolve(c, p);
    CHECK(resolve(r, p) == r);
    CHECK(r.moreau.rho_bar);
    CHECK_NOTHROW(validate(r, p));
  }
  CHECK_THROWS_AS(preset("nope"), ArgumentError);

  json j = to_json(preset("robust-reg-small"));
  j["optimiser"] = "typo";
  CHECK_THROWS_AS(run_config_from_json(j), ArgumentError);

  const double inf = std::numeric_limits<double>::infinity();
  const auto half = ConvexSet::box(Eigen::Vector2d(0, -inf), Eigen::Vector2d(inf, 1));
  const json sj = to_json(half);
  CHECK(sj["upper"][0].is_null());
  CHECK(set_from_json(json::parse(sj.dump()), 2) == half);
}

TEST_CASE("meta.json round trips its configuration") {
  const RunConfig c = small_config();
  const auto p = build_problem(c.problem);
  const auto rc = resolve(c, p);
  const auto dir = scratch("meta");
  CHECK(write_run_directory(dir.string(), p, rc, run_seeds(p, rc, 1)));
  const json meta = json::parse(slurp(dir / "meta.json"));
  CHECK(meta["artifact_version"] == kArtifactVersion);
  CHECK(run_config_from_json(meta["config"]) == rc);
  CHECK(meta["constants"]["G"].get<double>() == p.G);
  fs::remove_all(dir);
}

TEST_CASE("validation catches gamma >= 1 and bad moreau settings") {
  RunConfig c = preset("robust-reg-small");
  const auto p = build_problem(c.problem);
  c.optimizer.beta2 = 0.5;
  CHECK_THROWS_AS(validate(c, p), ArgumentError);
  c = preset("robust-reg-small");
  c.moreau.rho_bar = 0.5;  // below rho_hat = 1
  CHECK_THROWS_AS(validate(c, p), ArgumentError);
  c = preset("robust-reg-small");
  c.checkpoints = {c.T + 5};
  CHECK_THROWS_AS(validate(c, p), ArgumentError);
}

TEST_CASE("CSV layout") {
  TrajectoryRecord r;
  r.t = 3;
  r.alpha_t = 0.1;
  r.f_x = 1.0 / 3.0;
  const auto rows = lines(trajectory_csv({r, r}));
  CHECK(rows.size() == 3);
  CHECK(rows[0] ==
        "t,alpha_t,f_x,phi_x,phi_x_hat,dist_sq_weighted,moreau_grad_sq,subdiff_dist_sq_bound,"
        "vhat_min,vhat_max,vhat_sqrt_sum,lemma_lhs_running");
  // Shortest round-trip formatting.
  CHECK(rows[1].starts_with("3,0.1,0.3333333333333333,"));
  CHECK(std::stod(rows[1].substr(6, 18)) == 1.0 / 3.0);
}

TEST_CASE("run directory is deterministic and independent of the worker count") {
  const RunConfig c = small_config();
  const auto p = build_problem(c.problem);
  const auto rc = resolve(c, p);
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  CHECK(write_run_directory(d1.string(), p, rc, run_seeds(p, rc, 1)));
  CHECK(write_run_directory(d2.string(), p, rc, run_seeds(p, rc, 2)));
  for (const auto& e : fs::recursive_directory_iterator(d1)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), d1);
    CHECK_MESSAGE(slurp(e.path()) == slurp(d2 / rel), rel.string());
  }
  CHECK_FALSE(fs::exists(d1 / "PARTIAL"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("failed seeds leave a partial marker") {
  const RunConfig c = small_config();
  const auto p = build_problem(c.problem);
  const auto rc = resolve(c, p);
  auto runs = run_seeds(p, rc, 1);
  runs[1].result.reset();
  runs[1].error = "synthetic failure";
  const auto dir = scratch("partial");
  CHECK_FALSE(write_run_directory(dir.string(), p, rc, runs));
  CHECK(fs::exists(dir / "PARTIAL"));
  CHECK(slurp(dir / "PARTIAL").find("synthetic failure") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("robust-reg-small layout matches the frozen golden file") {
  const RunConfig c = preset("robust-reg-small");
  const auto p = build_problem(c.problem);
  const auto rc = resolve(c, p);
  const auto dir = scratch("golden");
  REQUIRE(write_run_directory(dir.string(), p, rc, run_seeds(p, rc, 1)));
  const json got = layout(dir);
  const fs::path golden = fs::path(WCXOPT_GOLDEN_DIR) / "robust-reg-small.layout.json";
  if (std::getenv("WCXOPT_UPDATE_GOLDEN")) {
    std::ofstream(golden) << got.dump(2) << "\n";
  }
  REQUIRE(fs::exists(golden));
  const json want = json::parse(slurp(golden));
  CHECK(got == want);
  fs::remove_all(dir);
}

TEST_CASE("rate sweep") {
  RunConfig c = preset("rate-robust");
  const auto p = build_problem(c.problem);
  const auto rc = resolve(c, p);
  const auto syn = rate_sweep(p, rc, 1, true);
  CHECK(std::abs(syn.fit.slope + 0.5) <= 1e-6);
  CHECK(syn.pass);
  CHECK(lines(rate_csv(syn)).size() == rc.rate_T.size() + 1);
  CHECK(rate_summary_json(syn)["pass"] == true);
  CHECK(rate_svg(syn).starts_with("<svg"));

  RunConfig single = rc;
  single.rate_T = {1000};
  CHECK_THROWS_AS(rate_sweep(p, single, 1, true), ArgumentError);
}

TEST_CASE("theorem report refuses momentum SGD") {
  RunConfig c = small_config();
  c.optimizer.variant = Variant::MomentumSGD;
  const auto p = build_problem(c.problem);
  CHECK_THROWS_AS(theorem_report(p, resolve(c, p), {}), ArgumentError);
}

TEST_CASE("parallel map keeps order and rethrows") {
  const auto sq = parallel_map<int>(50, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < 50; ++i) CHECK(sq[i] == static_cast<int>(i * i));
  CHECK_THROWS_AS(parallel_map<int>(10, 3,
                                    [](std::size_t i) -> int {
                                      if (i == 7) throw ArgumentError("seven");
                                      return 0;
                                    }),
                  ArgumentError);
}

TEST_CASE("verify report shape") {
  const auto j = verify_report_json({{"a", true, json::object()}, {"b", false, json::object()}});
  CHECK(j["pass"] == false);
  CHECK(j["failed"] == json::array({"b"}));
}
