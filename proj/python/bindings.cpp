#include "wcxopt/analysis.hpp"
#include "wcxopt/errors.hpp"
#include "wcxopt/experiment.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wcx;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adaptive stochastic methods for weakly convex problems";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ConvexSet>(m, "ConvexSet")
      .def_static("free_space", &ConvexSet::free_space)
      .def_static("box", py::overload_cast<Eigen::VectorXd, Eigen::VectorXd>(&ConvexSet::box), py::arg("lower"),
                  py::arg("upper"))
      .def_static("ball", &ConvexSet::ball, py::arg("center"), py::arg("radius"))
      .def_static("simplex", &ConvexSet::simplex, py::arg("dim"), py::arg("scale") = 1.0)
      .def_property_readonly("kind", &ConvexSet::kind_name)
      .def("contains", &ConvexSet::contains, py::arg("x"), py::arg("tol") = 1e-12)
      .def("support", &ConvexSet::support)
      .def("__eq__", &ConvexSet::operator==)
      .def("__repr__", [](const ConvexSet& s) { return "ConvexSet(" + to_json(s).dump() + ")"; });

  m.def("project", &project, py::arg("set"), py::arg("y"));
  m.def(
      "project_weighted",
      [](const ConvexSet& s, const Eigen::VectorXd& w, const Eigen::VectorXd& y) {
        return project_weighted(s, Weights(w), y);
      },
      py::arg("set"), py::arg("w"), py::arg("y"));
  m.def(
      "weighted_norm_sq", [](const Eigen::VectorXd& x, const Eigen::VectorXd& w) { return weighted_norm_sq(x, Weights(w)); },
      py::arg("x"), py::arg("w"));

  py::enum_<ProblemKind>(m, "ProblemKind")
      .value("RobustRegression", ProblemKind::RobustRegression)
      .value("PhaseRetrieval", ProblemKind::PhaseRetrieval)
      .value("ConstrainedQuadratic", ProblemKind::ConstrainedQuadratic);

  py::class_<ProblemInstance>(m, "ProblemInstance")
      .def_readonly("kind", &ProblemInstance::kind)
      .def_readonly("features", &ProblemInstance::features)
      .def_readonly("targets", &ProblemInstance::targets)
      .def_readonly("set", &ProblemInstance::set)
      .def_readonly("rho", &ProblemInstance::rho)
      .def_readonly("rho_min", &ProblemInstance::rho_min)
      .def_readonly("G", &ProblemInstance::G)
      .def_readonly("f_star", &ProblemInstance::f_star)
      .def_readonly("L", &ProblemInstance::L)
      .def_readonly("planted", &ProblemInstance::planted)
      .def_property_readonly("dim", &ProblemInstance::dim)
      .def_property_readonly("n_samples", &ProblemInstance::n_samples);

  m.def(
      "make_problem",
      [](ProblemKind kind, Eigen::Index dim, Eigen::Index n, const ConvexSet& set, std::uint64_t seed,
         std::optional<double> rho, std::optional<double> radius) {
        ProblemOptions o;
        o.rho_declared = rho;
        o.operating_radius = radius;
        return make_problem(kind, dim, n, set, seed, o);
      },
      py::arg("kind"), py::arg("dim"), py::arg("n_samples"), py::arg("set") = ConvexSet(), py::arg("seed") = 0,
      py::arg("rho_declared") = py::none(), py::arg("operating_radius") = py::none());
  m.def(
      "make_problem_from_data",
      [](ProblemKind kind, Eigen::MatrixXd A, Eigen::VectorXd b, const ConvexSet& set, std::optional<double> rho,
         std::optional<double> radius) {
        ProblemOptions o;
        o.rho_declared = rho;
        o.operating_radius = radius;
        return make_problem_from_data(kind, std::move(A), std::move(b), set, o);
      },
      py::arg("kind"), py::arg("features"), py::arg("targets"), py::arg("set") = ConvexSet(),
      py::arg("rho_declared") = py::none(), py::arg("operating_radius") = py::none());
  m.def("full_objective", &full_objective);
  m.def("full_subgrad", &full_subgrad);
  m.def("stoch_subgrad", py::overload_cast<const ProblemInstance&, const Point&, Eigen::Index>(&stoch_subgrad));

  py::enum_<Variant>(m, "Variant")
      .value("AMSGrad", Variant::AMSGrad)
      .value("RMSpropVariant", Variant::RMSpropVariant)
      .value("MomentumSGD", Variant::MomentumSGD)
      .value("ScalarAdaGrad", Variant::ScalarAdaGrad);

  py::class_<OptimizerConfig>(m, "OptimizerConfig")
      .def(py::init([](Variant v, double alpha, double beta1, double beta2, double delta) {
             OptimizerConfig c;
             c.variant = v;
             c.alpha = alpha;
             c.beta1 = beta1;
             c.beta2 = beta2;
             c.delta = delta;
             return c;
           }),
           py::arg("variant") = Variant::AMSGrad, py::arg("alpha") = 0.1, py::arg("beta1") = 0.9,
           py::arg("beta2") = 0.999, py::arg("delta") = 1e-8)
      .def_readwrite("variant", &OptimizerConfig::variant)
      .def_readwrite("alpha", &OptimizerConfig::alpha)
      .def_readwrite("beta1", &OptimizerConfig::beta1)
      .def_readwrite("beta2", &OptimizerConfig::beta2)
      .def_readwrite("delta", &OptimizerConfig::delta)
      .def_property_readonly("gamma", &OptimizerConfig::gamma)
      .def("validate", &OptimizerConfig::validate);

  py::class_<MomentState>(m, "MomentState")
      .def_readonly("t", &MomentState::t)
      .def_readonly("x", &MomentState::x)
      .def_readonly("m", &MomentState::m)
      .def_readonly("v", &MomentState::v)
      .def_readonly("v_hat", &MomentState::v_hat)
      .def_readonly("moment_sum", &MomentState::moment_sum);
  m.def("initial_state", &initial_state, py::arg("config"), py::arg("set"), py::arg("x1"));
  m.def("step", &step, py::arg("state"), py::arg("g"), py::arg("config"), py::arg("set"));

  py::class_<MoreauConfig>(m, "MoreauConfig")
      .def(py::init([](double rho_bar, int iters, double tol, int restarts, bool inexact) {
             return MoreauConfig{rho_bar, iters, tol, restarts, inexact};
           }),
           py::arg("rho_bar") = 1.0, py::arg("inner_max_iters") = 5000, py::arg("inner_tol") = 1e-6,
           py::arg("inner_restarts") = 3, py::arg("accept_inexact") = false)
      .def_readwrite("rho_bar", &MoreauConfig::rho_bar)
      .def_readwrite("inner_tol", &MoreauConfig::inner_tol)
      .def_readwrite("accept_inexact", &MoreauConfig::accept_inexact);

  py::class_<StationarityReport>(m, "StationarityReport")
      .def_readonly("x_hat", &StationarityReport::x_hat)
      .def_readonly("dist_sq", &StationarityReport::dist_sq)
      .def_readonly("dist_sq_weighted", &StationarityReport::dist_sq_weighted)
      .def_readonly("moreau_grad_sq", &StationarityReport::moreau_grad_sq)
      .def_readonly("subdiff_dist_sq_bound", &StationarityReport::subdiff_dist_sq_bound)
      .def_readonly("phi_x", &StationarityReport::phi_x)
      .def_readonly("phi_x_hat", &StationarityReport::phi_x_hat)
      .def_readonly("inner_residual", &StationarityReport::inner_residual);

  m.def(
      "prox_point",
      [](const ProblemInstance& p, const Point& x, const Eigen::VectorXd& w, const MoreauConfig& c) {
        const auto r = prox_point(p, x, Weights(w), c);
        return py::make_tuple(r.x_hat, r.residual);
      },
      py::arg("problem"), py::arg("x"), py::arg("w"), py::arg("config"));
  m.def(
      "stationarity_report",
      [](const ProblemInstance& p, const Point& x, const Eigen::VectorXd& w, const MoreauConfig& c) {
        return stationarity_report(p, x, Weights(w), c);
      },
      py::arg("problem"), py::arg("x"), py::arg("w"), py::arg("config"));
  m.def(
      "moreau_grad",
      [](const Point& x, const Point& xh, const Eigen::VectorXd& w, double rb) { return moreau_grad(x, xh, Weights(w), rb); },
      py::arg("x"), py::arg("x_hat"), py::arg("w"), py::arg("rho_bar"));
  m.def("gradient_mapping", &gradient_mapping, py::arg("problem"), py::arg("x"), py::arg("v_hat"), py::arg("lam"));

  m.def(
      "momentum_decomposition_check",
      [](const std::vector<Point>& A, const std::vector<Point>& g, double b1) {
        return momentum_decomposition_check(A, g, b1).max_rel;
      },
      py::arg("A"), py::arg("g"), py::arg("beta1"));
  py::class_<RateFit>(m, "RateFit")
      .def_readonly("slope", &RateFit::slope)
      .def_readonly("intercept", &RateFit::intercept)
      .def_readonly("r_squared", &RateFit::r_squared);
  m.def("rate_fit", &rate_fit, py::arg("points"), py::arg("running_min") = true);

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("t", &TrajectoryRecord::t)
      .def_readonly("f_x", &TrajectoryRecord::f_x)
      .def_readonly("moreau_grad_sq", &TrajectoryRecord::moreau_grad_sq)
      .def_readonly("lemma_lhs_running", &TrajectoryRecord::lemma_lhs_running);
  py::class_<RunResult>(m, "RunResult")
      .def_readonly("records", &RunResult::records)
      .def_readonly("t_star", &RunResult::t_star)
      .def_readonly("x_tstar", &RunResult::x_tstar)
      .def_readonly("tstar_report", &RunResult::tstar_report)
      .def_readonly("moment_sum", &RunResult::moment_sum);

  m.def(
      "run_preset",
      [](const std::string& name, std::uint64_t seed, std::optional<std::int64_t> T) {
        RunConfig c = preset(name);
        if (T) {
          c.T = *T;
          c.checkpoints.clear();
        }
        const auto p = build_problem(c.problem);
        validate(c, p);
        const auto rc = resolve(c, p);
        py::gil_scoped_release release;
        return run(p, rc.optimizer, run_options(rc, seed));
      },
      py::arg("name"), py::arg("seed") = 0, py::arg("T") = py::none());
  m.def("preset_names", &preset_names);
  m.def("preset_json", [](const std::string& name) { return to_json(preset(name)).dump(); });
  m.def("verify", [] {
    std::vector<CheckResult> checks;
    {
      py::gil_scoped_release release;
      checks = verify_suite({});
    }
    return verify_report_json(checks).dump();
  });
}
