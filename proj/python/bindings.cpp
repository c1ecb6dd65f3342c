#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gictmdp/bellman.hpp"
#include "gictmdp/errors.hpp"
#include "gictmdp/json_io.hpp"
#include "gictmdp/lp.hpp"
#include "gictmdp/model.hpp"
#include "gictmdp/poisson.hpp"
#include "gictmdp/reduction.hpp"
#include "gictmdp/sim.hpp"

namespace py = pybind11;
using namespace gictmdp;

namespace {

StationaryPolicy policy_from_rows(Mat rows) {
    StationaryPolicy pol;
    pol.rows = std::move(rows);
    return pol;
}

StationaryStrategy strategy_from_parts(Vec w_imp, Mat beta, Mat f_hat) {
    StationaryStrategy s;
    s.w_imp = std::move(w_imp);
    s.beta = std::move(beta);
    s.f_hat = std::move(f_hat);
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Constrained gradual-impulsive CTMDP solver core";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_KeyError);
    py::register_exception<DivergesError>(m, "DivergesError", PyExc_RuntimeError);
    py::register_exception<ZenoDetected>(m, "ZenoDetected", PyExc_RuntimeError);
    py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_RuntimeError);
    py::register_exception<UnconvergedError>(m, "UnconvergedError", PyExc_RuntimeError);

    py::class_<GradualImpulsiveModel>(m, "GradualImpulsiveModel")
        .def_readonly("states", &GradualImpulsiveModel::states)
        .def_readonly("gradual_actions", &GradualImpulsiveModel::gradual_actions)
        .def_readonly("impulse_actions", &GradualImpulsiveModel::impulse_actions)
        .def_readonly("bounds", &GradualImpulsiveModel::bounds)
        .def_readonly("cost_count", &GradualImpulsiveModel::cost_count)
        .def_readonly("x0", &GradualImpulsiveModel::x0)
        .def("rate", &GradualImpulsiveModel::rate)
        .def("to_json", [](const GradualImpulsiveModel& mm) { return gi_model_to_json(mm); });

    py::class_<StandardModel>(m, "StandardModel")
        .def_readonly("states", &StandardModel::states)
        .def_readonly("bounds", &StandardModel::bounds)
        .def_readonly("cost_count", &StandardModel::cost_count)
        .def_readonly("x0", &StandardModel::x0)
        .def_property_readonly("actions",
                               [](const StandardModel& mm) {
                                   std::vector<std::pair<std::string, std::string>> out;
                                   for (const auto& a : mm.actions)
                                       out.emplace_back(a.name, a.kind == ActionKind::Gradual
                                                                    ? "gradual"
                                                                    : "impulsive");
                                   return out;
                               })
        .def("rate", &StandardModel::rate)
        .def("to_json", [](const StandardModel& mm) { return standard_model_to_json(mm); });

    py::class_<StationaryPolicy>(m, "StationaryPolicy")
        .def(py::init(&policy_from_rows), py::arg("rows"))
        .def_readonly("rows", &StationaryPolicy::rows);

    py::class_<StationaryStrategy>(m, "StationaryStrategy")
        .def(py::init(&strategy_from_parts), py::arg("w_imp"), py::arg("beta"), py::arg("f_hat"))
        .def_readonly("w_imp", &StationaryStrategy::w_imp)
        .def_readonly("beta", &StationaryStrategy::beta)
        .def_readonly("f_hat", &StationaryStrategy::f_hat);

    py::class_<JumpLaw>(m, "JumpLaw")
        .def_readonly("next", &JumpLaw::next)
        .def_readonly("absorb", &JumpLaw::absorb)
        .def_readonly("sojourn_cost", &JumpLaw::sojourn_cost)
        .def_readonly("mean_sojourn", &JumpLaw::mean_sojourn)
        .def_readonly("trunc_error", &JumpLaw::trunc_error);

    py::class_<ValidationReport>(m, "ValidationReport")
        .def("pass_", &ValidationReport::pass)
        .def("summary", &ValidationReport::summary)
        .def("__bool__", &ValidationReport::pass);

    py::class_<BellmanResult>(m, "BellmanResult")
        .def_readonly("v", &BellmanResult::v)
        .def_readonly("f_star", &BellmanResult::f_star)
        .def_readonly("iterations", &BellmanResult::iterations)
        .def_readonly("residual", &BellmanResult::residual)
        .def("R", &BellmanResult::R);

    py::class_<EvaluationResult>(m, "EvaluationResult")
        .def_readonly("W", &EvaluationResult::W)
        .def_readonly("w", &EvaluationResult::w)
        .def_readonly("iterations", &EvaluationResult::iterations)
        .def_readonly("max_trunc_error", &EvaluationResult::max_trunc_error);

    py::class_<LpSolution>(m, "LpSolution")
        .def_readonly("nu", &LpSolution::nu)
        .def_readonly("objective", &LpSolution::objective)
        .def_readonly("balance_residual", &LpSolution::balance_residual)
        .def_readonly("slacks", &LpSolution::slacks)
        .def_property_readonly("status", [](const LpSolution& sol) {
            switch (sol.status) {
                case LpStatus::Optimal: return "optimal";
                case LpStatus::Infeasible: return "infeasible";
                case LpStatus::Unbounded: return "unbounded";
            }
            return "unknown";
        });

    py::class_<ConstrainedSolution>(m, "ConstrainedSolution")
        .def_readonly("value", &ConstrainedSolution::value)
        .def_readonly("strategy", &ConstrainedSolution::strategy)
        .def_readonly("policy", &ConstrainedSolution::policy)
        .def_readonly("lp", &ConstrainedSolution::lp)
        .def_readonly("trivial", &ConstrainedSolution::trivial)
        .def_readonly("evaluation", &ConstrainedSolution::evaluation)
        .def_readonly("check_pass", &ConstrainedSolution::check_pass)
        .def("to_json", [](const ConstrainedSolution& sol, const GradualImpulsiveModel& mm) {
            return solution_to_json(sol, mm, reduce_model(mm));
        });

    py::class_<PseudoPoissonPolicy>(m, "PseudoPoissonPolicy")
        .def_readonly("lambda_", &PseudoPoissonPolicy::lambda);
    py::class_<PoissonStrategy>(m, "PoissonStrategy")
        .def_readonly("lambda_", &PoissonStrategy::lambda);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("episodes", &SimConfig::episodes)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("max_jumps", &SimConfig::max_jumps)
        .def_readwrite("time_horizon", &SimConfig::time_horizon)
        .def_readwrite("max_impulse_chain", &SimConfig::max_impulse_chain)
        .def_readwrite("lambda_", &SimConfig::lambda);

    py::class_<SimEstimate>(m, "SimEstimate")
        .def_readonly("mean", &SimEstimate::mean)
        .def_readonly("std_error", &SimEstimate::std_error)
        .def_readonly("truncated_episode_count", &SimEstimate::truncated_episode_count)
        .def_readonly("episodes", &SimEstimate::episodes);

    m.def("builtin_model", &builtin_model, py::arg("name"));
    m.def("builtin_paper_example", &builtin_paper_example, py::arg("truncation") = 4);
    m.def("parse_model", &parse_gi_model, py::arg("json_text"));
    m.def("validate_gi_model", &validate_gi_model);
    m.def("reduce_model", &reduce_model);
    m.def(
        "lift_stationary_policy",
        [](const StationaryPolicy& pol, const GradualImpulsiveModel& mm) {
            return lift_stationary_policy(pol, mm);
        },
        py::arg("policy"), py::arg("model"));
    m.def(
        "strategy_jump_law",
        [](const GradualImpulsiveModel& mm, const StationaryStrategy& s, int x) {
            return strategy_jump_law(mm, s, x);
        },
        py::arg("model"), py::arg("strategy"), py::arg("state"));
    m.def(
        "policy_jump_law",
        [](const StandardModel& mgo, const StationaryPolicy& pol, int x) {
            return go_jump_law(mgo, x, TimeSchedule::constant(pol.rows.at(static_cast<size_t>(x))));
        },
        py::arg("model"), py::arg("policy"), py::arg("state"));
    m.def(
        "compute_vstar",
        [](const StandardModel& mgo, Real epsilon, Real tol) {
            BellmanOptions opts;
            opts.epsilon = epsilon;
            opts.tol = tol;
            return compute_vstar(mgo, opts);
        },
        py::arg("model"), py::arg("epsilon") = 1.0, py::arg("tol") = 1e-12);
    m.def(
        "evaluate_policy",
        [](const StandardModel& mgo, const StationaryPolicy& pol, int x0) {
            return evaluate_policy(mgo, pol, x0);
        },
        py::arg("model"), py::arg("policy"), py::arg("x0"));
    m.def(
        "evaluate_strategy",
        [](const GradualImpulsiveModel& mm, const StationaryStrategy& s, int x0) {
            return evaluate_strategy(mm, s, x0);
        },
        py::arg("model"), py::arg("strategy"), py::arg("x0"));
    m.def(
        "evaluate_poisson_strategy",
        [](const GradualImpulsiveModel& mm, const PoissonStrategy& s, int x0) {
            return evaluate_strategy(mm, s, x0);
        },
        py::arg("model"), py::arg("strategy"), py::arg("x0"));
    m.def("solve_constrained_problem",
          [](const GradualImpulsiveModel& mm) { return solve_constrained_problem(mm); },
          py::arg("model"));
    m.def(
        "build_pseudo_policy",
        [](const StandardModel& mgo, const StationaryPolicy& pol, Real lambda) {
            return build_pseudo_policy(mgo, MarkovPolicy::constant(pol), lambda);
        },
        py::arg("model"), py::arg("constant_kernel"), py::arg("lambda_") = 1.0,
        "Pseudo-Poisson policy replicating a constant-in-time Markov kernel");
    m.def("build_poisson_strategy", &build_poisson_strategy, py::arg("model"),
          py::arg("pseudo_policy"));
    m.def(
        "simulate_policy",
        [](const StandardModel& mgo, const StationaryPolicy& pol, int x0, const SimConfig& cfg) {
            return simulate_policy(mgo, pol, x0, cfg);
        },
        py::arg("model"), py::arg("policy"), py::arg("x0"), py::arg("config"));
    m.def(
        "simulate_pseudo_policy",
        [](const StandardModel& mgo, const PseudoPoissonPolicy& pol, int x0, const SimConfig& cfg) {
            return simulate_policy(mgo, pol, x0, cfg);
        },
        py::arg("model"), py::arg("policy"), py::arg("x0"), py::arg("config"));
    m.def(
        "simulate_strategy",
        [](const GradualImpulsiveModel& mm, const StationaryStrategy& s, int x0,
           const SimConfig& cfg) { return simulate_strategy(mm, s, x0, cfg); },
        py::arg("model"), py::arg("strategy"), py::arg("x0"), py::arg("config"));
    m.def(
        "simulate_poisson_strategy",
        [](const GradualImpulsiveModel& mm, const PoissonStrategy& s, int x0, const SimConfig& cfg) {
            return simulate_strategy(mm, s, x0, cfg);
        },
        py::arg("model"), py::arg("strategy"), py::arg("x0"), py::arg("config"));

    m.attr("__version__") = "0.1.0";
}
