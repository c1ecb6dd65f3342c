#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gictmdp/bellman.hpp"
#include "gictmdp/errors.hpp"
#include "gictmdp/json_io.hpp"
#include "gictmdp/lp.hpp"
#include "gictmdp/model.hpp"
#include "gictmdp/poisson.hpp"
#include "gictmdp/reduction.hpp"
#include "gictmdp/sim.hpp"
#include "json.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitUsage = 4;

using gictmdp::Real;
using gictmdp::Vec;
using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw gictmdp::ValidationError("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ordered_json json_vec(const Vec& v) {
    ordered_json arr = ordered_json::array();
    for (Real x : v) {
        if (std::isinf(x))
            arr.push_back(x > 0 ? "inf" : "-inf");
        else
            arr.push_back(x);
    }
    return arr;
}

ordered_json law_json(const gictmdp::JumpLaw& law, const std::vector<std::string>& states) {
    ordered_json j;
    ordered_json next = ordered_json::object();
    for (size_t y = 0; y < law.next.size(); ++y)
        if (law.next[y] != 0.0) next[states[y]] = law.next[y];
    j["next"] = next;
    j["absorb"] = law.absorb;
    j["sojourn_cost"] = json_vec(law.sojourn_cost);
    j["mean_sojourn"] = std::isinf(law.mean_sojourn) ? ordered_json("inf")
                                                     : ordered_json(law.mean_sojourn);
    j["trunc_error"] = law.trunc_error;
    return j;
}

struct Report {
    ordered_json doc;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    Report(const std::string& command, ordered_json config) {
        doc["command"] = command;
        doc["config"] = std::move(config);
        doc["version"] = kVersion;
    }
    int finish(ordered_json results, int code = kExitOk) {
        doc["results"] = std::move(results);
        doc["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << doc.dump(2) << std::endl;
        return code;
    }
};

gictmdp::GradualImpulsiveModel load_model(const std::string& path) {
    gictmdp::GradualImpulsiveModel m = gictmdp::parse_gi_model(read_file(path));
    gictmdp::require_valid(gictmdp::validate_gi_model(m), "model '" + path + "'");
    return m;
}

int cmd_validate(const std::string& path) {
    Report report("validate", {{"model", path}});
    gictmdp::GradualImpulsiveModel m = gictmdp::parse_gi_model(read_file(path));
    gictmdp::ValidationReport rep = gictmdp::validate_gi_model(m);
    ordered_json results = ordered_json::parse(gictmdp::validation_report_to_json(rep));
    return report.finish(results, rep.pass() ? kExitOk : kExitValidation);
}

int cmd_reduce(const std::string& path) {
    Report report("reduce", {{"model", path}});
    gictmdp::StandardModel mgo = gictmdp::reduce_model(load_model(path));
    return report.finish(ordered_json::parse(gictmdp::standard_model_to_json(mgo)));
}

int cmd_bellman(const std::string& path, Real epsilon, Real tol) {
    Report report("bellman", {{"model", path}, {"epsilon", epsilon}, {"tol", tol}});
    gictmdp::StandardModel mgo = gictmdp::reduce_model(load_model(path));
    gictmdp::BellmanOptions opts;
    opts.epsilon = epsilon;
    opts.tol = tol;
    gictmdp::BellmanResult res = gictmdp::compute_vstar(mgo, opts);
    return report.finish(ordered_json::parse(gictmdp::bellman_to_json(res, mgo)));
}

int cmd_lp_solve(const std::string& path, Real epsilon) {
    Report report("lp-solve", {{"model", path}, {"epsilon", epsilon}});
    gictmdp::GradualImpulsiveModel m = load_model(path);
    gictmdp::StandardModel mgo = gictmdp::reduce_model(m);
    gictmdp::PipelineOptions opts;
    opts.bellman.epsilon = epsilon;
    gictmdp::ConstrainedSolution sol = gictmdp::solve_constrained_problem(m, opts);
    ordered_json results = ordered_json::parse(gictmdp::solution_to_json(sol, m, mgo));
    if (!sol.trivial && sol.lp.status != gictmdp::LpStatus::Optimal)
        return report.finish(results, kExitInfeasible);
    results["check"] = sol.check_pass ? "PASS" : "FAIL";
    return report.finish(results);
}

int cmd_evaluate(const std::string& path, const std::string& policy_path,
                 const std::string& strategy_path, Real tol) {
    Report report("evaluate",
                  {{"model", path}, {"policy", policy_path}, {"strategy", strategy_path}, {"tol", tol}});
    gictmdp::GradualImpulsiveModel m = load_model(path);
    gictmdp::EvalOptions opts;
    opts.tol = tol;
    ordered_json results;
    if (!policy_path.empty()) {
        gictmdp::StandardModel mgo = gictmdp::reduce_model(m);
        gictmdp::StationaryPolicy pol = gictmdp::parse_policy(read_file(policy_path), mgo);
        gictmdp::require_valid(gictmdp::validate_policy(mgo, pol), "policy");
        results = ordered_json::parse(
            gictmdp::evaluation_to_json(gictmdp::evaluate_policy(mgo, pol, m.x0, opts)));
    } else {
        gictmdp::StationaryStrategy s = gictmdp::parse_strategy(read_file(strategy_path), m);
        gictmdp::require_valid(gictmdp::validate_strategy(m, s), "strategy");
        results = ordered_json::parse(
            gictmdp::evaluation_to_json(gictmdp::evaluate_strategy(m, s, m.x0, opts)));
    }
    return report.finish(results);
}

int cmd_simulate(const std::string& path, const std::string& policy_path,
                 const std::string& strategy_path, const gictmdp::SimConfig& cfg) {
    Report report("simulate", {{"model", path},
                               {"policy", policy_path},
                               {"strategy", strategy_path},
                               {"episodes", cfg.episodes},
                               {"seed", cfg.seed},
                               {"lambda", cfg.lambda},
                               {"max_jumps", cfg.max_jumps},
                               {"max_impulse_chain", cfg.max_impulse_chain}});
    gictmdp::GradualImpulsiveModel m = load_model(path);
    gictmdp::SimEstimate est;
    if (!policy_path.empty()) {
        gictmdp::StandardModel mgo = gictmdp::reduce_model(m);
        gictmdp::StationaryPolicy pol = gictmdp::parse_policy(read_file(policy_path), mgo);
        gictmdp::require_valid(gictmdp::validate_policy(mgo, pol), "policy");
        est = gictmdp::simulate_policy(mgo, pol, m.x0, cfg);
    } else {
        gictmdp::StationaryStrategy s = gictmdp::parse_strategy(read_file(strategy_path), m);
        gictmdp::require_valid(gictmdp::validate_strategy(m, s), "strategy");
        est = gictmdp::simulate_strategy(m, s, m.x0, cfg);
    }
    return report.finish(ordered_json::parse(gictmdp::estimate_to_json(est)));
}

int cmd_replicate(const std::string& path, const std::string& markov_path, Real lambda,
                  const gictmdp::SimConfig& cfg_in) {
    Report report("replicate", {{"model", path},
                                {"markov", markov_path},
                                {"lambda", lambda},
                                {"episodes", cfg_in.episodes},
                                {"seed", cfg_in.seed}});
    gictmdp::GradualImpulsiveModel m = load_model(path);
    gictmdp::StandardModel mgo = gictmdp::reduce_model(m);
    gictmdp::StationaryPolicy base = gictmdp::parse_policy(read_file(markov_path), mgo);
    gictmdp::require_valid(gictmdp::validate_policy(mgo, base), "markov kernel");
    gictmdp::MarkovPolicy mp = gictmdp::MarkovPolicy::constant(base);

    gictmdp::PseudoPoissonPolicy pp = gictmdp::build_pseudo_policy(mgo, mp, lambda);
    gictmdp::PoissonStrategy ps = gictmdp::build_poisson_strategy(m, pp);

    ordered_json laws = ordered_json::object();
    bool laws_pass = true;
    for (int x = 0; x < m.num_states(); ++x) {
        gictmdp::JumpLaw markov_law =
            gictmdp::go_jump_law(mgo, x, mp.tail_epoch[static_cast<size_t>(x)]);
        gictmdp::JumpLaw pseudo_law =
            gictmdp::pseudo_jump_law(mgo, pp.tail_epoch[static_cast<size_t>(x)].kernels, x, lambda);
        gictmdp::JumpLaw poisson_law =
            gictmdp::poisson_jump_law(m, ps.tail_epoch[static_cast<size_t>(x)], x, lambda);
        ordered_json entry;
        entry["markov"] = law_json(markov_law, m.states);
        entry["pseudo"] = law_json(pseudo_law, m.states);
        entry["poisson"] = law_json(poisson_law, m.states);
        bool ok = true;
        const Real tol = 1e-7 + pseudo_law.trunc_error + poisson_law.trunc_error;
        for (size_t y = 0; y < markov_law.next.size(); ++y) {
            ok = ok && std::abs(markov_law.next[y] - pseudo_law.next[y]) <= tol;
            ok = ok && std::abs(markov_law.next[y] - poisson_law.next[y]) <= tol;
        }
        for (size_t i = 0; i < markov_law.sojourn_cost.size(); ++i) {
            const Real a = markov_law.sojourn_cost[i];
            const Real b = pseudo_law.sojourn_cost[i];
            const Real c = poisson_law.sojourn_cost[i];
            if (std::isinf(a) || std::isinf(b) || std::isinf(c))
                ok = ok && std::isinf(a) && std::isinf(b) && std::isinf(c);
            else
                ok = ok && std::abs(a - b) <= tol && std::abs(a - c) <= tol;
        }
        entry["pass"] = ok;
        laws_pass = laws_pass && ok;
        laws[m.states[static_cast<size_t>(x)]] = entry;
    }

    gictmdp::EvaluationResult w_markov = gictmdp::evaluate_policy(mgo, base, m.x0);
    gictmdp::EvaluationResult w_pseudo = gictmdp::evaluate_policy(mgo, pp, m.x0);
    gictmdp::EvaluationResult w_poisson = gictmdp::evaluate_strategy(m, ps, m.x0);
    const Real w_tol = 1e-7 + w_pseudo.max_trunc_error + w_poisson.max_trunc_error;
    bool w_pass = true;
    for (int i = 0; i < m.cost_count; ++i) {
        const Real a = w_markov.W[static_cast<size_t>(i)];
        const Real b = w_pseudo.W[static_cast<size_t>(i)];
        const Real c = w_poisson.W[static_cast<size_t>(i)];
        if (std::isinf(a) || std::isinf(b) || std::isinf(c))
            w_pass = w_pass && std::isinf(a) && std::isinf(b) && std::isinf(c);
        else
            w_pass = w_pass && std::abs(a - b) <= w_tol && std::abs(a - c) <= w_tol;
    }

    gictmdp::SimConfig cfg = cfg_in;
    cfg.lambda = lambda;
    gictmdp::SimEstimate mc_markov = gictmdp::simulate_policy(mgo, base, m.x0, cfg);
    gictmdp::SimEstimate mc_pseudo = gictmdp::simulate_policy(mgo, pp, m.x0, cfg);
    gictmdp::SimEstimate mc_poisson = gictmdp::simulate_strategy(m, ps, m.x0, cfg);
    auto mc_cover = [&](const gictmdp::SimEstimate& est, const gictmdp::EvaluationResult& exact) {
        bool ok = true;
        for (int i = 0; i < m.cost_count; ++i) {
            const Real w = exact.W[static_cast<size_t>(i)];
            if (std::isinf(w)) continue;
            ok = ok && std::abs(est.mean[static_cast<size_t>(i)] - w) <=
                           3.0 * est.std_error[static_cast<size_t>(i)] + 1e-9;
        }
        return ok;
    };
    const bool mc_pass =
        mc_cover(mc_markov, w_markov) && mc_cover(mc_pseudo, w_pseudo) && mc_cover(mc_poisson, w_poisson);

    ordered_json results;
    results["laws"] = laws;
    results["W_markov"] = json_vec(w_markov.W);
    results["W_pseudo"] = json_vec(w_pseudo.W);
    results["W_poisson"] = json_vec(w_poisson.W);
    results["mc_markov"] = ordered_json::parse(gictmdp::estimate_to_json(mc_markov));
    results["mc_pseudo"] = ordered_json::parse(gictmdp::estimate_to_json(mc_pseudo));
    results["mc_poisson"] = ordered_json::parse(gictmdp::estimate_to_json(mc_poisson));
    results["laws_pass"] = laws_pass;
    results["w_pass"] = w_pass;
    results["mc_pass"] = mc_pass;
    results["pass"] = laws_pass && w_pass && mc_pass;
    return report.finish(results, laws_pass && w_pass && mc_pass ? kExitOk : kExitNumerical);
}

int cmd_example(const std::string& name, int truncate) {
    gictmdp::GradualImpulsiveModel m =
        name == "paper-example" ? gictmdp::builtin_paper_example(truncate) : gictmdp::builtin_model(name);
    std::cout << gictmdp::gi_model_to_json(m);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained gradual-impulsive CTMDP solver and replication checker"};
    app.require_subcommand(1);

    std::string model_path, policy_path, strategy_path, markov_path;
    std::string example_name = "paper-example";
    int truncate = 4;
    Real epsilon = 1.0, tol = 1e-10, eval_tol = 1e-13, lambda = 1.0;
    gictmdp::SimConfig cfg;
    cfg.episodes = 100000;

    CLI::App* validate = app.add_subcommand("validate", "Check a model file against the invariants");
    validate->add_option("model", model_path)->required();

    CLI::App* reduce = app.add_subcommand("reduce", "Emit the induced gradual-only model");
    reduce->add_option("model", model_path)->required();

    CLI::App* bellman = app.add_subcommand("bellman", "Aggregate-cost value function, selector and R");
    bellman->add_option("model", model_path)->required();
    bellman->add_option("--epsilon", epsilon, "Bellman denominator shift")->capture_default_str();
    bellman->add_option("--tol", tol, "Iteration stop tolerance")->capture_default_str();

    CLI::App* lp = app.add_subcommand("lp-solve", "Occupation-measure LP pipeline");
    lp->add_option("model", model_path)->required();
    lp->add_option("--epsilon", epsilon)->capture_default_str();

    CLI::App* evaluate = app.add_subcommand("evaluate", "Exact total expected costs");
    evaluate->add_option("model", model_path)->required();
    CLI::Option* ev_pol = evaluate->add_option("--policy", policy_path, "Stationary policy JSON");
    CLI::Option* ev_str = evaluate->add_option("--strategy", strategy_path, "Stationary strategy JSON");
    evaluate->add_option("--tol", eval_tol)->capture_default_str();
    ev_pol->excludes(ev_str);

    CLI::App* simulate = app.add_subcommand("simulate", "Seeded Monte Carlo estimate");
    simulate->add_option("model", model_path)->required();
    CLI::Option* si_pol = simulate->add_option("--policy", policy_path, "Stationary policy JSON");
    CLI::Option* si_str = simulate->add_option("--strategy", strategy_path, "Stationary strategy JSON");
    simulate->add_option("--episodes", cfg.episodes)->capture_default_str();
    simulate->add_option("--seed", cfg.seed)->capture_default_str();
    simulate->add_option("--lambda", cfg.lambda)->capture_default_str();
    simulate->add_option("--max-jumps", cfg.max_jumps)->capture_default_str();
    simulate->add_option("--max-impulse-chain", cfg.max_impulse_chain)->capture_default_str();
    si_pol->excludes(si_str);

    CLI::App* replicate = app.add_subcommand(
        "replicate", "Markov -> pseudo-Poisson -> Poisson replication chain with checks");
    replicate->add_option("model", model_path)->required();
    replicate->add_option("--markov", markov_path, "Constant Markov kernel (policy JSON)")->required();
    replicate->add_option("--lambda", lambda)->capture_default_str();
    replicate->add_option("--episodes", cfg.episodes)->capture_default_str();
    replicate->add_option("--seed", cfg.seed)->capture_default_str();

    CLI::App* example = app.add_subcommand("example", "Emit a builtin model");
    example->add_option("--name", example_name)->capture_default_str();
    example->add_option("--truncate", truncate, "State count of the builtin example")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(model_path);
        if (reduce->parsed()) return cmd_reduce(model_path);
        if (bellman->parsed()) return cmd_bellman(model_path, epsilon, tol);
        if (lp->parsed()) return cmd_lp_solve(model_path, epsilon);
        if (evaluate->parsed()) {
            if (policy_path.empty() == strategy_path.empty()) {
                std::cerr << "evaluate: exactly one of --policy/--strategy is required\n";
                return kExitUsage;
            }
            return cmd_evaluate(model_path, policy_path, strategy_path, eval_tol);
        }
        if (simulate->parsed()) {
            if (policy_path.empty() == strategy_path.empty()) {
                std::cerr << "simulate: exactly one of --policy/--strategy is required\n";
                return kExitUsage;
            }
            return cmd_simulate(model_path, policy_path, strategy_path, cfg);
        }
        if (replicate->parsed()) return cmd_replicate(model_path, markov_path, lambda, cfg);
        if (example->parsed()) return cmd_example(example_name, truncate);
    } catch (const gictmdp::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const gictmdp::NotFoundError& e) {
        std::cerr << "not found: " << e.what() << "\n";
        return kExitUsage;
    } catch (const gictmdp::TrivialProblem& e) {
        std::cerr << "trivial problem: " << e.what() << "\n";
        return kExitOk;
    } catch (const gictmdp::ZenoDetected& e) {
        std::cerr << "zeno detected: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const gictmdp::DivergesError& e) {
        std::cerr << "diverges: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const gictmdp::UnconvergedError& e) {
        std::cerr << "unconverged: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const gictmdp::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
