#include "gictmdp/json_io.hpp"

#include <cmath>
#include <map>

#include "gictmdp/errors.hpp"
#include "json.hpp"

namespace gictmdp {

using ordered_json = nlohmann::ordered_json;

namespace {

int index_of(const std::vector<std::string>& names, const std::string& name,
             const char* what) {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    throw ValidationError(std::string(what) + ": unknown identifier '" + name + "'");
}

std::vector<std::string> parse_name_list(const ordered_json& j, const char* key) {
    std::vector<std::string> names;
    if (!j.contains(key)) return names;
    if (!j[key].is_array()) throw ValidationError(std::string(key) + " must be an array");
    for (const auto& v : j[key]) {
        if (!v.is_string()) throw ValidationError(std::string(key) + " entries must be strings");
        names.push_back(v.get<std::string>());
    }
    return names;
}

std::pair<std::string, std::string> split_pair_key(const std::string& key) {
    const size_t slash = key.rfind('/');
    if (slash == std::string::npos)
        throw ValidationError("expected 'state/action' key, got '" + key + "'");
    return {key.substr(0, slash), key.substr(slash + 1)};
}

Real number_at(const ordered_json& v, const char* what) {
    if (!v.is_number()) throw ValidationError(std::string(what) + ": expected a number");
    return v.get<Real>();
}

}  // namespace

GradualImpulsiveModel parse_gi_model(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("model JSON parse error: ") + e.what());
    }

    GradualImpulsiveModel m;
    m.states = parse_name_list(j, "states");
    m.gradual_actions = parse_name_list(j, "gradual_actions");
    m.impulse_actions = parse_name_list(j, "impulse_actions");
    const size_t n = m.states.size();
    const size_t ng = m.gradual_actions.size();
    const size_t ni = m.impulse_actions.size();
    if (n == 0) throw ValidationError("model has no states");

    m.q.assign(n, Mat(ng, Vec(n, 0.0)));
    if (j.contains("q")) {
        for (const auto& [key, row] : j["q"].items()) {
            auto [sname, aname] = split_pair_key(key);
            const int x = index_of(m.states, sname, "q");
            const int a = index_of(m.gradual_actions, aname, "q");
            Real off_sum = 0.0;
            for (const auto& [yname, v] : row.items()) {
                const int y = index_of(m.states, yname, "q");
                if (y == x) continue;  // diagonal is inferred
                const Real rate = number_at(v, "q");
                m.q[static_cast<size_t>(x)][static_cast<size_t>(a)][static_cast<size_t>(y)] = rate;
                off_sum += rate;
            }
            m.q[static_cast<size_t>(x)][static_cast<size_t>(a)][static_cast<size_t>(x)] = -off_sum;
        }
    }

    m.Q.assign(n, Mat(ni, Vec(n, 0.0)));
    if (j.contains("Q")) {
        for (const auto& [key, row] : j["Q"].items()) {
            auto [sname, bname] = split_pair_key(key);
            const int x = index_of(m.states, sname, "Q");
            const int b = index_of(m.impulse_actions, bname, "Q");
            for (const auto& [yname, v] : row.items()) {
                const int y = index_of(m.states, yname, "Q");
                m.Q[static_cast<size_t>(x)][static_cast<size_t>(b)][static_cast<size_t>(y)] = number_at(v, "Q");
            }
        }
    }

    if (j.contains("bounds"))
        for (const auto& v : j["bounds"]) m.bounds.push_back(number_at(v, "bounds"));
    m.cost_count = static_cast<int>(m.bounds.size()) + 1;

    auto parse_costs = [&](const char* key, std::vector<Mat>& out, bool gradual) {
        out.assign(static_cast<size_t>(m.cost_count), Mat(n, Vec(gradual ? ng : ni, 0.0)));
        if (!j.contains(key)) return;
        const auto& arr = j[key];
        if (!arr.is_array()) throw ValidationError(std::string(key) + " must be an array");
        if (static_cast<int>(arr.size()) > m.cost_count)
            throw ValidationError(std::string(key) + " has more entries than cost indices");
        for (size_t i = 0; i < arr.size(); ++i) {
            for (const auto& [pair, v] : arr[i].items()) {
                auto [sname, aname] = split_pair_key(pair);
                const int x = index_of(m.states, sname, key);
                const int a = gradual ? index_of(m.gradual_actions, aname, key)
                                      : index_of(m.impulse_actions, aname, key);
                out[i][static_cast<size_t>(x)][static_cast<size_t>(a)] = number_at(v, key);
            }
        }
    };
    parse_costs("costs_g", m.cg, true);
    parse_costs("costs_i", m.ci, false);

    if (!j.contains("x0")) throw ValidationError("model is missing x0");
    if (j["x0"].is_string())
        m.x0 = index_of(m.states, j["x0"].get<std::string>(), "x0");
    else
        m.x0 = j["x0"].get<int>();

    m.default_admissibility();
    if (j.contains("admissible")) {
        for (const auto& [sname, actions] : j["admissible"].items()) {
            const int x = index_of(m.states, sname, "admissible");
            for (size_t a = 0; a < ng; ++a) m.adm_gradual[static_cast<size_t>(x)][a] = 0;
            for (size_t b = 0; b < ni; ++b) m.adm_impulse[static_cast<size_t>(x)][b] = 0;
            for (const auto& v : actions) {
                const std::string name = v.get<std::string>();
                bool found = false;
                for (size_t a = 0; a < ng; ++a)
                    if (m.gradual_actions[a] == name) {
                        m.adm_gradual[static_cast<size_t>(x)][a] = 1;
                        found = true;
                    }
                for (size_t b = 0; b < ni; ++b)
                    if (m.impulse_actions[b] == name) {
                        m.adm_impulse[static_cast<size_t>(x)][b] = 1;
                        found = true;
                    }
                if (!found) throw ValidationError("admissible: unknown action '" + name + "'");
            }
        }
    }
    return m;
}

std::string gi_model_to_json(const GradualImpulsiveModel& m, int indent) {
    ordered_json j;
    j["states"] = m.states;
    j["gradual_actions"] = m.gradual_actions;
    j["impulse_actions"] = m.impulse_actions;

    ordered_json q = ordered_json::object();
    for (int x = 0; x < m.num_states(); ++x)
        for (int a = 0; a < m.num_gradual(); ++a) {
            if (!m.gradual_admissible(x, a)) continue;
            ordered_json row = ordered_json::object();
            for (int y = 0; y < m.num_states(); ++y)
                if (y != x && m.q[static_cast<size_t>(x)][static_cast<size_t>(a)][static_cast<size_t>(y)] != 0.0)
                    row[m.states[static_cast<size_t>(y)]] = m.q[static_cast<size_t>(x)][static_cast<size_t>(a)][static_cast<size_t>(y)];
            if (!row.empty()) q[m.states[static_cast<size_t>(x)] + "/" + m.gradual_actions[static_cast<size_t>(a)]] = row;
        }
    j["q"] = q;

    ordered_json Q = ordered_json::object();
    for (int x = 0; x < m.num_states(); ++x)
        for (int b = 0; b < m.num_impulse(); ++b) {
            if (!m.impulse_admissible(x, b)) continue;
            ordered_json row = ordered_json::object();
            for (int y = 0; y < m.num_states(); ++y)
                if (m.Q[static_cast<size_t>(x)][static_cast<size_t>(b)][static_cast<size_t>(y)] != 0.0)
                    row[m.states[static_cast<size_t>(y)]] = m.Q[static_cast<size_t>(x)][static_cast<size_t>(b)][static_cast<size_t>(y)];
            Q[m.states[static_cast<size_t>(x)] + "/" + m.impulse_actions[static_cast<size_t>(b)]] = row;
        }
    j["Q"] = Q;

    auto emit_costs = [&](const std::vector<Mat>& table, const std::vector<std::string>& actions,
                          bool gradual) {
        ordered_json arr = ordered_json::array();
        for (int i = 0; i < m.cost_count; ++i) {
            ordered_json entry = ordered_json::object();
            for (int x = 0; x < m.num_states(); ++x)
                for (size_t a = 0; a < actions.size(); ++a) {
                    const bool adm = gradual ? m.gradual_admissible(x, static_cast<int>(a))
                                             : m.impulse_admissible(x, static_cast<int>(a));
                    const Real v = table[static_cast<size_t>(i)][static_cast<size_t>(x)][a];
                    if (adm && v != 0.0) entry[m.states[static_cast<size_t>(x)] + "/" + actions[a]] = v;
                }
            arr.push_back(entry);
        }
        return arr;
    };
    j["costs_g"] = emit_costs(m.cg, m.gradual_actions, true);
    j["costs_i"] = emit_costs(m.ci, m.impulse_actions, false);
    j["bounds"] = m.bounds;
    j["x0"] = m.states[static_cast<size_t>(m.x0)];

    ordered_json adm = ordered_json::object();
    for (int x = 0; x < m.num_states(); ++x) {
        bool restricted = false;
        for (int a = 0; a < m.num_gradual(); ++a) restricted = restricted || !m.gradual_admissible(x, a);
        for (int b = 0; b < m.num_impulse(); ++b) restricted = restricted || !m.impulse_admissible(x, b);
        if (!restricted) continue;
        ordered_json list = ordered_json::array();
        for (int a = 0; a < m.num_gradual(); ++a)
            if (m.gradual_admissible(x, a)) list.push_back(m.gradual_actions[static_cast<size_t>(a)]);
        for (int b = 0; b < m.num_impulse(); ++b)
            if (m.impulse_admissible(x, b)) list.push_back(m.impulse_actions[static_cast<size_t>(b)]);
        adm[m.states[static_cast<size_t>(x)]] = list;
    }
    if (!adm.empty()) j["admissible"] = adm;
    return j.dump(indent) + "\n";
}

std::string standard_model_to_json(const StandardModel& m, int indent) {
    ordered_json j;
    j["states"] = m.states;
    ordered_json actions = ordered_json::array();
    for (const auto& a : m.actions)
        actions.push_back({{"name", a.name},
                           {"kind", a.kind == ActionKind::Gradual ? "gradual" : "impulsive"}});
    j["actions"] = actions;
    ordered_json q = ordered_json::object();
    for (int x = 0; x < m.num_states(); ++x)
        for (int a = 0; a < m.num_actions(); ++a) {
            if (!m.admissible(x, a)) continue;
            ordered_json row = ordered_json::object();
            for (int y = 0; y < m.num_states(); ++y)
                if (m.q[static_cast<size_t>(x)][static_cast<size_t>(a)][static_cast<size_t>(y)] != 0.0)
                    row[m.states[static_cast<size_t>(y)]] = m.q[static_cast<size_t>(x)][static_cast<size_t>(a)][static_cast<size_t>(y)];
            q[m.states[static_cast<size_t>(x)] + "/" + m.actions[static_cast<size_t>(a)].name] = row;
        }
    j["q"] = q;
    ordered_json costs = ordered_json::array();
    for (int i = 0; i < m.cost_count; ++i) {
        ordered_json entry = ordered_json::object();
        for (int x = 0; x < m.num_states(); ++x)
            for (int a = 0; a < m.num_actions(); ++a)
                if (m.admissible(x, a) && m.c[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)] != 0.0)
                    entry[m.states[static_cast<size_t>(x)] + "/" + m.actions[static_cast<size_t>(a)].name] =
                        m.c[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)];
        costs.push_back(entry);
    }
    j["costs"] = costs;
    j["bounds"] = m.bounds;
    j["x0"] = m.states[static_cast<size_t>(m.x0)];
    return j.dump(indent) + "\n";
}

namespace {

std::vector<std::string> action_names(const StandardModel& mgo) {
    std::vector<std::string> names;
    names.reserve(mgo.actions.size());
    for (const auto& a : mgo.actions) names.push_back(a.name);
    return names;
}

int first_admissible(const StandardModel& mgo, int x) {
    for (int a = 0; a < mgo.num_actions(); ++a)
        if (mgo.admissible(x, a)) return a;
    throw ValidationError("state " + mgo.states[static_cast<size_t>(x)] + " has no admissible action");
}

}  // namespace

StationaryPolicy parse_policy(const std::string& json_text, const StandardModel& mgo) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("policy JSON parse error: ") + e.what());
    }
    const std::vector<std::string> names = action_names(mgo);
    StationaryPolicy pol;
    pol.rows.assign(mgo.states.size(), Vec(mgo.actions.size(), 0.0));
    std::vector<char> listed(mgo.states.size(), 0);
    for (const auto& [sname, row] : j.items()) {
        const int x = index_of(mgo.states, sname, "policy");
        listed[static_cast<size_t>(x)] = 1;
        for (const auto& [aname, v] : row.items()) {
            const int a = index_of(names, aname, "policy");
            pol.rows[static_cast<size_t>(x)][static_cast<size_t>(a)] = number_at(v, "policy");
        }
    }
    for (int x = 0; x < mgo.num_states(); ++x)
        if (!listed[static_cast<size_t>(x)])
            pol.rows[static_cast<size_t>(x)][static_cast<size_t>(first_admissible(mgo, x))] = 1.0;
    return pol;
}

std::string policy_to_json(const StationaryPolicy& pol, const StandardModel& mgo, int indent) {
    ordered_json j = ordered_json::object();
    for (int x = 0; x < mgo.num_states(); ++x) {
        ordered_json row = ordered_json::object();
        for (int a = 0; a < mgo.num_actions(); ++a)
            if (pol.rows[static_cast<size_t>(x)][static_cast<size_t>(a)] != 0.0)
                row[mgo.actions[static_cast<size_t>(a)].name] = pol.rows[static_cast<size_t>(x)][static_cast<size_t>(a)];
        j[mgo.states[static_cast<size_t>(x)]] = row;
    }
    return j.dump(indent) + "\n";
}

StationaryStrategy parse_strategy(const std::string& json_text, const GradualImpulsiveModel& m) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("strategy JSON parse error: ") + e.what());
    }
    StationaryStrategy s;
    const size_t n = m.states.size();
    s.w_imp.assign(n, 0.0);
    s.beta.assign(n, Vec(m.impulse_actions.size(), 0.0));
    s.f_hat.assign(n, Vec(m.gradual_actions.size(), 0.0));
    for (const auto& [sname, entry] : j.items()) {
        const int x = index_of(m.states, sname, "strategy");
        if (entry.contains("w_imp")) s.w_imp[static_cast<size_t>(x)] = number_at(entry["w_imp"], "w_imp");
        if (entry.contains("beta"))
            for (const auto& [bname, v] : entry["beta"].items())
                s.beta[static_cast<size_t>(x)][static_cast<size_t>(index_of(m.impulse_actions, bname, "beta"))] =
                    number_at(v, "beta");
        if (entry.contains("f_hat"))
            for (const auto& [aname, v] : entry["f_hat"].items())
                s.f_hat[static_cast<size_t>(x)][static_cast<size_t>(index_of(m.gradual_actions, aname, "f_hat"))] =
                    number_at(v, "f_hat");
    }
    // Defaults for unlisted states and empty rows: no impulse, first
    // admissible gradual action, first impulse action as the beta filler.
    for (size_t x = 0; x < n; ++x) {
        Real fsum = 0.0;
        for (Real p : s.f_hat[x]) fsum += p;
        if (fsum == 0.0) {
            for (int a = 0; a < m.num_gradual(); ++a)
                if (m.gradual_admissible(static_cast<int>(x), a)) {
                    s.f_hat[x][static_cast<size_t>(a)] = 1.0;
                    break;
                }
        }
        if (m.num_impulse() > 0) {
            Real bsum = 0.0;
            for (Real p : s.beta[x]) bsum += p;
            if (bsum == 0.0) s.beta[x][0] = 1.0;
        }
    }
    return s;
}

std::string strategy_to_json(const StationaryStrategy& s, const GradualImpulsiveModel& m,
                             int indent) {
    ordered_json j = ordered_json::object();
    for (int x = 0; x < m.num_states(); ++x) {
        ordered_json entry;
        entry["w_imp"] = s.w_imp[static_cast<size_t>(x)];
        ordered_json beta = ordered_json::object();
        for (int b = 0; b < m.num_impulse(); ++b)
            if (s.beta[static_cast<size_t>(x)][static_cast<size_t>(b)] != 0.0)
                beta[m.impulse_actions[static_cast<size_t>(b)]] = s.beta[static_cast<size_t>(x)][static_cast<size_t>(b)];
        entry["beta"] = beta;
        ordered_json fhat = ordered_json::object();
        for (int a = 0; a < m.num_gradual(); ++a)
            if (s.f_hat[static_cast<size_t>(x)][static_cast<size_t>(a)] != 0.0)
                fhat[m.gradual_actions[static_cast<size_t>(a)]] = s.f_hat[static_cast<size_t>(x)][static_cast<size_t>(a)];
        entry["f_hat"] = fhat;
        j[m.states[static_cast<size_t>(x)]] = entry;
    }
    return j.dump(indent) + "\n";
}

std::string validation_report_to_json(const ValidationReport& report, int indent) {
    ordered_json j;
    j["pass"] = report.pass();
    ordered_json issues = ordered_json::array();
    for (const auto& it : report.issues)
        issues.push_back({{"severity", it.severity == Severity::Error ? "error" : "warning"},
                          {"location", it.location},
                          {"message", it.message}});
    j["issues"] = issues;
    return j.dump(indent) + "\n";
}

namespace {

ordered_json finite_or_string(Real v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

ordered_json vec_json(const Vec& v) {
    ordered_json arr = ordered_json::array();
    for (Real x : v) arr.push_back(finite_or_string(x));
    return arr;
}

}  // namespace

std::string evaluation_to_json(const EvaluationResult& result, int indent) {
    ordered_json j;
    j["W"] = vec_json(result.W);
    ordered_json w = ordered_json::array();
    for (const auto& row : result.w) w.push_back(vec_json(row));
    j["w"] = w;
    j["iterations"] = result.iterations;
    j["residual"] = result.residual;
    j["max_trunc_error"] = result.max_trunc_error;
    return j.dump(indent) + "\n";
}

std::string bellman_to_json(const BellmanResult& result, const StandardModel& mgo, int indent) {
    ordered_json j;
    j["v"] = vec_json(result.v);
    ordered_json f = ordered_json::object();
    for (int x = 0; x < mgo.num_states(); ++x)
        f[mgo.states[static_cast<size_t>(x)]] = mgo.actions[static_cast<size_t>(result.f_star[static_cast<size_t>(x)])].name;
    j["f_star"] = f;
    ordered_json r = ordered_json::array();
    for (int x : result.R()) r.push_back(mgo.states[static_cast<size_t>(x)]);
    j["R"] = r;
    j["iterations"] = result.iterations;
    j["residual"] = result.residual;
    return j.dump(indent) + "\n";
}

std::string estimate_to_json(const SimEstimate& est, int indent) {
    ordered_json j;
    j["mean"] = vec_json(est.mean);
    j["std_error"] = vec_json(est.std_error);
    j["episodes"] = est.episodes;
    j["truncated_episode_count"] = est.truncated_episode_count;
    return j.dump(indent) + "\n";
}

std::string solution_to_json(const ConstrainedSolution& sol, const GradualImpulsiveModel& m,
                             const StandardModel& mgo, int indent) {
    ordered_json j;
    j["trivial"] = sol.trivial;
    switch (sol.lp.status) {
        case LpStatus::Optimal: j["status"] = sol.trivial ? "trivial" : "optimal"; break;
        case LpStatus::Infeasible: j["status"] = "infeasible"; break;
        case LpStatus::Unbounded: j["status"] = "unbounded"; break;
    }
    j["value"] = sol.value;
    ordered_json nu = ordered_json::object();
    for (int col = 0; col < sol.lp_model.num_vars(); ++col) {
        const auto [x, a] = sol.lp_model.columns[static_cast<size_t>(col)];
        if (col < static_cast<int>(sol.lp.nu.size()))
            nu[mgo.states[static_cast<size_t>(x)] + "/" + mgo.actions[static_cast<size_t>(a)].name] =
                sol.lp.nu[static_cast<size_t>(col)];
    }
    j["nu"] = nu;
    j["balance_residual"] = sol.lp.balance_residual;
    j["slacks"] = vec_json(sol.lp.slacks);
    if (sol.lp.status == LpStatus::Optimal) {
        j["policy"] = ordered_json::parse(policy_to_json(sol.policy, mgo, indent));
        j["strategy"] = ordered_json::parse(strategy_to_json(sol.strategy, m, indent));
        j["W"] = vec_json(sol.evaluation.W);
        j["check_pass"] = sol.check_pass;
    }
    ordered_json bell;
    bell["v"] = vec_json(sol.bellman.v);
    ordered_json r = ordered_json::array();
    for (int x : sol.bellman.R()) r.push_back(mgo.states[static_cast<size_t>(x)]);
    bell["R"] = r;
    j["bellman"] = bell;
    return j.dump(indent) + "\n";
}

}  // namespace gictmdp
