#include "gictmdp/model.hpp"

#include <cmath>
#include <sstream>

#include "gictmdp/errors.hpp"

namespace gictmdp {

namespace {

bool finite_nonneg(Real v) { return std::isfinite(v) && v >= 0.0; }

void check_dist_row(ValidationReport& rep, const Vec& row, size_t n, const std::string& loc) {
    if (row.size() != n) {
        rep.issues.push_back({Severity::Error, loc, "row has wrong length"});
        return;
    }
    Real sum = 0.0;
    for (Real p : row) {
        if (!finite_nonneg(p)) {
            rep.issues.push_back({Severity::Error, loc, "negative or non-finite probability"});
            return;
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kDistTol)
        rep.issues.push_back({Severity::Error, loc, "row does not sum to 1"});
}

}  // namespace

void GradualImpulsiveModel::default_admissibility() {
    adm_gradual.assign(states.size(), std::vector<char>(gradual_actions.size(), 1));
    adm_impulse.assign(states.size(), std::vector<char>(impulse_actions.size(), 1));
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    int errors = 0;
    for (const auto& it : issues) {
        if (it.severity == Severity::Error) ++errors;
        os << (it.severity == Severity::Error ? "error" : "warning") << " at " << it.location
           << ": " << it.message << "\n";
    }
    if (errors == 0) os << "ok\n";
    return os.str();
}

void require_valid(const ValidationReport& report, const std::string& what) {
    if (!report.pass()) throw ValidationError(what + ": " + report.summary());
}

ValidationReport validate_gi_model(const GradualImpulsiveModel& m) {
    ValidationReport rep;
    const size_t n = m.states.size();
    const size_t ng = m.gradual_actions.size();
    const size_t ni = m.impulse_actions.size();

    if (n == 0) rep.issues.push_back({Severity::Error, "states", "empty state list"});
    for (const auto& g : m.gradual_actions)
        for (const auto& i : m.impulse_actions)
            if (g == i)
                rep.issues.push_back({Severity::Error, "actions",
                                      "identifier '" + g + "' used for both action kinds"});

    if (m.q.size() != n || m.Q.size() != n || m.adm_gradual.size() != n ||
        m.adm_impulse.size() != n) {
        rep.issues.push_back({Severity::Error, "shape", "per-state array has wrong length"});
        return rep;
    }
    for (size_t x = 0; x < n; ++x) {
        if (m.q[x].size() != ng || m.Q[x].size() != ni || m.adm_gradual[x].size() != ng ||
            m.adm_impulse[x].size() != ni) {
            rep.issues.push_back(
                {Severity::Error, "state " + m.states[x], "per-action array has wrong length"});
            return rep;
        }
    }

    for (size_t x = 0; x < n; ++x) {
        for (size_t a = 0; a < ng; ++a) {
            if (!m.adm_gradual[x][a]) continue;
            const Vec& row = m.q[x][a];
            const std::string loc = m.states[x] + "/" + m.gradual_actions[a];
            if (row.size() != n) {
                rep.issues.push_back({Severity::Error, loc, "rate row has wrong length"});
                continue;
            }
            Real sum = 0.0;
            bool bad = false;
            for (size_t y = 0; y < n; ++y) {
                Real v = row[y];
                if (!std::isfinite(v)) {
                    rep.issues.push_back({Severity::Error, loc, "non-finite rate entry"});
                    bad = true;
                    break;
                }
                if (y != x && v < 0.0) {
                    rep.issues.push_back({Severity::Error, loc, "negative off-diagonal rate"});
                    bad = true;
                    break;
                }
                sum += v;
            }
            if (bad) continue;
            if (row[x] > 0.0)
                rep.issues.push_back({Severity::Error, loc, "positive diagonal rate"});
            if (std::abs(sum) > kDistTol)
                rep.issues.push_back({Severity::Error, loc, "non-conservative rate row"});
        }
        for (size_t b = 0; b < ni; ++b) {
            if (!m.adm_impulse[x][b]) continue;
            const std::string loc = m.states[x] + "/" + m.impulse_actions[b];
            check_dist_row(rep, m.Q[x][b], n, loc);
            if (m.Q[x][b].size() == n && m.Q[x][b][x] != 0.0)
                rep.issues.push_back({Severity::Error, loc, "self-loop impulse"});
        }
    }

    if (m.cost_count < 1)
        rep.issues.push_back({Severity::Error, "cost_count", "need at least the objective index"});
    if (static_cast<int>(m.bounds.size()) != m.cost_count - 1)
        rep.issues.push_back({Severity::Error, "bounds", "expected one bound per constraint index"});
    for (Real d : m.bounds)
        if (!std::isfinite(d))
            rep.issues.push_back({Severity::Error, "bounds", "non-finite bound"});

    if (static_cast<int>(m.cg.size()) != m.cost_count ||
        static_cast<int>(m.ci.size()) != m.cost_count) {
        rep.issues.push_back({Severity::Error, "costs", "cost table count != cost_count"});
        return rep;
    }
    for (int i = 0; i < m.cost_count; ++i) {
        if (m.cg[i].size() != n || m.ci[i].size() != n) {
            rep.issues.push_back({Severity::Error, "costs", "cost table has wrong state count"});
            return rep;
        }
        for (size_t x = 0; x < n; ++x) {
            if (m.cg[i][x].size() != ng || m.ci[i][x].size() != ni) {
                rep.issues.push_back({Severity::Error, "costs", "cost row has wrong length"});
                return rep;
            }
            for (size_t a = 0; a < ng; ++a)
                if (m.adm_gradual[x][a] && !finite_nonneg(m.cg[i][x][a]))
                    rep.issues.push_back({Severity::Error,
                                          m.states[x] + "/" + m.gradual_actions[a],
                                          "negative or non-finite cost rate"});
            for (size_t b = 0; b < ni; ++b)
                if (m.adm_impulse[x][b] && !finite_nonneg(m.ci[i][x][b]))
                    rep.issues.push_back({Severity::Error,
                                          m.states[x] + "/" + m.impulse_actions[b],
                                          "negative or non-finite lump cost"});
        }
    }

    if (m.x0 < 0 || m.x0 >= static_cast<int>(n))
        rep.issues.push_back({Severity::Error, "x0", "initial state out of range"});

    for (size_t x = 0; x < n; ++x) {
        bool any = false;
        for (size_t a = 0; a < ng; ++a) any = any || m.adm_gradual[x][a];
        for (size_t b = 0; b < ni; ++b) any = any || m.adm_impulse[x][b];
        if (!any)
            rep.issues.push_back(
                {Severity::Error, "state " + m.states[x], "no admissible action"});
    }
    return rep;
}

ValidationReport validate_standard_model(const StandardModel& m) {
    ValidationReport rep;
    const size_t n = m.states.size();
    const size_t na = m.actions.size();
    if (n == 0) rep.issues.push_back({Severity::Error, "states", "empty state list"});
    if (m.q.size() != n || m.adm.size() != n) {
        rep.issues.push_back({Severity::Error, "shape", "per-state array has wrong length"});
        return rep;
    }
    for (size_t x = 0; x < n; ++x) {
        if (m.q[x].size() != na || m.adm[x].size() != na) {
            rep.issues.push_back(
                {Severity::Error, "state " + m.states[x], "per-action array has wrong length"});
            return rep;
        }
        for (size_t a = 0; a < na; ++a) {
            if (!m.adm[x][a]) continue;
            const Vec& row = m.q[x][a];
            const std::string loc = m.states[x] + "/" + m.actions[a].name;
            if (row.size() != n) {
                rep.issues.push_back({Severity::Error, loc, "rate row has wrong length"});
                continue;
            }
            Real sum = 0.0;
            bool ok = true;
            for (size_t y = 0; y < n; ++y) {
                if (!std::isfinite(row[y]) || (y != x && row[y] < 0.0)) {
                    rep.issues.push_back({Severity::Error, loc, "bad rate entry"});
                    ok = false;
                    break;
                }
                sum += row[y];
            }
            if (!ok) continue;
            if (row[x] > 0.0) rep.issues.push_back({Severity::Error, loc, "positive diagonal"});
            if (m.actions[a].kind == ActionKind::Impulsive) {
                if (row[x] != -1.0)
                    rep.issues.push_back({Severity::Error, loc, "impulsive exit rate must be 1"});
                if (std::abs(sum) > kDistTol)
                    rep.issues.push_back(
                        {Severity::Error, loc, "impulsive off-diagonal row does not sum to 1"});
            } else if (std::abs(sum) > kDistTol) {
                rep.issues.push_back({Severity::Error, loc, "non-conservative rate row"});
            }
        }
    }
    if (m.cost_count < 1 || static_cast<int>(m.c.size()) != m.cost_count)
        rep.issues.push_back({Severity::Error, "costs", "cost table count != cost_count"});
    else
        for (int i = 0; i < m.cost_count; ++i)
            for (size_t x = 0; x < n && m.c[i].size() == n; ++x)
                for (size_t a = 0; a < na && m.c[i][x].size() == na; ++a)
                    if (m.adm[x][a] && !finite_nonneg(m.c[i][x][a]))
                        rep.issues.push_back({Severity::Error,
                                              m.states[x] + "/" + m.actions[a].name,
                                              "negative or non-finite cost rate"});
    if (static_cast<int>(m.bounds.size()) != m.cost_count - 1)
        rep.issues.push_back({Severity::Error, "bounds", "expected one bound per constraint index"});
    if (m.x0 < 0 || m.x0 >= static_cast<int>(n))
        rep.issues.push_back({Severity::Error, "x0", "initial state out of range"});
    return rep;
}

ValidationReport validate_policy(const StandardModel& m, const StationaryPolicy& pol) {
    ValidationReport rep;
    if (pol.rows.size() != m.states.size()) {
        rep.issues.push_back({Severity::Error, "policy", "state count mismatch"});
        return rep;
    }
    for (size_t x = 0; x < pol.rows.size(); ++x) {
        check_dist_row(rep, pol.rows[x], m.actions.size(), "policy at " + m.states[x]);
        if (pol.rows[x].size() == m.actions.size())
            for (size_t a = 0; a < m.actions.size(); ++a)
                if (pol.rows[x][a] > 0.0 && !m.adm[x][a])
                    rep.issues.push_back({Severity::Error, "policy at " + m.states[x],
                                          "mass on inadmissible action " + m.actions[a].name});
    }
    return rep;
}

ValidationReport validate_strategy(const GradualImpulsiveModel& m, const StationaryStrategy& s) {
    ValidationReport rep;
    const size_t n = m.states.size();
    if (s.w_imp.size() != n || s.beta.size() != n || s.f_hat.size() != n) {
        rep.issues.push_back({Severity::Error, "strategy", "state count mismatch"});
        return rep;
    }
    for (size_t x = 0; x < n; ++x) {
        const std::string loc = "strategy at " + m.states[x];
        if (!(s.w_imp[x] >= 0.0 && s.w_imp[x] <= 1.0))
            rep.issues.push_back({Severity::Error, loc, "w_imp outside [0,1]"});
        check_dist_row(rep, s.f_hat[x], m.gradual_actions.size(), loc + " (f_hat)");
        if (s.f_hat[x].size() == m.gradual_actions.size())
            for (size_t a = 0; a < m.gradual_actions.size(); ++a)
                if (s.f_hat[x][a] > 0.0 && !m.adm_gradual[x][a])
                    rep.issues.push_back({Severity::Error, loc,
                                          "f_hat mass on inadmissible " + m.gradual_actions[a]});
        if (m.impulse_actions.empty()) {
            if (s.w_imp[x] > 0.0)
                rep.issues.push_back({Severity::Error, loc, "impulse weight with no impulses"});
            continue;
        }
        check_dist_row(rep, s.beta[x], m.impulse_actions.size(), loc + " (beta)");
        if (s.beta[x].size() == m.impulse_actions.size())
            for (size_t b = 0; b < m.impulse_actions.size(); ++b)
                if (s.beta[x][b] > 0.0 && s.w_imp[x] > 0.0 && !m.adm_impulse[x][b])
                    rep.issues.push_back({Severity::Error, loc,
                                          "beta mass on inadmissible " + m.impulse_actions[b]});
    }
    return rep;
}

GradualImpulsiveModel builtin_paper_example(int truncation) {
    if (truncation < 3) throw ValidationError("paper-example needs at least 3 states");
    GradualImpulsiveModel m;
    const int n = truncation;
    for (int x = 0; x < n; ++x) m.states.push_back(std::to_string(x));
    m.gradual_actions = {"a"};
    m.impulse_actions = {"b"};
    m.cost_count = 2;
    m.bounds = {1.0};
    m.x0 = 0;

    m.q.assign(n, Mat(1, Vec(n, 0.0)));
    m.q[0][0][0] = -1.0;
    m.q[0][0][1] = 1.0;  // unit rate out of state 0 only

    m.Q.assign(n, Mat(1, Vec(n, 0.0)));
    for (int x = 0; x + 1 < n; ++x) m.Q[x][0][x + 1] = 1.0;

    m.cg.assign(2, Mat(n, Vec(1, 0.0)));
    m.ci.assign(2, Mat(n, Vec(1, 0.0)));
    m.cg[0][0][0] = 1.0;  // running objective cost at state 0
    m.ci[1][0][0] = 2.0;  // constrained lump cost of the impulse at state 0

    m.default_admissibility();
    m.adm_impulse[n - 1][0] = 0;  // the chain cannot continue past the last state
    return m;
}

GradualImpulsiveModel builtin_model(const std::string& name) {
    if (name == "paper-example") return builtin_paper_example(4);
    if (name == "two-state-smoke") {
        GradualImpulsiveModel m;
        m.states = {"0", "1"};
        m.gradual_actions = {"a"};
        m.cost_count = 1;
        m.x0 = 0;
        m.q.assign(2, Mat(1, Vec(2, 0.0)));
        m.q[0][0][0] = -1.0;
        m.q[0][0][1] = 1.0;
        m.q[1][0][1] = -1.0;
        m.q[1][0][0] = 1.0;
        m.Q.assign(2, Mat{});
        m.cg.assign(1, Mat(2, Vec(1, 0.0)));
        m.ci.assign(1, Mat(2, Vec{}));
        m.default_admissibility();
        return m;
    }
    throw NotFoundError("unknown builtin model '" + name + "'");
}

}  // namespace gictmdp
