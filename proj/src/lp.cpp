#include "gictmdp/lp.hpp"

#include <algorithm>
#include <cmath>

#include "gictmdp/errors.hpp"

namespace gictmdp {

OccupationLp build_occupation_lp(const GradualImpulsiveModel& m, const std::vector<int>& R,
                                 int x0, const Vec& bounds) {
    require_valid(validate_gi_model(m), "build_occupation_lp");

    std::vector<char> in_R(m.states.size(), 0);
    for (int x : R) {
        if (x < 0 || x >= m.num_states())
            throw ValidationError("build_occupation_lp: R contains an invalid state");
        in_R[static_cast<size_t>(x)] = 1;
    }
    if (x0 < 0 || x0 >= m.num_states())
        throw ValidationError("build_occupation_lp: x0 out of range");
    if (!in_R[static_cast<size_t>(x0)])
        throw TrivialProblem("initial state outside R: optimal value 0 via the greedy selector");

    const int ng = m.num_gradual();
    OccupationLp lp;
    std::vector<int> row_of(m.states.size(), -1);
    for (int x = 0; x < m.num_states(); ++x) {
        if (!in_R[static_cast<size_t>(x)]) continue;
        row_of[static_cast<size_t>(x)] = static_cast<int>(lp.row_state.size());
        lp.row_state.push_back(x);
        for (int a = 0; a < ng; ++a)
            if (m.gradual_admissible(x, a)) lp.columns.emplace_back(x, a);
        for (int b = 0; b < m.num_impulse(); ++b)
            if (m.impulse_admissible(x, b)) lp.columns.emplace_back(x, ng + b);
    }

    const int rows = static_cast<int>(lp.row_state.size());
    const int cols = lp.num_vars();
    lp.eq.assign(static_cast<size_t>(rows), Vec(static_cast<size_t>(cols), 0.0));
    lp.eq_rhs.assign(static_cast<size_t>(rows), 0.0);
    lp.eq_rhs[static_cast<size_t>(row_of[static_cast<size_t>(x0)])] = 1.0;
    lp.objective.assign(static_cast<size_t>(cols), 0.0);
    lp.le.assign(bounds.size(), Vec(static_cast<size_t>(cols), 0.0));
    lp.le_rhs = bounds;

    for (int col = 0; col < cols; ++col) {
        const auto [y, act] = lp.columns[static_cast<size_t>(col)];
        const bool gradual = act < ng;
        const int yrow = row_of[static_cast<size_t>(y)];
        if (gradual) {
            lp.eq[static_cast<size_t>(yrow)][static_cast<size_t>(col)] += m.rate(y, act);
            for (int x = 0; x < m.num_states(); ++x) {
                if (row_of[static_cast<size_t>(x)] < 0) continue;
                const Real f = m.flow(y, act, x);
                if (f != 0.0) lp.eq[static_cast<size_t>(row_of[static_cast<size_t>(x)])][static_cast<size_t>(col)] -= f;
            }
            lp.objective[static_cast<size_t>(col)] = m.cg[0][static_cast<size_t>(y)][static_cast<size_t>(act)];
            for (size_t j = 0; j < bounds.size(); ++j)
                lp.le[j][static_cast<size_t>(col)] = m.cg[j + 1][static_cast<size_t>(y)][static_cast<size_t>(act)];
        } else {
            const int b = act - ng;
            lp.eq[static_cast<size_t>(yrow)][static_cast<size_t>(col)] += 1.0;
            for (int x = 0; x < m.num_states(); ++x) {
                if (row_of[static_cast<size_t>(x)] < 0) continue;
                const Real p = m.Q[static_cast<size_t>(y)][static_cast<size_t>(b)][static_cast<size_t>(x)];
                if (p != 0.0) lp.eq[static_cast<size_t>(row_of[static_cast<size_t>(x)])][static_cast<size_t>(col)] -= p;
            }
            lp.objective[static_cast<size_t>(col)] = m.ci[0][static_cast<size_t>(y)][static_cast<size_t>(b)];
            for (size_t j = 0; j < bounds.size(); ++j)
                lp.le[j][static_cast<size_t>(col)] = m.ci[j + 1][static_cast<size_t>(y)][static_cast<size_t>(b)];
        }
    }
    return lp;
}

namespace {

// Dense revised simplex over the standard form [structural | slack] with a
// full artificial basis; entering and leaving choices follow Bland's rule.
struct SimplexTableau {
    int rows = 0;
    int structural = 0;
    int slack = 0;
    Mat a;       // rows x (structural + slack)
    Vec b;       // >= 0
    Mat binv;    // rows x rows
    std::vector<int> basis;  // column index per row; >= total means artificial
    Vec x_basic;

    int total_cols() const { return structural + slack; }

    void column(int j, Vec& out) const {
        for (int i = 0; i < rows; ++i) {
            Real acc = 0.0;
            for (int k = 0; k < rows; ++k) acc += binv[static_cast<size_t>(i)][static_cast<size_t>(k)] * a[static_cast<size_t>(k)][static_cast<size_t>(j)];
            out[static_cast<size_t>(i)] = acc;
        }
    }

    void pivot(int leave_row, int enter_col, const Vec& d) {
        const Real piv = d[static_cast<size_t>(leave_row)];
        for (int k = 0; k < rows; ++k) binv[static_cast<size_t>(leave_row)][static_cast<size_t>(k)] /= piv;
        x_basic[static_cast<size_t>(leave_row)] /= piv;
        for (int i = 0; i < rows; ++i) {
            if (i == leave_row) continue;
            const Real f = d[static_cast<size_t>(i)];
            if (f == 0.0) continue;
            for (int k = 0; k < rows; ++k)
                binv[static_cast<size_t>(i)][static_cast<size_t>(k)] -= f * binv[static_cast<size_t>(leave_row)][static_cast<size_t>(k)];
            x_basic[static_cast<size_t>(i)] -= f * x_basic[static_cast<size_t>(leave_row)];
            if (x_basic[static_cast<size_t>(i)] < 0.0 && x_basic[static_cast<size_t>(i)] > -1e-12) x_basic[static_cast<size_t>(i)] = 0.0;
        }
        basis[static_cast<size_t>(leave_row)] = enter_col;
    }
};

enum class PhaseResult { Optimal, Unbounded };

// Runs simplex iterations for the given cost vector (artificial columns cost
// `art_cost`, structural/slack per `costs`). Returns Unbounded with the
// entering column recorded in *ray_col.
PhaseResult run_phase(SimplexTableau& t, const Vec& costs, Real art_cost,
                      const SimplexOptions& opts, int* pivots, int* ray_col, Vec* ray_dir) {
    const int total = t.total_cols();
    Vec y(static_cast<size_t>(t.rows));
    Vec d(static_cast<size_t>(t.rows));
    auto cost_of = [&](int j) { return j < total ? costs[static_cast<size_t>(j)] : art_cost; };

    while (true) {
        if (++(*pivots) > opts.max_pivots)
            throw NumericalFailure("solve_simplex: pivot budget exhausted (possible stall)");
        // y = c_B B^{-1}
        for (int k = 0; k < t.rows; ++k) {
            Real acc = 0.0;
            for (int i = 0; i < t.rows; ++i)
                acc += cost_of(t.basis[static_cast<size_t>(i)]) * t.binv[static_cast<size_t>(i)][static_cast<size_t>(k)];
            y[static_cast<size_t>(k)] = acc;
        }
        // Bland entering: lowest-index column with negative reduced cost.
        int enter = -1;
        for (int j = 0; j < total; ++j) {
            bool basic = false;
            for (int i = 0; i < t.rows; ++i)
                if (t.basis[static_cast<size_t>(i)] == j) {
                    basic = true;
                    break;
                }
            if (basic) continue;
            Real red = costs[static_cast<size_t>(j)];
            for (int i = 0; i < t.rows; ++i) red -= y[static_cast<size_t>(i)] * t.a[static_cast<size_t>(i)][static_cast<size_t>(j)];
            if (red < -1e-9) {
                enter = j;
                break;
            }
        }
        if (enter < 0) return PhaseResult::Optimal;

        t.column(enter, d);
        int leave = -1;
        Real best_ratio = 0.0;
        for (int i = 0; i < t.rows; ++i) {
            if (d[static_cast<size_t>(i)] > opts.pivot_tol) {
                const Real ratio = t.x_basic[static_cast<size_t>(i)] / d[static_cast<size_t>(i)];
                if (leave < 0 || ratio < best_ratio - 1e-12 ||
                    (ratio <= best_ratio + 1e-12 &&
                     t.basis[static_cast<size_t>(i)] < t.basis[static_cast<size_t>(leave)])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
        }
        if (leave < 0) {
            if (ray_col) *ray_col = enter;
            if (ray_dir) *ray_dir = d;
            return PhaseResult::Unbounded;
        }
        t.pivot(leave, enter, d);
    }
}

}  // namespace

LpSolution solve_simplex(const OccupationLp& lp, const SimplexOptions& opts) {
    const int n = lp.num_vars();
    const int eq_rows = static_cast<int>(lp.eq.size());
    const int le_rows = static_cast<int>(lp.le.size());

    SimplexTableau t;
    t.rows = eq_rows + le_rows;
    t.structural = n;
    t.slack = le_rows;
    t.a.assign(static_cast<size_t>(t.rows), Vec(static_cast<size_t>(n + le_rows), 0.0));
    t.b.assign(static_cast<size_t>(t.rows), 0.0);
    for (int i = 0; i < eq_rows; ++i) {
        for (int j = 0; j < n; ++j) t.a[static_cast<size_t>(i)][static_cast<size_t>(j)] = lp.eq[static_cast<size_t>(i)][static_cast<size_t>(j)];
        t.b[static_cast<size_t>(i)] = lp.eq_rhs[static_cast<size_t>(i)];
    }
    for (int i = 0; i < le_rows; ++i) {
        const int r = eq_rows + i;
        for (int j = 0; j < n; ++j) t.a[static_cast<size_t>(r)][static_cast<size_t>(j)] = lp.le[static_cast<size_t>(i)][static_cast<size_t>(j)];
        t.a[static_cast<size_t>(r)][static_cast<size_t>(n + i)] = 1.0;
        t.b[static_cast<size_t>(r)] = lp.le_rhs[static_cast<size_t>(i)];
    }
    for (int i = 0; i < t.rows; ++i)
        if (t.b[static_cast<size_t>(i)] < 0.0) {
            for (auto& v : t.a[static_cast<size_t>(i)]) v = -v;
            t.b[static_cast<size_t>(i)] = -t.b[static_cast<size_t>(i)];
        }

    t.binv.assign(static_cast<size_t>(t.rows), Vec(static_cast<size_t>(t.rows), 0.0));
    for (int i = 0; i < t.rows; ++i) t.binv[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1.0;
    t.basis.resize(static_cast<size_t>(t.rows));
    for (int i = 0; i < t.rows; ++i) t.basis[static_cast<size_t>(i)] = t.total_cols() + i;  // artificials
    t.x_basic = t.b;

    LpSolution sol;
    int pivots = 0;

    // Phase 1: minimize the artificial mass.
    Vec phase1_costs(static_cast<size_t>(t.total_cols()), 0.0);
    run_phase(t, phase1_costs, 1.0, opts, &pivots, nullptr, nullptr);
    Real art_mass = 0.0;
    for (int i = 0; i < t.rows; ++i)
        if (t.basis[static_cast<size_t>(i)] >= t.total_cols()) art_mass += t.x_basic[static_cast<size_t>(i)];
    if (art_mass > opts.feas_tol) {
        sol.status = LpStatus::Infeasible;
        // Row combination certifying infeasibility: y = c_B B^{-1} with unit
        // costs on the artificials still in the basis.
        sol.certificate.assign(static_cast<size_t>(t.rows), 0.0);
        for (int k = 0; k < t.rows; ++k) {
            Real acc = 0.0;
            for (int i = 0; i < t.rows; ++i)
                if (t.basis[static_cast<size_t>(i)] >= t.total_cols())
                    acc += t.binv[static_cast<size_t>(i)][static_cast<size_t>(k)];
            sol.certificate[static_cast<size_t>(k)] = acc;
        }
        return sol;
    }
    // Drive remaining zero-level artificials out of the basis where possible.
    for (int i = 0; i < t.rows; ++i) {
        if (t.basis[static_cast<size_t>(i)] < t.total_cols()) continue;
        Vec d(static_cast<size_t>(t.rows));
        for (int j = 0; j < t.total_cols(); ++j) {
            t.column(j, d);
            if (std::abs(d[static_cast<size_t>(i)]) > opts.pivot_tol) {
                bool basic = false;
                for (int k = 0; k < t.rows; ++k)
                    if (t.basis[static_cast<size_t>(k)] == j) basic = true;
                if (basic) continue;
                t.pivot(i, j, d);
                break;
            }
        }
    }

    // Phase 2: original objective; artificial columns are never re-entered.
    Vec phase2_costs(static_cast<size_t>(t.total_cols()), 0.0);
    for (int j = 0; j < n; ++j) phase2_costs[static_cast<size_t>(j)] = lp.objective[static_cast<size_t>(j)];
    int ray_col = -1;
    Vec ray_dir;
    PhaseResult pr = run_phase(t, phase2_costs, 0.0, opts, &pivots, &ray_col, &ray_dir);
    if (pr == PhaseResult::Unbounded) {
        sol.status = LpStatus::Unbounded;
        sol.certificate.assign(static_cast<size_t>(n), 0.0);
        if (ray_col < n) sol.certificate[static_cast<size_t>(ray_col)] = 1.0;
        for (int i = 0; i < t.rows; ++i)
            if (t.basis[static_cast<size_t>(i)] < n)
                sol.certificate[static_cast<size_t>(t.basis[static_cast<size_t>(i)])] = -ray_dir[static_cast<size_t>(i)];
        return sol;
    }

    sol.status = LpStatus::Optimal;
    sol.nu.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < t.rows; ++i)
        if (t.basis[static_cast<size_t>(i)] < n)
            sol.nu[static_cast<size_t>(t.basis[static_cast<size_t>(i)])] = std::max(0.0, t.x_basic[static_cast<size_t>(i)]);
    sol.objective = 0.0;
    for (int j = 0; j < n; ++j) sol.objective += lp.objective[static_cast<size_t>(j)] * sol.nu[static_cast<size_t>(j)];
    for (int i = 0; i < t.rows; ++i)
        if (t.basis[static_cast<size_t>(i)] < n) sol.basis.push_back(t.basis[static_cast<size_t>(i)]);
    std::sort(sol.basis.begin(), sol.basis.end());

    sol.balance_residual = 0.0;
    for (int i = 0; i < eq_rows; ++i) {
        Real acc = -lp.eq_rhs[static_cast<size_t>(i)];
        for (int j = 0; j < n; ++j) acc += lp.eq[static_cast<size_t>(i)][static_cast<size_t>(j)] * sol.nu[static_cast<size_t>(j)];
        sol.balance_residual = std::max(sol.balance_residual, std::abs(acc));
    }
    sol.slacks.assign(static_cast<size_t>(le_rows), 0.0);
    for (int i = 0; i < le_rows; ++i) {
        Real acc = lp.le_rhs[static_cast<size_t>(i)];
        for (int j = 0; j < n; ++j) acc -= lp.le[static_cast<size_t>(i)][static_cast<size_t>(j)] * sol.nu[static_cast<size_t>(j)];
        sol.slacks[static_cast<size_t>(i)] = acc;
    }
    return sol;
}

StationaryPolicy extract_policy(const LpSolution& sol, const OccupationLp& lp,
                                const BellmanResult& bellman, const StandardModel& mgo) {
    if (sol.status != LpStatus::Optimal)
        throw ValidationError("extract_policy: solution is not optimal");
    const int n = mgo.num_states();
    const int na = mgo.num_actions();

    StationaryPolicy pol;
    pol.rows.assign(static_cast<size_t>(n), Vec(static_cast<size_t>(na), 0.0));
    Vec mass(static_cast<size_t>(n), 0.0);
    for (int col = 0; col < lp.num_vars(); ++col)
        mass[static_cast<size_t>(lp.columns[static_cast<size_t>(col)].first)] += sol.nu[static_cast<size_t>(col)];
    for (int col = 0; col < lp.num_vars(); ++col) {
        const auto [x, a] = lp.columns[static_cast<size_t>(col)];
        if (mass[static_cast<size_t>(x)] > 0.0)
            pol.rows[static_cast<size_t>(x)][static_cast<size_t>(a)] = sol.nu[static_cast<size_t>(col)] / mass[static_cast<size_t>(x)];
    }
    for (int x = 0; x < n; ++x)
        if (mass[static_cast<size_t>(x)] <= 0.0)
            pol.rows[static_cast<size_t>(x)][static_cast<size_t>(bellman.f_star[static_cast<size_t>(x)])] = 1.0;
    return pol;
}

ConstrainedSolution solve_constrained_problem(const GradualImpulsiveModel& m,
                                              const PipelineOptions& opts) {
    require_valid(validate_gi_model(m), "solve_constrained_problem");
    const StandardModel mgo = reduce_model(m);
    const LiftOptions lift =
        opts.lift.p_star.empty() && opts.lift.p_star_star.empty() ? LiftOptions::defaults(m) : opts.lift;

    ConstrainedSolution out;
    out.bellman = compute_vstar(mgo, opts.bellman);

    try {
        out.lp_model = build_occupation_lp(m, out.bellman.R(), m.x0, m.bounds);
    } catch (const TrivialProblem&) {
        out.trivial = true;
        out.value = 0.0;
        StationaryPolicy greedy;
        greedy.rows.assign(m.states.size(), Vec(mgo.actions.size(), 0.0));
        for (int x = 0; x < m.num_states(); ++x)
            greedy.rows[static_cast<size_t>(x)][static_cast<size_t>(out.bellman.f_star[static_cast<size_t>(x)])] = 1.0;
        out.policy = greedy;
        out.strategy = lift_stationary_policy(greedy, m, lift);
        out.evaluation = evaluate_strategy(m, out.strategy, m.x0, opts.eval);
        out.check_pass = out.evaluation.W[0] <= opts.check_tol;
        for (int j = 0; j < m.num_constraints(); ++j)
            out.check_pass = out.check_pass &&
                             out.evaluation.W[static_cast<size_t>(j + 1)] <= m.bounds[static_cast<size_t>(j)] + opts.check_tol;
        return out;
    }

    out.lp = solve_simplex(out.lp_model, opts.simplex);
    if (out.lp.status != LpStatus::Optimal) return out;

    out.value = out.lp.objective;
    out.policy = extract_policy(out.lp, out.lp_model, out.bellman, mgo);
    out.strategy = lift_stationary_policy(out.policy, m, lift);
    out.evaluation = evaluate_strategy(m, out.strategy, m.x0, opts.eval);

    out.check_pass =
        std::abs(out.evaluation.W[0] - out.value) <= opts.check_tol * (1.0 + std::abs(out.value));
    for (int j = 0; j < m.num_constraints(); ++j)
        out.check_pass = out.check_pass &&
                         out.evaluation.W[static_cast<size_t>(j + 1)] <= m.bounds[static_cast<size_t>(j)] + opts.check_tol;
    return out;
}

}  // namespace gictmdp
