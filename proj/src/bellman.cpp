#include "gictmdp/bellman.hpp"

#include <algorithm>
#include <cmath>

#include "gictmdp/errors.hpp"

namespace gictmdp {

namespace {

// Strongly connected components of the support graph of P (Tarjan, iterative).
std::vector<int> scc_components(const std::vector<JumpLaw>& laws) {
    const int n = static_cast<int>(laws.size());
    std::vector<int> comp(static_cast<size_t>(n), -1), low(static_cast<size_t>(n), 0),
        num(static_cast<size_t>(n), -1), stack_pos(static_cast<size_t>(n), 0);
    std::vector<int> stack;
    std::vector<char> on_stack(static_cast<size_t>(n), 0);
    int counter = 0, comps = 0;

    struct Frame {
        int v;
        int next_y;
    };
    for (int root = 0; root < n; ++root) {
        if (num[static_cast<size_t>(root)] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        num[static_cast<size_t>(root)] = low[static_cast<size_t>(root)] = counter++;
        stack.push_back(root);
        on_stack[static_cast<size_t>(root)] = 1;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.next_y < n) {
                int y = f.next_y++;
                if (laws[static_cast<size_t>(f.v)].next[static_cast<size_t>(y)] <= 0.0) continue;
                if (num[static_cast<size_t>(y)] == -1) {
                    num[static_cast<size_t>(y)] = low[static_cast<size_t>(y)] = counter++;
                    stack.push_back(y);
                    on_stack[static_cast<size_t>(y)] = 1;
                    frames.push_back({y, 0});
                } else if (on_stack[static_cast<size_t>(y)]) {
                    low[static_cast<size_t>(f.v)] = std::min(low[static_cast<size_t>(f.v)], num[static_cast<size_t>(y)]);
                }
            } else {
                int v = f.v;
                frames.pop_back();
                if (!frames.empty())
                    low[static_cast<size_t>(frames.back().v)] =
                        std::min(low[static_cast<size_t>(frames.back().v)], low[static_cast<size_t>(v)]);
                if (low[static_cast<size_t>(v)] == num[static_cast<size_t>(v)]) {
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[static_cast<size_t>(w)] = 0;
                        comp[static_cast<size_t>(w)] = comps;
                        if (w == v) break;
                    }
                    ++comps;
                }
            }
        }
    }
    return comp;
}

// States whose total expected cost is infinite for index i: states reaching
// either an infinite one-sojourn cost or a mass-conserving closed class that
// keeps accruing cost index i.
std::vector<char> infinite_value_states(const std::vector<JumpLaw>& laws, int cost_index) {
    const int n = static_cast<int>(laws.size());
    std::vector<int> comp = scc_components(laws);
    int comps = 0;
    for (int c : comp) comps = std::max(comps, c + 1);

    std::vector<char> comp_closed(static_cast<size_t>(comps), 1);
    std::vector<char> comp_has_cost(static_cast<size_t>(comps), 0);
    std::vector<int> comp_size(static_cast<size_t>(comps), 0);
    std::vector<char> comp_has_selfloop(static_cast<size_t>(comps), 0);
    for (int x = 0; x < n; ++x) {
        const int c = comp[static_cast<size_t>(x)];
        ++comp_size[static_cast<size_t>(c)];
        Real in_class = 0.0;
        for (int y = 0; y < n; ++y) {
            Real p = laws[static_cast<size_t>(x)].next[static_cast<size_t>(y)];
            if (p <= 0.0) continue;
            if (comp[static_cast<size_t>(y)] == c) {
                in_class += p;
                if (y == x) comp_has_selfloop[static_cast<size_t>(c)] = 1;
            }
        }
        if (in_class < 1.0 - 1e-9) comp_closed[static_cast<size_t>(c)] = 0;
        if (laws[static_cast<size_t>(x)].sojourn_cost[static_cast<size_t>(cost_index)] > 0.0)
            comp_has_cost[static_cast<size_t>(c)] = 1;
    }

    std::vector<char> bad(static_cast<size_t>(n), 0);
    for (int x = 0; x < n; ++x) {
        const int c = comp[static_cast<size_t>(x)];
        if (std::isinf(laws[static_cast<size_t>(x)].sojourn_cost[static_cast<size_t>(cost_index)])) bad[static_cast<size_t>(x)] = 1;
        // Singleton components count as recurrent only with a self-loop.
        const bool recurrent =
            comp_closed[static_cast<size_t>(c)] &&
            (comp_size[static_cast<size_t>(c)] > 1 || comp_has_selfloop[static_cast<size_t>(c)]);
        if (recurrent && comp_has_cost[static_cast<size_t>(c)]) bad[static_cast<size_t>(x)] = 1;
    }

    // Backward closure: anything reaching a bad state is bad.
    bool changed = true;
    while (changed) {
        changed = false;
        for (int x = 0; x < n; ++x) {
            if (bad[static_cast<size_t>(x)]) continue;
            for (int y = 0; y < n; ++y)
                if (laws[static_cast<size_t>(x)].next[static_cast<size_t>(y)] > 0.0 && bad[static_cast<size_t>(y)]) {
                    bad[static_cast<size_t>(x)] = 1;
                    changed = true;
                    break;
                }
        }
    }
    return bad;
}

}  // namespace

EvaluationResult evaluate_laws(const std::vector<JumpLaw>& laws, int cost_count, int x0,
                               const EvalOptions& opts) {
    const int n = static_cast<int>(laws.size());
    if (x0 < 0 || x0 >= n) throw ValidationError("evaluate_laws: x0 out of range");

    EvaluationResult res;
    res.w.assign(static_cast<size_t>(cost_count), Vec(static_cast<size_t>(n), 0.0));
    for (const auto& law : laws) res.max_trunc_error = std::max(res.max_trunc_error, law.trunc_error);

    for (int i = 0; i < cost_count; ++i) {
        std::vector<char> inf_at = infinite_value_states(laws, i);
        Vec& w = res.w[static_cast<size_t>(i)];
        for (int x = 0; x < n; ++x)
            if (inf_at[static_cast<size_t>(x)]) w[static_cast<size_t>(x)] = kInf;

        // Monotone iteration from zero on the finite part; the finite part is
        // closed under transitions, so no 0 * inf terms arise.
        int iter = 0;
        Real residual = kInf;
        Vec w_next(static_cast<size_t>(n), 0.0);
        while (iter < opts.max_iter) {
            ++iter;
            Real step = 0.0, scale = 1.0;
            for (int x = 0; x < n; ++x) {
                if (inf_at[static_cast<size_t>(x)]) {
                    w_next[static_cast<size_t>(x)] = kInf;
                    continue;
                }
                Real acc = laws[static_cast<size_t>(x)].sojourn_cost[static_cast<size_t>(i)];
                const Vec& row = laws[static_cast<size_t>(x)].next;
                for (int y = 0; y < n; ++y)
                    if (row[static_cast<size_t>(y)] > 0.0) acc += row[static_cast<size_t>(y)] * w[static_cast<size_t>(y)];
                if (acc > opts.divergence_cap) acc = kInf;
                w_next[static_cast<size_t>(x)] = acc;
                if (std::isfinite(acc)) {
                    step = std::max(step, acc - w[static_cast<size_t>(x)]);
                    scale = std::max(scale, acc);
                } else if (std::isfinite(w[static_cast<size_t>(x)])) {
                    step = kInf;
                }
            }
            w.swap(w_next);
            residual = step;
            if (step <= opts.tol * scale) break;
        }
        res.iterations = std::max(res.iterations, iter);
        res.residual = std::max(res.residual, residual);
        if (iter >= opts.max_iter && !(residual <= opts.tol * 1e3)) {
            res.W.assign(static_cast<size_t>(cost_count), 0.0);
            for (int k = 0; k < cost_count; ++k) res.W[static_cast<size_t>(k)] = res.w[static_cast<size_t>(k)][static_cast<size_t>(x0)];
            throw EvaluationUnconverged("evaluate_laws: value iteration did not converge", res);
        }
    }

    res.W.assign(static_cast<size_t>(cost_count), 0.0);
    for (int i = 0; i < cost_count; ++i) res.W[static_cast<size_t>(i)] = res.w[static_cast<size_t>(i)][static_cast<size_t>(x0)];
    return res;
}

namespace {

EvaluationResult evaluate_epochs(const std::vector<std::vector<JumpLaw>>& epoch_laws,
                                 const std::vector<JumpLaw>& tail_laws, int cost_count, int x0,
                                 const EvalOptions& opts) {
    EvaluationResult tail = evaluate_laws(tail_laws, cost_count, x0, opts);
    for (const auto& laws : epoch_laws)
        for (const auto& law : laws)
            tail.max_trunc_error = std::max(tail.max_trunc_error, law.trunc_error);
    if (epoch_laws.empty()) return tail;

    const int n = static_cast<int>(tail_laws.size());
    Vec dist(static_cast<size_t>(n), 0.0);
    dist[static_cast<size_t>(x0)] = 1.0;
    Vec W(static_cast<size_t>(cost_count), 0.0);
    for (const auto& laws : epoch_laws) {
        Vec next_dist(static_cast<size_t>(n), 0.0);
        for (int x = 0; x < n; ++x) {
            const Real p = dist[static_cast<size_t>(x)];
            if (p <= 0.0) continue;
            for (int i = 0; i < cost_count; ++i) {
                const Real g = laws[static_cast<size_t>(x)].sojourn_cost[static_cast<size_t>(i)];
                if (g != 0.0) W[static_cast<size_t>(i)] += p * g;
            }
            for (int y = 0; y < n; ++y) {
                const Real q = laws[static_cast<size_t>(x)].next[static_cast<size_t>(y)];
                if (q > 0.0) next_dist[static_cast<size_t>(y)] += p * q;
            }
        }
        dist.swap(next_dist);
    }
    for (int i = 0; i < cost_count; ++i) {
        Real rest = 0.0;
        for (int x = 0; x < n; ++x) {
            const Real p = dist[static_cast<size_t>(x)];
            if (p <= 0.0) continue;
            const Real wx = tail.w[static_cast<size_t>(i)][static_cast<size_t>(x)];
            if (wx != 0.0) rest += p * wx;
        }
        W[static_cast<size_t>(i)] += rest;
    }
    tail.W = W;
    return tail;
}

}  // namespace

BellmanResult compute_vstar(const StandardModel& mgo, const BellmanOptions& opts) {
    require_valid(validate_standard_model(mgo), "compute_vstar");
    if (!(opts.epsilon > 0.0)) throw ValidationError("compute_vstar: epsilon must be positive");

    const int n = mgo.num_states();
    const int na = mgo.num_actions();
    Vec agg(static_cast<size_t>(n * na), 0.0);  // sum_j c_j(x,a)
    for (int x = 0; x < n; ++x)
        for (int a = 0; a < na; ++a) {
            Real s = 0.0;
            for (int j = 0; j < mgo.cost_count; ++j) s += mgo.c[static_cast<size_t>(j)][static_cast<size_t>(x)][static_cast<size_t>(a)];
            agg[static_cast<size_t>(x * na + a)] = s;
        }

    auto branch_value = [&](int x, int a, const Vec& v) -> Real {
        Real acc = agg[static_cast<size_t>(x * na + a)];
        for (int y = 0; y < n; ++y) {
            const Real f = mgo.flow(x, a, y);
            if (f <= 0.0) continue;
            if (std::isinf(v[static_cast<size_t>(y)])) return kInf;
            acc += f * v[static_cast<size_t>(y)];
        }
        if (std::isinf(v[static_cast<size_t>(x)])) {
            if (opts.epsilon > 0.0) return kInf;
        } else {
            acc += opts.epsilon * v[static_cast<size_t>(x)];
        }
        return acc / (opts.epsilon + mgo.rate(x, a));
    };

    BellmanResult res;
    res.v.assign(static_cast<size_t>(n), 0.0);
    Vec v_next(static_cast<size_t>(n), 0.0);
    Real residual = kInf;
    int iter = 0;
    while (iter < opts.max_iter) {
        ++iter;
        Real step = 0.0, scale = 1.0;
        for (int x = 0; x < n; ++x) {
            Real best = kInf;
            for (int a = 0; a < na; ++a) {
                if (!mgo.admissible(x, a)) continue;
                best = std::min(best, branch_value(x, a, res.v));
            }
            if (best > opts.divergence_cap) best = kInf;
            v_next[static_cast<size_t>(x)] = best;
            if (std::isfinite(best)) {
                step = std::max(step, best - res.v[static_cast<size_t>(x)]);
                scale = std::max(scale, best);
            } else if (std::isfinite(res.v[static_cast<size_t>(x)])) {
                step = kInf;
            }
        }
        res.v.swap(v_next);
        residual = step;
        if (step <= opts.tol * scale) break;
    }
    res.iterations = iter;
    res.residual = residual;
    if (iter >= opts.max_iter && !(residual <= opts.tol * 1e3))
        throw BellmanUnconverged("compute_vstar: value iteration did not converge", res);

    // Greedy selector at the fixed point, lowest-index ties.
    res.f_star.assign(static_cast<size_t>(n), -1);
    for (int x = 0; x < n; ++x) {
        Real best = kInf;
        for (int a = 0; a < na; ++a) {
            if (!mgo.admissible(x, a)) continue;
            Real val = branch_value(x, a, res.v);
            if (val < best - 1e-12 * (1.0 + std::abs(best))) {
                best = val;
                res.f_star[static_cast<size_t>(x)] = a;
            } else if (res.f_star[static_cast<size_t>(x)] < 0) {
                best = std::min(best, val);
                res.f_star[static_cast<size_t>(x)] = a;
            }
        }
    }

    Real vmax = 0.0;
    for (Real v : res.v)
        if (std::isfinite(v)) vmax = std::max(vmax, v);
    const Real theta = 1e-9 * (1.0 + vmax);
    res.in_R.assign(static_cast<size_t>(n), 0);
    for (int x = 0; x < n; ++x)
        if (res.v[static_cast<size_t>(x)] > theta) res.in_R[static_cast<size_t>(x)] = 1;
    return res;
}

EvaluationResult evaluate_policy(const StandardModel& mgo, const StationaryPolicy& pol, int x0,
                                 const EvalOptions& opts) {
    require_valid(validate_policy(mgo, pol), "evaluate_policy");
    std::vector<JumpLaw> laws;
    laws.reserve(mgo.states.size());
    for (int x = 0; x < mgo.num_states(); ++x)
        laws.push_back(go_jump_law(mgo, x, TimeSchedule::constant(pol.rows[static_cast<size_t>(x)])));
    return evaluate_laws(laws, mgo.cost_count, x0, opts);
}

EvaluationResult evaluate_policy(const StandardModel& mgo, const MarkovPolicy& pol, int x0,
                                 const EvalOptions& opts) {
    const int n = mgo.num_states();
    if (static_cast<int>(pol.tail_epoch.size()) != n)
        throw ValidationError("evaluate_policy: Markov policy state count mismatch");
    std::vector<std::vector<JumpLaw>> epoch_laws;
    for (const auto& epoch : pol.epochs) {
        if (static_cast<int>(epoch.size()) != n)
            throw ValidationError("evaluate_policy: Markov policy state count mismatch");
        std::vector<JumpLaw> laws;
        laws.reserve(static_cast<size_t>(n));
        for (int x = 0; x < n; ++x) laws.push_back(go_jump_law(mgo, x, epoch[static_cast<size_t>(x)]));
        epoch_laws.push_back(std::move(laws));
    }
    std::vector<JumpLaw> tail_laws;
    tail_laws.reserve(static_cast<size_t>(n));
    for (int x = 0; x < n; ++x) tail_laws.push_back(go_jump_law(mgo, x, pol.tail_epoch[static_cast<size_t>(x)]));
    return evaluate_epochs(epoch_laws, tail_laws, mgo.cost_count, x0, opts);
}

EvaluationResult evaluate_policy(const StandardModel& mgo, const PseudoPoissonPolicy& pol, int x0,
                                 const EvalOptions& opts, const SeriesOptions& series) {
    const int n = mgo.num_states();
    std::vector<std::vector<JumpLaw>> epoch_laws;
    for (int e = 0; e < pol.explicit_epochs(); ++e) {
        std::vector<JumpLaw> laws;
        laws.reserve(static_cast<size_t>(n));
        for (int x = 0; x < n; ++x)
            laws.push_back(pseudo_jump_law(mgo, pol.epoch(e)[static_cast<size_t>(x)].kernels, x,
                                           pol.lambda, series));
        epoch_laws.push_back(std::move(laws));
    }
    std::vector<JumpLaw> tail_laws;
    tail_laws.reserve(static_cast<size_t>(n));
    for (int x = 0; x < n; ++x)
        tail_laws.push_back(
            pseudo_jump_law(mgo, pol.tail_epoch[static_cast<size_t>(x)].kernels, x, pol.lambda, series));
    return evaluate_epochs(epoch_laws, tail_laws, mgo.cost_count, x0, opts);
}

namespace {

// Closed cycle of probability-one impulses with positive cost: infinitely
// many impulses at a single time point.
void check_zeno(const GradualImpulsiveModel& m, const StationaryStrategy& s) {
    const int n = m.num_states();
    std::vector<JumpLaw> sub(static_cast<size_t>(n));
    std::vector<char> instant(static_cast<size_t>(n), 0);
    for (int x = 0; x < n; ++x) {
        sub[static_cast<size_t>(x)].next.assign(static_cast<size_t>(n), 0.0);
        sub[static_cast<size_t>(x)].sojourn_cost.assign(1, 0.0);
        if (s.w_imp[static_cast<size_t>(x)] < 1.0 - 1e-9) continue;
        instant[static_cast<size_t>(x)] = 1;
        Real cost = 0.0;
        for (int b = 0; b < m.num_impulse(); ++b) {
            const Real wb = s.beta[static_cast<size_t>(x)][static_cast<size_t>(b)];
            if (wb <= 0.0) continue;
            for (int i = 0; i < m.cost_count; ++i)
                cost += wb * m.ci[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(b)];
            for (int y = 0; y < n; ++y)
                sub[static_cast<size_t>(x)].next[static_cast<size_t>(y)] += wb * m.Q[static_cast<size_t>(x)][static_cast<size_t>(b)][static_cast<size_t>(y)];
        }
        sub[static_cast<size_t>(x)].sojourn_cost[0] = cost;
    }
    // Keep only edges between instant-impulse states.
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            if (!instant[static_cast<size_t>(x)] || !instant[static_cast<size_t>(y)])
                sub[static_cast<size_t>(x)].next[static_cast<size_t>(y)] = 0.0;

    std::vector<int> comp = scc_components(sub);
    int comps = 0;
    for (int c : comp) comps = std::max(comps, c + 1);
    std::vector<char> closed(static_cast<size_t>(comps), 1);
    std::vector<char> has_cost(static_cast<size_t>(comps), 0);
    std::vector<int> size(static_cast<size_t>(comps), 0);
    for (int x = 0; x < n; ++x) {
        const int c = comp[static_cast<size_t>(x)];
        ++size[static_cast<size_t>(c)];
        if (!instant[static_cast<size_t>(x)]) {
            closed[static_cast<size_t>(c)] = 0;
            continue;
        }
        Real in_class = 0.0;
        for (int y = 0; y < n; ++y)
            if (comp[static_cast<size_t>(y)] == c) in_class += sub[static_cast<size_t>(x)].next[static_cast<size_t>(y)];
        if (in_class < 1.0 - 1e-9) closed[static_cast<size_t>(c)] = 0;
        if (sub[static_cast<size_t>(x)].sojourn_cost[0] > 0.0) has_cost[static_cast<size_t>(c)] = 1;
    }
    for (int c = 0; c < comps; ++c)
        if (closed[static_cast<size_t>(c)] && has_cost[static_cast<size_t>(c)] && size[static_cast<size_t>(c)] > 1)
            throw ZenoDetected(
                "evaluate_strategy: closed impulse cycle with positive cost (infinite impulse "
                "chain)");
}

}  // namespace

EvaluationResult evaluate_strategy(const GradualImpulsiveModel& m, const StationaryStrategy& s,
                                   int x0, const EvalOptions& opts) {
    require_valid(validate_strategy(m, s), "evaluate_strategy");
    check_zeno(m, s);
    std::vector<JumpLaw> laws;
    laws.reserve(m.states.size());
    for (int x = 0; x < m.num_states(); ++x) laws.push_back(strategy_jump_law(m, s, x));
    return evaluate_laws(laws, m.cost_count, x0, opts);
}

EvaluationResult evaluate_strategy(const GradualImpulsiveModel& m, const PoissonStrategy& s,
                                   int x0, const EvalOptions& opts, const SeriesOptions& series) {
    const int n = m.num_states();
    std::vector<std::vector<JumpLaw>> epoch_laws;
    for (int e = 0; e < s.explicit_epochs(); ++e) {
        std::vector<JumpLaw> laws;
        laws.reserve(static_cast<size_t>(n));
        for (int x = 0; x < n; ++x)
            laws.push_back(poisson_jump_law(m, s.epoch(e)[static_cast<size_t>(x)], x, s.lambda, series));
        epoch_laws.push_back(std::move(laws));
    }
    std::vector<JumpLaw> tail_laws;
    tail_laws.reserve(static_cast<size_t>(n));
    for (int x = 0; x < n; ++x)
        tail_laws.push_back(poisson_jump_law(m, s.tail_epoch[static_cast<size_t>(x)], x, s.lambda, series));
    return evaluate_epochs(epoch_laws, tail_laws, m.cost_count, x0, opts);
}

}  // namespace gictmdp
