#include "gictmdp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gictmdp/errors.hpp"

namespace gictmdp {

namespace {

void check_dist(const Vec& dist, size_t n, const char* what) {
    if (dist.size() != n) throw ValidationError(std::string(what) + ": wrong length");
    Real sum = 0.0;
    for (Real p : dist) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw ValidationError(std::string(what) + ": bad probability entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw ValidationError(std::string(what) + ": distribution does not sum to 1");
}

void check_schedule(const TimeSchedule& rho, size_t n, const char* what) {
    for (const auto& seg : rho.segments) {
        if (!(seg.duration > 0.0) || !std::isfinite(seg.duration))
            throw ValidationError(std::string(what) + ": segment duration must be positive finite");
        check_dist(seg.dist, n, what);
    }
    check_dist(rho.tail, n, what);
}

// Adds weight * value, treating a zero weight as absorbing the infinity.
void add_weighted(Real& acc, Real weight, Real value) {
    if (weight <= 0.0 || value == 0.0) return;
    acc += weight * value;
}

// Mixed rate / flow / cost of a distribution over gradual actions of m at x.
struct GiMix {
    Real rate = 0.0;
    Vec flow;
    Vec cost;
};

GiMix gi_mix(const GradualImpulsiveModel& m, int x, const Vec& dist) {
    GiMix mix;
    mix.flow.assign(m.states.size(), 0.0);
    mix.cost.assign(static_cast<size_t>(m.cost_count), 0.0);
    for (int a = 0; a < m.num_gradual(); ++a) {
        Real w = dist[static_cast<size_t>(a)];
        if (w == 0.0) continue;
        mix.rate += w * m.rate(x, a);
        for (int y = 0; y < m.num_states(); ++y)
            mix.flow[static_cast<size_t>(y)] += w * m.flow(x, a, y);
        for (int i = 0; i < m.cost_count; ++i)
            mix.cost[static_cast<size_t>(i)] += w * m.cg[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)];
    }
    return mix;
}

GiMix go_mix(const StandardModel& mgo, int x, const Vec& dist) {
    GiMix mix;
    mix.flow.assign(mgo.states.size(), 0.0);
    mix.cost.assign(static_cast<size_t>(mgo.cost_count), 0.0);
    for (int a = 0; a < mgo.num_actions(); ++a) {
        Real w = dist[static_cast<size_t>(a)];
        if (w == 0.0) continue;
        mix.rate += w * mgo.rate(x, a);
        for (int y = 0; y < mgo.num_states(); ++y)
            mix.flow[static_cast<size_t>(y)] += w * mgo.flow(x, a, y);
        for (int i = 0; i < mgo.cost_count; ++i)
            mix.cost[static_cast<size_t>(i)] += w * mgo.c[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)];
    }
    return mix;
}

// Runs the survival integral over one constant block of length `len`
// (possibly +inf) and folds the natural-jump mass, cost and elapsed time
// into the law. Returns the survival mass remaining after the block.
Real fold_block(JumpLaw& law, const GiMix& mix, Real survive, Real len) {
    if (survive <= 0.0 || len <= 0.0) return survive;
    Real integral;   // int_0^len e^{-rate t} dt
    Real remaining;  // e^{-rate len}
    if (mix.rate > 0.0) {
        if (std::isinf(len)) {
            integral = 1.0 / mix.rate;
            remaining = 0.0;
        } else {
            Real decay = std::exp(-mix.rate * len);
            integral = (1.0 - decay) / mix.rate;
            remaining = decay;
        }
    } else {
        integral = len;  // +inf on an unbounded zero-rate block
        remaining = 1.0;
    }
    for (size_t y = 0; y < law.next.size(); ++y)
        add_weighted(law.next[y], mix.flow[y] * survive, integral);
    for (size_t i = 0; i < law.sojourn_cost.size(); ++i)
        add_weighted(law.sojourn_cost[i], mix.cost[i] * survive, integral);
    add_weighted(law.mean_sojourn, survive, integral);
    return survive * remaining;
}

}  // namespace

JumpLaw gi_jump_law(const GradualImpulsiveModel& m, int x, Real c_hat, int b_hat,
                    const TimeSchedule& rho) {
    if (x < 0 || x >= m.num_states()) throw ValidationError("gi_jump_law: state out of range");
    if (!(c_hat >= 0.0)) throw ValidationError("gi_jump_law: planned impulse time must be >= 0");
    check_schedule(rho, m.gradual_actions.size(), "gi_jump_law rho");
    const bool impulse_branch = std::isfinite(c_hat);
    if (impulse_branch && (b_hat < 0 || b_hat >= m.num_impulse()))
        throw ValidationError("gi_jump_law: planned impulse out of range");

    JumpLaw law;
    law.next.assign(m.states.size(), 0.0);
    law.sojourn_cost.assign(static_cast<size_t>(m.cost_count), 0.0);

    Real survive = 1.0;
    Real elapsed = 0.0;
    for (const auto& seg : rho.segments) {
        if (elapsed >= c_hat) break;
        Real len = std::min(seg.duration, c_hat - elapsed);
        survive = fold_block(law, gi_mix(m, x, seg.dist), survive, len);
        elapsed += len;
    }
    if (elapsed < c_hat)
        survive = fold_block(law, gi_mix(m, x, rho.tail), survive, c_hat - elapsed);

    if (impulse_branch) {
        if (survive > 0.0) {
            for (int y = 0; y < m.num_states(); ++y)
                law.next[static_cast<size_t>(y)] += survive * m.Q[static_cast<size_t>(x)][static_cast<size_t>(b_hat)][static_cast<size_t>(y)];
            for (int i = 0; i < m.cost_count; ++i)
                law.sojourn_cost[static_cast<size_t>(i)] +=
                    survive * m.ci[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(b_hat)];
        }
    } else {
        law.absorb = survive;
        if (law.absorb > 0.0) law.mean_sojourn = kInf;
    }
    return law;
}

JumpLaw go_jump_law(const StandardModel& mgo, int x, const TimeSchedule& rho) {
    if (x < 0 || x >= mgo.num_states()) throw ValidationError("go_jump_law: state out of range");
    check_schedule(rho, mgo.actions.size(), "go_jump_law rho");

    JumpLaw law;
    law.next.assign(mgo.states.size(), 0.0);
    law.sojourn_cost.assign(static_cast<size_t>(mgo.cost_count), 0.0);

    Real survive = 1.0;
    for (const auto& seg : rho.segments)
        survive = fold_block(law, go_mix(mgo, x, seg.dist), survive, seg.duration);
    survive = fold_block(law, go_mix(mgo, x, rho.tail), survive, kInf);
    law.absorb = survive;
    if (law.absorb > 0.0) law.mean_sojourn = kInf;
    return law;
}

JumpLaw pseudo_jump_law(const StandardModel& mgo, const KernelSequence& kernels, int x,
                        Real lambda, const SeriesOptions& opts) {
    if (x < 0 || x >= mgo.num_states())
        throw ValidationError("pseudo_jump_law: state out of range");
    if (!(lambda > 0.0)) throw ValidationError("pseudo_jump_law: lambda must be positive");
    for (const auto& ker : kernels.prefix) check_dist(ker, mgo.actions.size(), "pseudo kernel");
    check_dist(kernels.tail, mgo.actions.size(), "pseudo tail kernel");

    JumpLaw law;
    law.next.assign(mgo.states.size(), 0.0);
    law.sojourn_cost.assign(static_cast<size_t>(mgo.cost_count), 0.0);

    const int n = mgo.num_states();
    const int prefix_len = static_cast<int>(kernels.prefix.size());
    // Tail kernel entirely on zero-rate gradual actions: actions are redrawn
    // forever without a jump, so the remaining series is an exact absorption
    // event (the structural check avoids misreading normalization dust).
    bool tail_frozen = true;
    for (int a = 0; a < mgo.num_actions(); ++a)
        if (kernels.tail[static_cast<size_t>(a)] > 0.0 &&
            (!mgo.is_gradual(a) || mgo.rate(x, a) > 0.0))
            tail_frozen = false;

    Real product = 1.0;  // prod_{i<k} int lambda_bar/(lambda_bar+q) dp_i
    for (int k = 0; k < opts.k_max; ++k) {
        if (k >= prefix_len && tail_frozen) {
            law.absorb += product;
            if (product > 0.0)
                for (int i = 0; i < mgo.cost_count; ++i) {
                    Real c = 0.0;
                    for (int a = 0; a < mgo.num_actions(); ++a)
                        c += kernels.tail[static_cast<size_t>(a)] *
                             mgo.c[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)];
                    if (c > 0.0) law.sojourn_cost[static_cast<size_t>(i)] = kInf;
                }
            law.mean_sojourn = kInf;
            law.trunc_error = 0.0;
            return law;
        }
        const Vec& ker = kernels.at(k);
        Real contraction = 0.0;
        for (int a = 0; a < mgo.num_actions(); ++a) {
            Real w = ker[static_cast<size_t>(a)];
            if (w == 0.0) continue;
            const Real lb = mgo.is_gradual(a) ? lambda : 0.0;
            const Real denom = lb + mgo.rate(x, a);
            contraction += w * lb / denom;
            const Real scale = product * w / denom;
            for (int y = 0; y < n; ++y) law.next[static_cast<size_t>(y)] += scale * mgo.flow(x, a, y);
            for (int i = 0; i < mgo.cost_count; ++i)
                law.sojourn_cost[static_cast<size_t>(i)] +=
                    scale * mgo.c[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)];
            law.mean_sojourn += scale;
        }
        product *= contraction;
        if (product < opts.tol) {
            law.trunc_error = product;
            return law;
        }
    }
    throw DivergesError("pseudo_jump_law: kernel series contracts too slowly at state " +
                            mgo.states[static_cast<size_t>(x)],
                        x);
}

JumpLaw poisson_jump_law(const GradualImpulsiveModel& m, const PoissonStateRule& rule, int x,
                         Real lambda, const SeriesOptions& opts) {
    if (x < 0 || x >= m.num_states())
        throw ValidationError("poisson_jump_law: state out of range");
    if (!(lambda > 0.0)) throw ValidationError("poisson_jump_law: lambda must be positive");
    const size_t ng = m.gradual_actions.size();
    const size_t ni = m.impulse_actions.size();
    for (const auto& ker : rule.grad_prefix) check_dist(ker, ng, "poisson gradual kernel");
    check_dist(rule.grad_tail, ng, "poisson gradual tail kernel");
    for (Real g : rule.g_prefix)
        if (!(g >= 0.0 && g <= 1.0))
            throw ValidationError("poisson_jump_law: continuation probability outside [0,1]");
    if (!(rule.g_tail >= 0.0 && rule.g_tail <= 1.0))
        throw ValidationError("poisson_jump_law: continuation probability outside [0,1]");
    if (ni > 0) {
        for (const auto& ker : rule.imp_prefix) check_dist(ker, ni, "poisson impulse kernel");
        check_dist(rule.imp_tail, ni, "poisson impulse kernel");
    }

    JumpLaw law;
    law.next.assign(m.states.size(), 0.0);
    law.sojourn_cost.assign(static_cast<size_t>(m.cost_count), 0.0);

    const int n = m.num_states();
    const int I = m.cost_count;
    // Never-impulse suffix product prod_{m>k} g_m: zero unless the tail
    // continuation is exactly one, in which case only prefix factors matter.
    const int g_len = static_cast<int>(rule.g_prefix.size());
    const bool tail_continues = rule.g_tail >= 1.0 - 1e-12;

    // pend accumulates natural-jump mass/cost that is released when a later
    // redraw turns out impulsive (the before-the-impulse term).
    Vec pend_next(static_cast<size_t>(n), 0.0);
    Vec pend_cost(static_cast<size_t>(I), 0.0);
    Real pend_mass = 0.0;
    Real product = 1.0;  // prod_{l<k} g_l * int lambda/(lambda+q) dp_l
    const int max_prefix = std::max({static_cast<int>(rule.grad_prefix.size()),
                                     static_cast<int>(rule.g_prefix.size()),
                                     static_cast<int>(rule.imp_prefix.size())});

    // Continue-forever tail on zero-rate gradual actions: exact absorption
    // (g exactly one and every tail gradual atom rate-free).
    bool tail_frozen = rule.g_tail >= 1.0;
    for (size_t a = 0; a < ng; ++a)
        if (rule.grad_tail[a] > 0.0 && m.rate(x, static_cast<int>(a)) > 0.0) tail_frozen = false;

    for (int k = 0; k < opts.k_max; ++k) {
        const Real g = rule.g_at(k);
        const Vec& grad = rule.grad_at(k);

        if (k >= max_prefix && tail_frozen) {
            law.absorb += product;
            if (product > 0.0)
                for (int i = 0; i < I; ++i) {
                    Real c = 0.0;
                    for (size_t a = 0; a < ng; ++a)
                        c += grad[a] * m.cg[static_cast<size_t>(i)][static_cast<size_t>(x)][a];
                    if (c > 0.0) law.sojourn_cost[static_cast<size_t>(i)] = kInf;
                }
            law.mean_sojourn = kInf;
            law.trunc_error = 0.0;
            return law;
        }

        // Impulse at redraw k: release pending natural jumps and the impulse itself.
        const Real stop = 1.0 - g;
        if (stop > 0.0) {
            for (int y = 0; y < n; ++y) law.next[static_cast<size_t>(y)] += stop * pend_next[static_cast<size_t>(y)];
            for (int i = 0; i < I; ++i) law.sojourn_cost[static_cast<size_t>(i)] += stop * pend_cost[static_cast<size_t>(i)];
            if (ni > 0) {
                const Vec& imp = rule.imp_at(k);
                const Real w = product * stop;
                for (size_t b = 0; b < ni; ++b) {
                    if (imp[b] == 0.0) continue;
                    for (int y = 0; y < n; ++y)
                        law.next[static_cast<size_t>(y)] += w * imp[b] * m.Q[static_cast<size_t>(x)][b][static_cast<size_t>(y)];
                    for (int i = 0; i < I; ++i)
                        law.sojourn_cost[static_cast<size_t>(i)] += w * imp[b] * m.ci[static_cast<size_t>(i)][static_cast<size_t>(x)][b];
                }
            } else if (stop * product > 0.0) {
                throw ValidationError(
                    "poisson_jump_law: impulse scheduled but the model has no impulse actions");
            }
        }

        // Gradual segment k: contraction factor, natural-jump terms and costs.
        Real contraction = 0.0;
        Vec seg_next(static_cast<size_t>(n), 0.0);
        Vec seg_cost(static_cast<size_t>(I), 0.0);
        Real seg_mass = 0.0;
        Real seg_time = 0.0;
        for (size_t a = 0; a < ng; ++a) {
            Real w = grad[a];
            if (w == 0.0) continue;
            const Real denom = lambda + m.rate(x, static_cast<int>(a));
            contraction += w * lambda / denom;
            const Real scale = w / denom;
            for (int y = 0; y < n; ++y) seg_next[static_cast<size_t>(y)] += scale * m.flow(x, static_cast<int>(a), y);
            for (int i = 0; i < I; ++i)
                seg_cost[static_cast<size_t>(i)] += scale * m.cg[static_cast<size_t>(i)][static_cast<size_t>(x)][a];
            seg_time += scale;
        }
        for (int y = 0; y < n; ++y) seg_mass += seg_next[static_cast<size_t>(y)];
        law.mean_sojourn += product * g * seg_time;

        // Suffix product for the never-impulse branch containing segment k.
        Real suffix;
        if (!tail_continues) {
            suffix = 0.0;
        } else {
            suffix = 1.0;
            for (int mm = k + 1; mm < g_len; ++mm) suffix *= rule.g_prefix[static_cast<size_t>(mm)];
        }
        const Real dweight = product * g;  // weight of segment k's natural-jump terms
        if (suffix > 0.0) {
            for (int y = 0; y < n; ++y)
                law.next[static_cast<size_t>(y)] += dweight * suffix * seg_next[static_cast<size_t>(y)];
            for (int i = 0; i < I; ++i)
                law.sojourn_cost[static_cast<size_t>(i)] += dweight * suffix * seg_cost[static_cast<size_t>(i)];
        }

        // Queue segment k's natural-jump terms for release by later impulses.
        pend_mass = pend_mass * g + dweight * seg_mass;
        for (int y = 0; y < n; ++y)
            pend_next[static_cast<size_t>(y)] = pend_next[static_cast<size_t>(y)] * g + dweight * seg_next[static_cast<size_t>(y)];
        for (int i = 0; i < I; ++i)
            pend_cost[static_cast<size_t>(i)] = pend_cost[static_cast<size_t>(i)] * g + dweight * seg_cost[static_cast<size_t>(i)];

        product *= g * contraction;
        // Unemitted terms: future impulse branches (<= product) plus the part
        // of pend a later impulse will still release (suffix = prod_{m>k} g_m).
        Real pend_cost_total = 0.0;
        for (int i = 0; i < I; ++i) pend_cost_total += pend_cost[static_cast<size_t>(i)];
        const Real unemitted = product + (pend_mass + pend_cost_total) * (1.0 - suffix);
        if (unemitted < opts.tol) {
            law.trunc_error = unemitted;
            return law;
        }
    }
    throw DivergesError("poisson_jump_law: kernel series does not contract at state " +
                            m.states[static_cast<size_t>(x)],
                        x);
}

JumpLaw strategy_jump_law(const GradualImpulsiveModel& m, const StationaryStrategy& s, int x) {
    if (x < 0 || x >= m.num_states())
        throw ValidationError("strategy_jump_law: state out of range");
    const Real w = s.w_imp[static_cast<size_t>(x)];

    JumpLaw law;
    if (w < 1.0) {
        law = gi_jump_law(m, x, kInf, -1, TimeSchedule::constant(s.f_hat[static_cast<size_t>(x)]));
        if (w > 0.0) {
            law.absorb *= 1.0 - w;
            for (auto& p : law.next) p *= 1.0 - w;
            for (auto& c : law.sojourn_cost)
                if (c != 0.0) c *= 1.0 - w;  // keeps +inf entries infinite
            if (law.absorb == 0.0 && std::isfinite(law.mean_sojourn))
                law.mean_sojourn *= 1.0 - w;
        }
    } else {
        law.next.assign(m.states.size(), 0.0);
        law.sojourn_cost.assign(static_cast<size_t>(m.cost_count), 0.0);
    }
    if (w > 0.0) {
        for (int b = 0; b < m.num_impulse(); ++b) {
            const Real wb = w * s.beta[static_cast<size_t>(x)][static_cast<size_t>(b)];
            if (wb == 0.0) continue;
            for (int y = 0; y < m.num_states(); ++y)
                law.next[static_cast<size_t>(y)] += wb * m.Q[static_cast<size_t>(x)][static_cast<size_t>(b)][static_cast<size_t>(y)];
            for (int i = 0; i < m.cost_count; ++i)
                law.sojourn_cost[static_cast<size_t>(i)] +=
                    wb * m.ci[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(b)];
        }
    }
    return law;
}

}  // namespace gictmdp
