#pragma once

// Test-only oracles, independent of the library's evaluation paths:
//  - midpoint/Simpson quadrature of the one-step law integrals,
//  - dense Gaussian-elimination solve of w = g + P w,
//  - Neumann-series expected visits of the embedded jump chain,
// plus deterministic random-instance generators for the property suites.

#include <cmath>
#include <cstdint>
#include <functional>
#include <algorithm>
#include <vector>

#include "gictmdp/bellman.hpp"
#include "gictmdp/dynamics.hpp"
#include "gictmdp/model.hpp"

namespace gictmdp::testing {

// Deterministic raw-bits generator; avoids implementation-defined std
// distributions so frozen test corpora are stable across toolchains.
class TestRng {
public:
    explicit TestRng(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int randint(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    bool chance(double p) { return uniform() < p; }

    // Random distribution over k slots with at most `max_support` atoms,
    // each atom >= 0.1 before normalization.
    Vec distribution(int k, int max_support = 3) {
        Vec d(static_cast<size_t>(k), 0.0);
        const int support = randint(1, std::min(k, max_support));
        double total = 0.0;
        for (int s = 0; s < support; ++s) {
            int slot = randint(0, k - 1);
            double w = uniform(0.1, 1.0);
            d[static_cast<size_t>(slot)] += w;
            total += w;
        }
        for (auto& v : d) v /= total;
        return d;
    }

private:
    std::uint64_t state_;
};

struct ModelOptions {
    int min_states = 2;
    int max_states = 8;
    int max_gradual = 3;
    int max_impulse = 3;
    bool forward_only = true;      // flows go to strictly larger states
    double zero_rate_prob = 0.25;  // chance a gradual action has zero rate
    double min_rate = 0.3;
    double max_rate = 3.0;
    int constraints = 1;           // J
    bool allow_no_impulse = true;
};

// Random finite instance. With forward_only the last state is rate-free and
// cost-free, so every total cost is finite and every chain is absorbed.
inline GradualImpulsiveModel random_model(TestRng& rng, const ModelOptions& opt = {}) {
    GradualImpulsiveModel m;
    const int n = rng.randint(opt.min_states, opt.max_states);
    const int ng = rng.randint(1, opt.max_gradual);
    int ni = rng.randint(opt.allow_no_impulse ? 0 : 1, opt.max_impulse);
    if (n < 2) ni = 0;  // impulses need a distinct target
    for (int x = 0; x < n; ++x) m.states.push_back("s" + std::to_string(x));
    for (int a = 0; a < ng; ++a) m.gradual_actions.push_back("g" + std::to_string(a));
    for (int b = 0; b < ni; ++b) m.impulse_actions.push_back("i" + std::to_string(b));

    auto targets_from = [&](int x) {
        std::vector<int> t;
        for (int y = 0; y < n; ++y)
            if (y != x && (!opt.forward_only || y > x)) t.push_back(y);
        return t;
    };

    m.q.assign(static_cast<size_t>(n), Mat(static_cast<size_t>(ng), Vec(static_cast<size_t>(n), 0.0)));
    m.Q.assign(static_cast<size_t>(n), Mat(static_cast<size_t>(ni), Vec(static_cast<size_t>(n), 0.0)));
    for (int x = 0; x < n; ++x) {
        auto targets = targets_from(x);
        for (int a = 0; a < ng; ++a) {
            if (targets.empty() || rng.chance(opt.zero_rate_prob)) continue;  // zero-rate row
            const double rate = rng.uniform(opt.min_rate, opt.max_rate);
            Vec split = rng.distribution(static_cast<int>(targets.size()));
            for (size_t t = 0; t < targets.size(); ++t)
                m.q[static_cast<size_t>(x)][static_cast<size_t>(a)][static_cast<size_t>(targets[t])] = rate * split[t];
            m.q[static_cast<size_t>(x)][static_cast<size_t>(a)][static_cast<size_t>(x)] = -rate;
        }
        for (int b = 0; b < ni; ++b) {
            if (targets.empty()) continue;
            Vec split = rng.distribution(static_cast<int>(targets.size()));
            for (size_t t = 0; t < targets.size(); ++t)
                m.Q[static_cast<size_t>(x)][static_cast<size_t>(b)][static_cast<size_t>(targets[t])] = split[t];
        }
    }

    m.cost_count = 1 + opt.constraints;
    m.bounds.assign(static_cast<size_t>(opt.constraints), 1.0);
    m.cg.assign(static_cast<size_t>(m.cost_count), Mat(static_cast<size_t>(n), Vec(static_cast<size_t>(ng), 0.0)));
    m.ci.assign(static_cast<size_t>(m.cost_count), Mat(static_cast<size_t>(n), Vec(static_cast<size_t>(ni), 0.0)));
    for (int i = 0; i < m.cost_count; ++i)
        for (int x = 0; x < n; ++x) {
            // Zero-rate gradual actions stay cost-free: a cost rate that can
            // never stop accruing makes every total infinite, and mixing it
            // with impulses leaves the replication identity out of domain.
            for (int a = 0; a < ng; ++a)
                if (m.rate(x, a) > 0.0 && rng.chance(0.6))
                    m.cg[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)] = rng.uniform(0.0, 2.0);
            for (int b = 0; b < ni; ++b)
                if (rng.chance(0.6)) m.ci[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(b)] = rng.uniform(0.0, 2.0);
        }

    m.x0 = 0;
    m.default_admissibility();
    // Impulses whose kernel row could not be filled (no valid target) are
    // inadmissible at that state.
    for (int x = 0; x < n; ++x)
        for (int b = 0; b < ni; ++b) {
            Real sum = 0.0;
            for (Real p : m.Q[static_cast<size_t>(x)][static_cast<size_t>(b)]) sum += p;
            if (std::abs(sum - 1.0) > 1e-9) m.adm_impulse[static_cast<size_t>(x)][static_cast<size_t>(b)] = 0;
        }
    return m;
}

// States where an impulse is actually usable (valid kernel row).
inline bool impulse_usable(const GradualImpulsiveModel& m, int x, int b) {
    Real sum = 0.0;
    for (Real p : m.Q[static_cast<size_t>(x)][static_cast<size_t>(b)]) sum += p;
    return std::abs(sum - 1.0) < 1e-9;
}

// Random stationary policy on reduce_model(m) steering each state into one of
// the lift case flavors: (a) mixed gradual+impulse, (b) purely gradual with
// positive drift, (c) zero-drift gradual plus impulses, or fully zero-drift.
inline StationaryPolicy random_case_policy(TestRng& rng, const GradualImpulsiveModel& m) {
    const int ng = m.num_gradual();
    const int ni = m.num_impulse();
    StationaryPolicy pol;
    pol.rows.assign(m.states.size(), Vec(static_cast<size_t>(ng + ni), 0.0));
    for (int x = 0; x < m.num_states(); ++x) {
        std::vector<int> pos_rate, zero_rate, usable_imp;
        for (int a = 0; a < ng; ++a)
            if (m.gradual_admissible(x, a)) (m.rate(x, a) > 0.0 ? pos_rate : zero_rate).push_back(a);
        for (int b = 0; b < ni; ++b)
            if (m.impulse_admissible(x, b) && impulse_usable(m, x, b)) usable_imp.push_back(b);

        Vec& row = pol.rows[static_cast<size_t>(x)];
        const int flavor = rng.randint(0, 3);
        auto spread = [&](const std::vector<int>& ids, double mass, int offset) {
            if (ids.empty()) return;
            Vec split = rng.distribution(static_cast<int>(ids.size()));
            for (size_t i = 0; i < ids.size(); ++i) row[static_cast<size_t>(offset + ids[i])] += mass * split[i];
        };
        if (flavor == 0 && !pos_rate.empty() && !usable_imp.empty()) {
            const double imp_mass = rng.uniform(0.2, 0.8);
            spread(pos_rate, 1.0 - imp_mass, 0);
            spread(usable_imp, imp_mass, ng);
        } else if (flavor == 1 && !pos_rate.empty()) {
            spread(pos_rate, 1.0, 0);
        } else if (flavor == 2 && !zero_rate.empty() && !usable_imp.empty()) {
            const double imp_mass = rng.uniform(0.2, 1.0);
            spread(zero_rate, 1.0 - imp_mass, 0);
            spread(usable_imp, imp_mass, ng);
        } else if (!zero_rate.empty()) {
            spread(zero_rate, 1.0, 0);
        } else if (!pos_rate.empty()) {
            spread(pos_rate, 1.0, 0);
        } else {
            spread(usable_imp, 1.0, ng);
        }
    }
    return pol;
}

// Adaptive-Simpson quadrature of the standard-model one-step integrals with
// the survival exponent evaluated pointwise from the schedule; an
// implementation-independent check of go_jump_law's closed forms.
inline JumpLaw quadrature_go_law(const StandardModel& mgo, int x, const TimeSchedule& rho) {
    struct Piece {
        Real start, rate;
        Vec dist;
    };
    std::vector<Piece> pieces;
    Real t0 = 0.0;
    for (const auto& seg : rho.segments) {
        Real r = 0.0;
        for (int a = 0; a < mgo.num_actions(); ++a) r += seg.dist[static_cast<size_t>(a)] * mgo.rate(x, a);
        pieces.push_back({t0, r, seg.dist});
        t0 += seg.duration;
    }
    Real tail_rate = 0.0;
    for (int a = 0; a < mgo.num_actions(); ++a) tail_rate += rho.tail[static_cast<size_t>(a)] * mgo.rate(x, a);
    pieces.push_back({t0, tail_rate, rho.tail});
    const Real span = t0;

    auto piece_at = [&](Real t) -> const Piece& {
        for (size_t p = pieces.size(); p-- > 0;)
            if (t >= pieces[p].start) return pieces[p];
        return pieces.front();
    };
    auto exponent_at = [&](Real t) {
        Real e = 0.0;
        for (size_t p = 0; p < pieces.size(); ++p) {
            const Real end = p + 1 < pieces.size() ? pieces[p + 1].start : t;
            if (t <= pieces[p].start) break;
            e += pieces[p].rate * (std::min(t, end) - pieces[p].start);
        }
        return e;
    };
    // Vector integrand: per-target flow, per-index cost rate, and the plain
    // survival (for the mean sojourn), all weighted by exp(-E(t)).
    const int n = mgo.num_states();
    const int I = mgo.cost_count;
    const size_t dim = static_cast<size_t>(n + I + 1);
    auto integrand = [&](Real t, Vec& out) {
        const Piece& p = piece_at(t);
        const Real survive = std::exp(-exponent_at(t));
        for (int y = 0; y < n; ++y) {
            Real f = 0.0;
            for (int a = 0; a < mgo.num_actions(); ++a) f += p.dist[static_cast<size_t>(a)] * mgo.flow(x, a, y);
            out[static_cast<size_t>(y)] = f * survive;
        }
        for (int i = 0; i < I; ++i) {
            Real c = 0.0;
            for (int a = 0; a < mgo.num_actions(); ++a)
                c += p.dist[static_cast<size_t>(a)] * mgo.c[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)];
            out[static_cast<size_t>(n + i)] = c * survive;
        }
        out[dim - 1] = survive;
    };
    std::function<void(Real, Real, const Vec&, Vec&, int)> simpson =
        [&](Real a, Real b, const Vec& whole, Vec& acc, int depth) {
            const Real m = 0.5 * (a + b);
            Vec fa(dim), fm(dim), fb(dim), fl(dim), fr(dim), left(dim), right(dim);
            integrand(a, fa);
            integrand(m, fm);
            integrand(b, fb);
            integrand(0.5 * (a + m), fl);
            integrand(0.5 * (m + b), fr);
            Real err = 0.0;
            for (size_t j = 0; j < dim; ++j) {
                left[j] = (a - m) / -6.0 * (fa[j] + 4.0 * fl[j] + fm[j]);
                right[j] = (m - b) / -6.0 * (fm[j] + 4.0 * fr[j] + fb[j]);
                err += std::abs(left[j] + right[j] - whole[j]);
            }
            if ((err < 1e-13 && depth > 4) || depth > 28) {
                for (size_t j = 0; j < dim; ++j) acc[j] += left[j] + right[j];
                return;
            }
            simpson(a, m, left, acc, depth + 1);
            simpson(m, b, right, acc, depth + 1);
        };
    auto integrate = [&](Real a, Real b, Vec& acc) {
        Vec fa(dim), fm(dim), fb(dim), whole(dim);
        integrand(a, fa);
        integrand(0.5 * (a + b), fm);
        integrand(b, fb);
        for (size_t j = 0; j < dim; ++j) whole[j] = (b - a) / 6.0 * (fa[j] + 4.0 * fm[j] + fb[j]);
        simpson(a, b, whole, acc, 0);
    };

    Vec acc(dim, 0.0);
    Real lo = 0.0;
    for (size_t p = 1; p < pieces.size(); ++p) {
        integrate(lo, pieces[p].start, acc);
        lo = pieces[p].start;
    }
    if (tail_rate > 0.0) {
        // March the unbounded tail in chunks until the survival is negligible.
        Real chunk = 10.0 / tail_rate;
        Real at = span;
        for (int c = 0; c < 40 && std::exp(-exponent_at(at)) > 1e-18; ++c) {
            integrate(at, at + chunk, acc);
            at += chunk;
        }
    }

    JumpLaw law;
    law.next.assign(static_cast<size_t>(n), 0.0);
    law.sojourn_cost.assign(static_cast<size_t>(I), 0.0);
    for (int y = 0; y < n; ++y) law.next[static_cast<size_t>(y)] = acc[static_cast<size_t>(y)];
    for (int i = 0; i < I; ++i) law.sojourn_cost[static_cast<size_t>(i)] = acc[static_cast<size_t>(n + i)];
    law.mean_sojourn = acc[dim - 1];
    law.absorb = tail_rate > 0.0 ? 0.0 : std::exp(-exponent_at(span));
    return law;
}

// Dense Gaussian-elimination solve of (I - P) w = g; valid when every state
// is transient (progressing chain), which forward-only models guarantee.
inline Vec direct_solve_values(const std::vector<JumpLaw>& laws, int cost_index) {
    const int n = static_cast<int>(laws.size());
    std::vector<Vec> a(static_cast<size_t>(n), Vec(static_cast<size_t>(n + 1), 0.0));
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y)
            a[static_cast<size_t>(x)][static_cast<size_t>(y)] = (x == y ? 1.0 : 0.0) - laws[static_cast<size_t>(x)].next[static_cast<size_t>(y)];
        a[static_cast<size_t>(x)][static_cast<size_t>(n)] = laws[static_cast<size_t>(x)].sojourn_cost[static_cast<size_t>(cost_index)];
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<size_t>(r)][static_cast<size_t>(col)]) > std::abs(a[static_cast<size_t>(piv)][static_cast<size_t>(col)])) piv = r;
        std::swap(a[static_cast<size_t>(col)], a[static_cast<size_t>(piv)]);
        for (int r = 0; r < n; ++r) {
            if (r == col || a[static_cast<size_t>(r)][static_cast<size_t>(col)] == 0.0) continue;
            const Real f = a[static_cast<size_t>(r)][static_cast<size_t>(col)] / a[static_cast<size_t>(col)][static_cast<size_t>(col)];
            for (int c = col; c <= n; ++c) a[static_cast<size_t>(r)][static_cast<size_t>(c)] -= f * a[static_cast<size_t>(col)][static_cast<size_t>(c)];
        }
    }
    Vec w(static_cast<size_t>(n), 0.0);
    for (int x = 0; x < n; ++x) w[static_cast<size_t>(x)] = a[static_cast<size_t>(x)][static_cast<size_t>(n)] / a[static_cast<size_t>(x)][static_cast<size_t>(x)];
    return w;
}

// Expected visits of the embedded jump chain started at x0 and killed on
// leaving the set `restrict_to`, via Neumann iteration u <- delta + u P.
inline Vec neumann_visits(const std::vector<JumpLaw>& laws, int x0,
                          const std::vector<char>& restrict_to, int iters = 200000,
                          Real tol = 1e-12) {
    const int n = static_cast<int>(laws.size());
    Vec u(static_cast<size_t>(n), 0.0), nu(static_cast<size_t>(n), 0.0);
    for (int it = 0; it < iters; ++it) {
        std::fill(nu.begin(), nu.end(), 0.0);
        nu[static_cast<size_t>(x0)] = 1.0;
        for (int x = 0; x < n; ++x) {
            if (!restrict_to[static_cast<size_t>(x)] || u[static_cast<size_t>(x)] == 0.0) continue;
            for (int y = 0; y < n; ++y)
                if (restrict_to[static_cast<size_t>(y)])
                    nu[static_cast<size_t>(y)] += u[static_cast<size_t>(x)] * laws[static_cast<size_t>(x)].next[static_cast<size_t>(y)];
        }
        Real diff = 0.0;
        for (int x = 0; x < n; ++x) diff = std::max(diff, std::abs(nu[static_cast<size_t>(x)] - u[static_cast<size_t>(x)]));
        u.swap(nu);
        if (diff < tol) break;
    }
    return u;
}

inline bool close(Real a, Real b, Real tol) {
    if (std::isinf(a) || std::isinf(b)) return std::isinf(a) && std::isinf(b) && (a > 0) == (b > 0);
    return std::abs(a - b) <= tol;
}

inline bool laws_match(const JumpLaw& lhs, const JumpLaw& rhs, Real tol) {
    if (lhs.next.size() != rhs.next.size()) return false;
    for (size_t y = 0; y < lhs.next.size(); ++y)
        if (!close(lhs.next[y], rhs.next[y], tol)) return false;
    if (!close(lhs.absorb, rhs.absorb, tol)) return false;
    for (size_t i = 0; i < lhs.sojourn_cost.size(); ++i)
        if (!close(lhs.sojourn_cost[i], rhs.sojourn_cost[i], tol)) return false;
    return true;
}

}  // namespace gictmdp::testing
