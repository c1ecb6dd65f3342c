#include "gictmdp/sim.hpp"

#include <algorithm>
#include <cmath>

#include "gictmdp/errors.hpp"

namespace gictmdp {

namespace {

std::uint64_t splitmix64(std::uint64_t& z) {
    z += 0x9E3779B97F4A7C15ULL;
    std::uint64_t x = z;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t episode) {
    std::uint64_t z = seed ^ (episode * 0xD1B54A32D192ED03ULL + 0x2545F4914F6CDD1DULL);
    for (auto& s : state_) s = splitmix64(z);
}

std::uint64_t RngStream::next_u64() {
    // xoshiro256++
    std::uint64_t* s = state_;
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
}

Real RngStream::uniform() { return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53; }

Real RngStream::exponential(Real rate) {
    if (!(rate > 0.0)) return kInf;
    Real u = uniform();
    return -std::log1p(-u) / rate;
}

int RngStream::categorical(const Vec& weights, Real total) {
    const Real target = uniform() * total;
    Real acc = 0.0;
    int last = -1;
    for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
        if (weights[static_cast<size_t>(i)] <= 0.0) continue;
        acc += weights[static_cast<size_t>(i)];
        last = i;
        if (target < acc) return i;
    }
    return last;  // guards rounding at the top of the cumulative sum
}

namespace {

struct EpisodeOutcome {
    Vec cost;
    bool truncated = false;
};

// Deterministic pairwise reduction of per-episode values in index order.
Real pairwise_sum(const Vec& values, size_t lo, size_t hi) {
    if (hi - lo <= 8) {
        Real s = 0.0;
        for (size_t i = lo; i < hi; ++i) s += values[i];
        return s;
    }
    const size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(values, lo, mid) + pairwise_sum(values, mid, hi);
}

template <typename EpisodeFn>
SimEstimate run_episodes(int cost_count, const SimConfig& cfg, EpisodeFn&& episode) {
    if (cfg.episodes < 1) throw ValidationError("simulate: episodes must be >= 1");
    const size_t n = static_cast<size_t>(cfg.episodes);
    std::vector<Vec> per_index(static_cast<size_t>(cost_count), Vec(n, 0.0));
    int truncated = 0;
    for (size_t e = 0; e < n; ++e) {
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(e));
        EpisodeOutcome out = episode(rng);
        if (out.truncated) ++truncated;
        for (int i = 0; i < cost_count; ++i) per_index[static_cast<size_t>(i)][e] = out.cost[static_cast<size_t>(i)];
    }
    SimEstimate est;
    est.episodes = cfg.episodes;
    est.truncated_episode_count = truncated;
    est.mean.assign(static_cast<size_t>(cost_count), 0.0);
    est.std_error.assign(static_cast<size_t>(cost_count), 0.0);
    for (int i = 0; i < cost_count; ++i) {
        const Vec& vals = per_index[static_cast<size_t>(i)];
        const Real mean = pairwise_sum(vals, 0, n) / static_cast<Real>(n);
        est.mean[static_cast<size_t>(i)] = mean;
        if (n > 1 && std::isfinite(mean)) {
            Vec sq(n, 0.0);
            for (size_t e = 0; e < n; ++e) {
                const Real d = vals[e] - mean;
                sq[e] = d * d;
            }
            const Real var = pairwise_sum(sq, 0, n) / static_cast<Real>(n - 1);
            est.std_error[static_cast<size_t>(i)] = std::sqrt(var / static_cast<Real>(n));
        } else if (!std::isfinite(mean)) {
            est.std_error[static_cast<size_t>(i)] = kInf;
        }
    }
    return est;
}

struct MixedControl {
    Real rate = 0.0;
    Vec flow;       // off-diagonal rate mass per target
    Vec cost_rate;  // per cost index
};

MixedControl mixed_go(const StandardModel& mgo, int x, const Vec& dist) {
    MixedControl mc;
    mc.flow.assign(mgo.states.size(), 0.0);
    mc.cost_rate.assign(static_cast<size_t>(mgo.cost_count), 0.0);
    for (int a = 0; a < mgo.num_actions(); ++a) {
        const Real w = dist[static_cast<size_t>(a)];
        if (w <= 0.0) continue;
        mc.rate += w * mgo.rate(x, a);
        for (int y = 0; y < mgo.num_states(); ++y) mc.flow[static_cast<size_t>(y)] += w * mgo.flow(x, a, y);
        for (int i = 0; i < mgo.cost_count; ++i)
            mc.cost_rate[static_cast<size_t>(i)] += w * mgo.c[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)];
    }
    return mc;
}

MixedControl mixed_gi(const GradualImpulsiveModel& m, int x, const Vec& dist) {
    MixedControl mc;
    mc.flow.assign(m.states.size(), 0.0);
    mc.cost_rate.assign(static_cast<size_t>(m.cost_count), 0.0);
    for (int a = 0; a < m.num_gradual(); ++a) {
        const Real w = dist[static_cast<size_t>(a)];
        if (w <= 0.0) continue;
        mc.rate += w * m.rate(x, a);
        for (int y = 0; y < m.num_states(); ++y) mc.flow[static_cast<size_t>(y)] += w * m.flow(x, a, y);
        for (int i = 0; i < m.cost_count; ++i)
            mc.cost_rate[static_cast<size_t>(i)] += w * m.cg[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)];
    }
    return mc;
}

void accrue(Vec& cost, const Vec& rates, Real elapsed) {
    for (size_t i = 0; i < cost.size(); ++i) {
        const Real r = rates[i];
        if (r > 0.0) cost[i] += elapsed == kInf ? kInf : r * elapsed;
    }
}

// One sojourn under a piecewise-constant relaxed control in the standard
// model: exponential clock segment by segment. Returns the next state or -1
// on absorption; advances *clock by the sojourn length.
int sample_go_sojourn(const StandardModel& mgo, int x, const TimeSchedule& rho, RngStream& rng,
                      Vec& cost, Real* clock) {
    size_t seg = 0;
    while (true) {
        const Vec& dist = seg < rho.segments.size() ? rho.segments[seg].dist : rho.tail;
        const Real len = seg < rho.segments.size() ? rho.segments[seg].duration : kInf;
        MixedControl mc = mixed_go(mgo, x, dist);
        const Real jump_after = rng.exponential(mc.rate);
        if (jump_after < len) {
            accrue(cost, mc.cost_rate, jump_after);
            *clock += jump_after;
            return rng.categorical(mc.flow, mc.rate);
        }
        accrue(cost, mc.cost_rate, len);
        if (len == kInf) return -1;  // zero-rate unbounded block: absorbed
        *clock += len;
        ++seg;
    }
}

}  // namespace

SimEstimate simulate_policy(const StandardModel& mgo, const StationaryPolicy& pol, int x0,
                            const SimConfig& cfg) {
    require_valid(validate_policy(mgo, pol), "simulate_policy");
    MarkovPolicy constant = MarkovPolicy::constant(pol);
    return simulate_policy(mgo, constant, x0, cfg);
}

SimEstimate simulate_policy(const StandardModel& mgo, const MarkovPolicy& pol, int x0,
                            const SimConfig& cfg) {
    if (x0 < 0 || x0 >= mgo.num_states()) throw ValidationError("simulate_policy: x0 out of range");
    return run_episodes(mgo.cost_count, cfg, [&](RngStream& rng) {
        EpisodeOutcome out;
        out.cost.assign(static_cast<size_t>(mgo.cost_count), 0.0);
        int x = x0;
        Real clock = 0.0;
        for (int jump = 0; jump < cfg.max_jumps; ++jump) {
            if (cfg.time_horizon > 0.0 && clock >= cfg.time_horizon) {
                out.truncated = true;
                return out;
            }
            const int y = sample_go_sojourn(mgo, x, pol.epoch(jump)[static_cast<size_t>(x)], rng,
                                            out.cost, &clock);
            if (y < 0) return out;  // absorbed
            x = y;
        }
        out.truncated = true;
        return out;
    });
}

namespace {

// True when the kernel can never produce a jump: all mass frozen on
// zero-rate gradual actions. The sojourn from such a kernel is infinite.
bool kernel_frozen(const StandardModel& mgo, int x, const Vec& ker) {
    for (int a = 0; a < mgo.num_actions(); ++a)
        if (ker[static_cast<size_t>(a)] > 0.0 && (!mgo.is_gradual(a) || mgo.rate(x, a) > 0.0))
            return false;
    return true;
}

void accrue_frozen_tail(const StandardModel& mgo, int x, const Vec& ker, Vec& cost) {
    for (int i = 0; i < mgo.cost_count; ++i) {
        Real c = 0.0;
        for (int a = 0; a < mgo.num_actions(); ++a)
            c += ker[static_cast<size_t>(a)] * mgo.c[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)];
        if (c > 0.0) cost[static_cast<size_t>(i)] = kInf;
    }
}

}  // namespace

SimEstimate simulate_policy(const StandardModel& mgo, const PseudoPoissonPolicy& pol, int x0,
                            const SimConfig& cfg) {
    if (x0 < 0 || x0 >= mgo.num_states()) throw ValidationError("simulate_policy: x0 out of range");
    return run_episodes(mgo.cost_count, cfg, [&](RngStream& rng) {
        EpisodeOutcome out;
        out.cost.assign(static_cast<size_t>(mgo.cost_count), 0.0);
        int x = x0;
        Real clock = 0.0;
        for (int jump = 0; jump < cfg.max_jumps; ++jump) {
            if (cfg.time_horizon > 0.0 && clock >= cfg.time_horizon) {
                out.truncated = true;
                return out;
            }
            const auto& kernels = pol.epoch(jump)[static_cast<size_t>(x)].kernels;
            const int prefix_len = static_cast<int>(kernels.prefix.size());
            int next = -2;
            for (int k = 0; next == -2; ++k) {
                if (k >= cfg.max_jumps) {  // redraw guard for slow contraction
                    out.truncated = true;
                    return out;
                }
                if (k >= prefix_len && kernel_frozen(mgo, x, kernels.tail)) {
                    // Redraws continue forever without a jump: absorbed here.
                    accrue_frozen_tail(mgo, x, kernels.tail, out.cost);
                    return out;
                }
                const Vec& ker = kernels.at(k);
                const int a = rng.categorical(ker, 1.0);
                const Real redraw_after =
                    rng.exponential(mgo.is_gradual(a) ? pol.lambda : 0.0);
                const Real rate = mgo.rate(x, a);
                const Real jump_after = rng.exponential(rate);
                const Real elapsed = std::min(jump_after, redraw_after);
                for (int i = 0; i < mgo.cost_count; ++i) {
                    const Real r = mgo.c[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)];
                    if (r > 0.0) out.cost[static_cast<size_t>(i)] += elapsed == kInf ? kInf : r * elapsed;
                }
                if (elapsed == kInf) {
                    return out;  // frozen zero-rate gradual action: absorbed
                }
                clock += elapsed;
                if (jump_after <= redraw_after) {
                    Vec flow(mgo.states.size(), 0.0);
                    for (int y = 0; y < mgo.num_states(); ++y) flow[static_cast<size_t>(y)] = mgo.flow(x, a, y);
                    next = rng.categorical(flow, rate);
                }
            }
            x = next;
        }
        out.truncated = true;
        return out;
    });
}

SimEstimate simulate_strategy(const GradualImpulsiveModel& m, const StationaryStrategy& s, int x0,
                              const SimConfig& cfg) {
    require_valid(validate_strategy(m, s), "simulate_strategy");
    if (x0 < 0 || x0 >= m.num_states()) throw ValidationError("simulate_strategy: x0 out of range");
    return run_episodes(m.cost_count, cfg, [&](RngStream& rng) {
        EpisodeOutcome out;
        out.cost.assign(static_cast<size_t>(m.cost_count), 0.0);
        int x = x0;
        Real clock = 0.0;
        int impulse_chain = 0;
        for (int jump = 0; jump < cfg.max_jumps; ++jump) {
            if (cfg.time_horizon > 0.0 && clock >= cfg.time_horizon) {
                out.truncated = true;
                return out;
            }
            const Real w = s.w_imp[static_cast<size_t>(x)];
            if (w > 0.0 && rng.uniform() < w) {
                if (++impulse_chain > cfg.max_impulse_chain) {
                    out.truncated = true;
                    return out;
                }
                const int b = rng.categorical(s.beta[static_cast<size_t>(x)], 1.0);
                for (int i = 0; i < m.cost_count; ++i)
                    out.cost[static_cast<size_t>(i)] += m.ci[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(b)];
                x = rng.categorical(m.Q[static_cast<size_t>(x)][static_cast<size_t>(b)], 1.0);
                continue;
            }
            impulse_chain = 0;
            MixedControl mc = mixed_gi(m, x, s.f_hat[static_cast<size_t>(x)]);
            const Real jump_after = rng.exponential(mc.rate);
            accrue(out.cost, mc.cost_rate, jump_after);
            if (jump_after == kInf) return out;  // absorbed
            clock += jump_after;
            x = rng.categorical(mc.flow, mc.rate);
        }
        out.truncated = true;
        return out;
    });
}

SimEstimate simulate_strategy(const GradualImpulsiveModel& m, const PoissonStrategy& s, int x0,
                              const SimConfig& cfg) {
    if (x0 < 0 || x0 >= m.num_states()) throw ValidationError("simulate_strategy: x0 out of range");
    return run_episodes(m.cost_count, cfg, [&](RngStream& rng) {
        EpisodeOutcome out;
        out.cost.assign(static_cast<size_t>(m.cost_count), 0.0);
        int x = x0;
        Real clock = 0.0;
        int impulse_chain = 0;
        for (int jump = 0; jump < cfg.max_jumps; ++jump) {
            if (cfg.time_horizon > 0.0 && clock >= cfg.time_horizon) {
                out.truncated = true;
                return out;
            }
            const PoissonStateRule& rule = s.epoch(jump)[static_cast<size_t>(x)];
            const int prefix_len =
                std::max({static_cast<int>(rule.grad_prefix.size()),
                          static_cast<int>(rule.g_prefix.size()),
                          static_cast<int>(rule.imp_prefix.size())});
            int next = -2;
            Real sojourn = 0.0;
            for (int k = 0; next == -2; ++k) {
                if (k >= cfg.max_jumps) {
                    out.truncated = true;
                    return out;
                }
                if (k >= prefix_len && rule.g_tail >= 1.0) {
                    bool frozen = true;
                    for (size_t a = 0; a < rule.grad_tail.size(); ++a)
                        if (rule.grad_tail[a] > 0.0 && m.rate(x, static_cast<int>(a)) > 0.0)
                            frozen = false;
                    if (frozen) {
                        // No impulse will ever fire and no jump can occur.
                        for (int i = 0; i < m.cost_count; ++i) {
                            Real c = 0.0;
                            for (size_t a = 0; a < rule.grad_tail.size(); ++a)
                                c += rule.grad_tail[a] * m.cg[static_cast<size_t>(i)][static_cast<size_t>(x)][a];
                            if (c > 0.0) out.cost[static_cast<size_t>(i)] = kInf;
                        }
                        return out;
                    }
                }
                // Continuation draw: the impulse fires at redraw index k with
                // probability 1 - g_k.
                if (rng.uniform() >= rule.g_at(k)) {
                    const int b = rng.categorical(rule.imp_at(k), 1.0);
                    for (int i = 0; i < m.cost_count; ++i)
                        out.cost[static_cast<size_t>(i)] += m.ci[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(b)];
                    if (sojourn == 0.0) {
                        if (++impulse_chain > cfg.max_impulse_chain) {
                            out.truncated = true;
                            return out;
                        }
                    } else {
                        impulse_chain = 0;
                    }
                    next = rng.categorical(m.Q[static_cast<size_t>(x)][static_cast<size_t>(b)], 1.0);
                    break;
                }
                const int a = rng.categorical(rule.grad_at(k), 1.0);
                const Real seg_len = rng.exponential(s.lambda);
                const Real rate = m.rate(x, a);
                const Real jump_after = rng.exponential(rate);
                const Real elapsed = std::min(jump_after, seg_len);
                for (int i = 0; i < m.cost_count; ++i) {
                    const Real r = m.cg[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)];
                    if (r > 0.0) out.cost[static_cast<size_t>(i)] += elapsed == kInf ? kInf : r * elapsed;
                }
                if (elapsed == kInf) return out;  // segment never ends, no jump
                sojourn += elapsed;
                clock += elapsed;
                if (jump_after <= seg_len) {
                    impulse_chain = 0;
                    Vec flow(m.states.size(), 0.0);
                    for (int y = 0; y < m.num_states(); ++y) flow[static_cast<size_t>(y)] = m.flow(x, a, y);
                    next = rng.categorical(flow, rate);
                }
            }
            x = next;
        }
        out.truncated = true;
        return out;
    });
}

}  // namespace gictmdp
