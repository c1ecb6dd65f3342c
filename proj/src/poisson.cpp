#include "gictmdp/poisson.hpp"

#include <cmath>

#include "gictmdp/errors.hpp"
#include "quadrature.hpp"

namespace gictmdp {

namespace {

Real lambda_bar(const StandardModel& mgo, int a, Real lambda) {
    return mgo.is_gradual(a) ? lambda : 0.0;
}

// Per-block description of a schedule at a fixed state: mixed redraw-or-jump
// intensity Lambda, redraw intensity ell, and the per-action entry weights
// kappa(a) = (q_x(a) + lambda_bar(a)) mu(a). The last block is unbounded.
struct ScheduleProfile {
    struct Block {
        Real start = 0.0;
        Real duration = kInf;
        Real big_lambda = 0.0;  // always >= min(1, lambda)
        Real ell = 0.0;
        Vec kappa;
        Real e0 = 0.0;  // accumulated exponent at block start
        Real l0 = 0.0;  // accumulated redraw intensity at block start
        Vec full;       // integral of kappa * exp(-E) over the whole block
        Vec suffix;     // same integral over every later block
    };
    std::vector<Block> blocks;
    size_t na = 0;

    const Block& at(Real w) const {
        for (size_t p = 0; p + 1 < blocks.size(); ++p)
            if (w < blocks[p].start + blocks[p].duration) return blocks[p];
        return blocks.back();
    }
    Real exponent(Real w) const {
        const Block& b = at(w);
        return b.e0 + b.big_lambda * (w - b.start);
    }
    Real redraw_mass(Real w) const {  // L(w)
        const Block& b = at(w);
        return b.l0 + b.ell * (w - b.start);
    }
    Real ell_at(Real w) const { return at(w).ell; }

    // N_a(w): remaining entry-weighted survival integral from w onward.
    void tail_integral(Real w, Vec& out) const {
        const Block& b = at(w);
        const Real survive = std::exp(-(b.e0 + b.big_lambda * (w - b.start)));
        Real factor;
        if (std::isinf(b.duration)) {
            factor = survive / b.big_lambda;
        } else {
            const Real rest = b.start + b.duration - w;
            factor = survive * (1.0 - std::exp(-b.big_lambda * rest)) / b.big_lambda;
        }
        for (size_t a = 0; a < na; ++a) out[a] = b.kappa[a] * factor + b.suffix[a];
    }
};

ScheduleProfile make_profile(const StandardModel& mgo, int x, const TimeSchedule& rho,
                             Real lambda) {
    ScheduleProfile prof;
    prof.na = mgo.actions.size();
    Real start = 0.0, e0 = 0.0, l0 = 0.0;
    auto push_block = [&](const Vec& dist, Real duration) {
        ScheduleProfile::Block b;
        b.start = start;
        b.duration = duration;
        b.e0 = e0;
        b.l0 = l0;
        b.kappa.assign(prof.na, 0.0);
        for (size_t a = 0; a < prof.na; ++a) {
            const Real lb = lambda_bar(mgo, static_cast<int>(a), lambda);
            const Real rate = mgo.rate(x, static_cast<int>(a));
            b.big_lambda += (lb + rate) * dist[a];
            b.ell += lb * dist[a];
            b.kappa[a] = (lb + rate) * dist[a];
        }
        b.full.assign(prof.na, 0.0);
        const Real block_factor = std::isinf(duration)
                                      ? std::exp(-e0) / b.big_lambda
                                      : std::exp(-e0) * (1.0 - std::exp(-b.big_lambda * duration)) /
                                            b.big_lambda;
        for (size_t a = 0; a < prof.na; ++a) b.full[a] = b.kappa[a] * block_factor;
        prof.blocks.push_back(std::move(b));
        if (!std::isinf(duration)) {
            start += duration;
            e0 += prof.blocks.back().big_lambda * duration;
            l0 += prof.blocks.back().ell * duration;
        }
    };
    for (const auto& seg : rho.segments) push_block(seg.dist, seg.duration);
    push_block(rho.tail, kInf);

    // Suffix sums of the full-block integrals.
    Vec suffix(prof.na, 0.0);
    for (size_t p = prof.blocks.size(); p-- > 0;) {
        prof.blocks[p].suffix = suffix;
        for (size_t a = 0; a < prof.na; ++a) suffix[a] += prof.blocks[p].full[a];
    }
    return prof;
}

Vec normalized(Vec v) {
    Real sum = 0.0;
    for (Real p : v) sum += p;
    if (sum > 0.0)
        for (Real& p : v) p /= sum;
    return v;
}

// Closed-form collapse for a constant-in-time control mu:
// p(a) ~ (q_x(a) + lambda_bar(a)) mu(a), independent of the redraw index.
Vec constant_kernel(const StandardModel& mgo, int x, const Vec& mu, Real lambda) {
    Vec ker(mu.size(), 0.0);
    for (size_t a = 0; a < mu.size(); ++a)
        ker[a] = (mgo.rate(x, static_cast<int>(a)) + lambda_bar(mgo, static_cast<int>(a), lambda)) * mu[a];
    return normalized(std::move(ker));
}

Vec fallback_impulse_kernel(const StandardModel& mgo) {
    Vec ker(mgo.actions.size(), 0.0);
    for (size_t a = 0; a < ker.size(); ++a)
        if (mgo.actions[a].kind == ActionKind::Impulsive) {
            ker[a] = 1.0;
            return ker;
        }
    throw ValidationError(
        "build_pseudo_policy: redraw kernels vanish but the model has no impulse actions");
}

PseudoPoissonPolicy::StateKernels build_state_kernels(const StandardModel& mgo, int x,
                                                      const TimeSchedule& rho, Real lambda,
                                                      const PseudoBuildOptions& opts) {
    PseudoPoissonPolicy::StateKernels sk;
    if (rho.is_constant()) {
        sk.kernels.tail = constant_kernel(mgo, x, rho.tail, lambda);
        return sk;
    }
    sk.approximate = true;
    ScheduleProfile prof = make_profile(mgo, x, rho, lambda);
    const size_t na = prof.na;

    // Index-0 kernel: entry-weighted survival integral over the whole schedule.
    Vec first(na, 0.0);
    for (const auto& b : prof.blocks)
        for (size_t a = 0; a < na; ++a) first[a] += b.full[a];
    sk.kernels.prefix.push_back(normalized(std::move(first)));

    const bool never_redraws = [&] {
        for (const auto& b : prof.blocks)
            if (b.ell > 0.0) return false;
        return true;
    }();

    static const detail::GaussRule rule(10);
    const ScheduleProfile::Block& last = prof.blocks.back();
    Real horizon = last.start;
    // Beyond the segments only the tail block matters; extend far enough for
    // the k-th redraw-count weight to decay under big_lambda.
    const Real reach = (static_cast<Real>(opts.k_cut) + 50.0) / last.big_lambda;

    for (int k = 1; k <= opts.k_cut; ++k) {
        if (never_redraws) {
            sk.kernels.prefix.push_back(fallback_impulse_kernel(mgo));
            continue;
        }
        Real lfact = std::lgamma(static_cast<Real>(k));  // log (k-1)!
        detail::VecIntegrand f = [&](Real w, Vec& out) {
            const Real ell = prof.ell_at(w);
            if (ell <= 0.0) {
                std::fill(out.begin(), out.end(), 0.0);
                return;
            }
            const Real lw = prof.redraw_mass(w);
            Real weight;
            if (k == 1)
                weight = ell;
            else if (lw <= 0.0)
                weight = 0.0;
            else
                weight = ell * std::exp((k - 1) * std::log(lw) - lfact);
            prof.tail_integral(w, out);
            for (size_t a = 0; a < na; ++a) out[a] *= weight;
        };
        Vec acc(na, 0.0);
        Real lo = 0.0;
        for (const auto& b : prof.blocks) {
            if (std::isinf(b.duration)) break;
            detail::adaptive_quad(rule, f, b.start, b.start + b.duration, opts.quad_tol, acc);
            lo = b.start + b.duration;
        }
        detail::adaptive_quad(rule, f, lo, horizon + reach, opts.quad_tol, acc);

        Real total = 0.0;
        for (Real v : acc) total += v;
        if (total < 1e-250) {
            // Redraw-count weight underflowed; the schedule has long since
            // entered its final block, whose collapse kernel is exact here.
            sk.kernels.prefix.push_back(normalized(last.kappa));
            continue;
        }
        for (Real& v : acc) v /= total;
        sk.kernels.prefix.push_back(std::move(acc));
    }

    sk.kernels.tail = never_redraws ? fallback_impulse_kernel(mgo) : normalized(last.kappa);
    return sk;
}

}  // namespace

PseudoPoissonPolicy build_pseudo_policy(const StandardModel& mgo, const MarkovPolicy& pol,
                                        Real lambda, const PseudoBuildOptions& opts) {
    if (!(lambda > 0.0)) throw ValidationError("build_pseudo_policy: lambda must be positive");
    const int n = mgo.num_states();
    if (static_cast<int>(pol.tail_epoch.size()) != n)
        throw ValidationError("build_pseudo_policy: policy state count mismatch");

    PseudoPoissonPolicy pp;
    pp.lambda = lambda;
    auto build_epoch = [&](const std::vector<TimeSchedule>& schedules) {
        if (static_cast<int>(schedules.size()) != n)
            throw ValidationError("build_pseudo_policy: policy state count mismatch");
        PseudoPoissonPolicy::Epoch epoch;
        epoch.reserve(static_cast<size_t>(n));
        for (int x = 0; x < n; ++x)
            epoch.push_back(build_state_kernels(mgo, x, schedules[static_cast<size_t>(x)], lambda, opts));
        return epoch;
    };
    for (const auto& epoch : pol.epochs) pp.epochs.push_back(build_epoch(epoch));
    pp.tail_epoch = build_epoch(pol.tail_epoch);
    return pp;
}

namespace {

PoissonStateRule split_kernels(const GradualImpulsiveModel& m,
                               const PseudoPoissonPolicy::StateKernels& sk) {
    const int ng = m.num_gradual();
    const int ni = m.num_impulse();
    Vec p_star(static_cast<size_t>(ng), 0.0);
    if (ng > 0) p_star[0] = 1.0;
    Vec p_star_star(static_cast<size_t>(ni), 0.0);
    if (ni > 0) p_star_star[0] = 1.0;

    PoissonStateRule rule;
    auto split = [&](const Vec& ker, Vec& grad, Real& g, Vec& imp) {
        if (static_cast<int>(ker.size()) != ng + ni)
            throw ValidationError("build_poisson_strategy: kernel length mismatch");
        Real gm = 0.0, im = 0.0;
        for (int a = 0; a < ng; ++a) gm += ker[static_cast<size_t>(a)];
        for (int b = 0; b < ni; ++b) im += ker[static_cast<size_t>(ng + b)];
        g = gm / (gm + im);
        if (g > 1.0 - 1e-15) g = 1.0;
        if (g < 1e-15) g = 0.0;
        if (gm > 0.0) {
            grad.assign(static_cast<size_t>(ng), 0.0);
            for (int a = 0; a < ng; ++a) grad[static_cast<size_t>(a)] = ker[static_cast<size_t>(a)] / gm;
        } else {
            grad = p_star;
        }
        if (im > 0.0) {
            imp.assign(static_cast<size_t>(ni), 0.0);
            for (int b = 0; b < ni; ++b) imp[static_cast<size_t>(b)] = ker[static_cast<size_t>(ng + b)] / im;
        } else {
            imp = p_star_star;
        }
    };
    for (const auto& ker : sk.kernels.prefix) {
        Vec grad, imp;
        Real g = 1.0;
        split(ker, grad, g, imp);
        rule.grad_prefix.push_back(std::move(grad));
        rule.g_prefix.push_back(g);
        rule.imp_prefix.push_back(std::move(imp));
    }
    Real g_tail = 1.0;
    split(sk.kernels.tail, rule.grad_tail, g_tail, rule.imp_tail);
    rule.g_tail = g_tail;
    return rule;
}

}  // namespace

PoissonStrategy build_poisson_strategy(const GradualImpulsiveModel& m,
                                       const PseudoPoissonPolicy& pp) {
    const int n = m.num_states();
    PoissonStrategy ps;
    ps.lambda = pp.lambda;
    auto build_epoch = [&](const PseudoPoissonPolicy::Epoch& epoch) {
        if (static_cast<int>(epoch.size()) != n)
            throw ValidationError("build_poisson_strategy: state count mismatch");
        PoissonStrategy::Epoch out;
        out.reserve(static_cast<size_t>(n));
        for (int x = 0; x < n; ++x) out.push_back(split_kernels(m, epoch[static_cast<size_t>(x)]));
        return out;
    };
    for (const auto& epoch : pp.epochs) ps.epochs.push_back(build_epoch(epoch));
    ps.tail_epoch = build_epoch(pp.tail_epoch);
    return ps;
}

}  // namespace gictmdp
