#include "gictmdp/reduction.hpp"

#include "gictmdp/errors.hpp"

namespace gictmdp {

LiftOptions LiftOptions::defaults(const GradualImpulsiveModel& m) {
    LiftOptions opts;
    if (m.num_gradual() > 0) {
        opts.p_star.assign(m.gradual_actions.size(), 0.0);
        opts.p_star[0] = 1.0;
    }
    if (m.num_impulse() > 0) {
        opts.p_star_star.assign(m.impulse_actions.size(), 0.0);
        opts.p_star_star[0] = 1.0;
    }
    return opts;
}

StandardModel reduce_model(const GradualImpulsiveModel& m) {
    require_valid(validate_gi_model(m), "reduce_model");

    StandardModel mgo;
    mgo.states = m.states;
    mgo.cost_count = m.cost_count;
    mgo.bounds = m.bounds;
    mgo.x0 = m.x0;

    const int n = m.num_states();
    const int ng = m.num_gradual();
    const int ni = m.num_impulse();
    for (const auto& name : m.gradual_actions) mgo.actions.push_back({name, ActionKind::Gradual});
    for (const auto& name : m.impulse_actions) mgo.actions.push_back({name, ActionKind::Impulsive});

    mgo.q.assign(static_cast<size_t>(n), Mat(static_cast<size_t>(ng + ni), Vec(static_cast<size_t>(n), 0.0)));
    mgo.adm.assign(static_cast<size_t>(n), std::vector<char>(static_cast<size_t>(ng + ni), 1));
    for (int x = 0; x < n; ++x) {
        for (int a = 0; a < ng; ++a) {
            mgo.q[static_cast<size_t>(x)][static_cast<size_t>(a)] = m.q[static_cast<size_t>(x)][static_cast<size_t>(a)];
            mgo.adm[static_cast<size_t>(x)][static_cast<size_t>(a)] = m.adm_gradual[static_cast<size_t>(x)][static_cast<size_t>(a)];
        }
        for (int b = 0; b < ni; ++b) {
            Vec& row = mgo.q[static_cast<size_t>(x)][static_cast<size_t>(ng + b)];
            row = m.Q[static_cast<size_t>(x)][static_cast<size_t>(b)];
            row[static_cast<size_t>(x)] = -1.0;  // unit exit rate; no self-loops in Q
            mgo.adm[static_cast<size_t>(x)][static_cast<size_t>(ng + b)] = m.adm_impulse[static_cast<size_t>(x)][static_cast<size_t>(b)];
        }
    }

    mgo.c.assign(static_cast<size_t>(m.cost_count),
                 Mat(static_cast<size_t>(n), Vec(static_cast<size_t>(ng + ni), 0.0)));
    for (int i = 0; i < m.cost_count; ++i)
        for (int x = 0; x < n; ++x) {
            for (int a = 0; a < ng; ++a)
                mgo.c[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)] =
                    m.cg[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(a)];
            for (int b = 0; b < ni; ++b)
                mgo.c[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(ng + b)] =
                    m.ci[static_cast<size_t>(i)][static_cast<size_t>(x)][static_cast<size_t>(b)];
        }
    return mgo;
}

StationaryStrategy lift_stationary_policy(const StationaryPolicy& fbar,
                                          const GradualImpulsiveModel& m,
                                          const LiftOptions& opts) {
    const int n = m.num_states();
    const int ng = m.num_gradual();
    const int ni = m.num_impulse();
    if (fbar.num_states() != n)
        throw ValidationError("lift_stationary_policy: policy state count mismatch");

    StationaryStrategy s;
    s.w_imp.assign(static_cast<size_t>(n), 0.0);
    s.beta.assign(static_cast<size_t>(n), opts.p_star_star);
    s.f_hat.assign(static_cast<size_t>(n), opts.p_star);

    for (int x = 0; x < n; ++x) {
        const Vec& row = fbar.rows[static_cast<size_t>(x)];
        if (static_cast<int>(row.size()) != ng + ni)
            throw ValidationError("lift_stationary_policy: policy row length mismatch");
        Real grad_mass = 0.0, imp_mass = 0.0, rate_mass = 0.0;
        for (int a = 0; a < ng; ++a) {
            grad_mass += row[static_cast<size_t>(a)];
            rate_mass += row[static_cast<size_t>(a)] * m.rate(x, a);
        }
        for (int b = 0; b < ni; ++b) imp_mass += row[static_cast<size_t>(ng + b)];

        const Real denom = rate_mass + imp_mass;
        if (denom > 1e-12) {
            s.w_imp[static_cast<size_t>(x)] = imp_mass / denom;
            if (imp_mass > 0.0) {
                Vec& beta = s.beta[static_cast<size_t>(x)];
                beta.assign(static_cast<size_t>(ni), 0.0);
                for (int b = 0; b < ni; ++b) beta[static_cast<size_t>(b)] = row[static_cast<size_t>(ng + b)] / imp_mass;
            }
            if (grad_mass > 0.0) {
                Vec& fh = s.f_hat[static_cast<size_t>(x)];
                fh.assign(static_cast<size_t>(ng), 0.0);
                for (int a = 0; a < ng; ++a) fh[static_cast<size_t>(a)] = row[static_cast<size_t>(a)] / grad_mass;
            }
        } else {
            // Off the positive-drift set the policy is purely gradual with
            // zero expected rate; keep it verbatim as the gradual control.
            s.w_imp[static_cast<size_t>(x)] = 0.0;
            Vec& fh = s.f_hat[static_cast<size_t>(x)];
            fh.assign(static_cast<size_t>(ng), 0.0);
            Real mass = grad_mass > 0.0 ? grad_mass : 1.0;
            for (int a = 0; a < ng; ++a) fh[static_cast<size_t>(a)] = row[static_cast<size_t>(a)] / mass;
            if (grad_mass <= 0.0) fh = opts.p_star;
        }
    }
    return s;
}

StationaryStrategy lift_stationary_policy(const StationaryPolicy& fbar,
                                          const GradualImpulsiveModel& m) {
    return lift_stationary_policy(fbar, m, LiftOptions::defaults(m));
}

}  // namespace gictmdp
