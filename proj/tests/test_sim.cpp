#include "gictmdp/sim.hpp"

#include <cmath>

#include "doctest.h"
#include "gictmdp/bellman.hpp"
#include "gictmdp/model.hpp"
#include "gictmdp/poisson.hpp"
#include "gictmdp/reduction.hpp"
#include "oracles.hpp"

using namespace gictmdp;
using namespace gictmdp::testing;

namespace {
const GradualImpulsiveModel kExample = builtin_model("paper-example");
const StandardModel kExampleGo = reduce_model(kExample);

StationaryPolicy half_half() {
    StationaryPolicy pol;
    pol.rows.assign(4, {1.0, 0.0});
    pol.rows[0] = {0.5, 0.5};
    return pol;
}

StationaryStrategy lifted_half() {
    return lift_stationary_policy(half_half(), kExample);
}

bool covered(Real exact, Real mean, Real se, Real k = 3.0) {
    return std::abs(mean - exact) <= k * se + 1e-12;
}
}  // namespace

TEST_CASE("identical seeds give bit-identical estimates") {
    SimConfig cfg;
    cfg.episodes = 2000;
    cfg.seed = 12345;
    SimEstimate a = simulate_policy(kExampleGo, half_half(), 0, cfg);
    SimEstimate b = simulate_policy(kExampleGo, half_half(), 0, cfg);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.truncated_episode_count == b.truncated_episode_count);

    SimEstimate c = simulate_strategy(kExample, lifted_half(), 0, cfg);
    SimEstimate d = simulate_strategy(kExample, lifted_half(), 0, cfg);
    CHECK(c.mean == d.mean);
    CHECK(c.std_error == d.std_error);
}

TEST_CASE("zero-cost model simulates to exactly zero") {
    GradualImpulsiveModel m = builtin_model("two-state-smoke");
    StandardModel mgo = reduce_model(m);
    StationaryPolicy pol;
    pol.rows.assign(2, {1.0});
    SimConfig cfg;
    cfg.episodes = 50;
    cfg.max_jumps = 64;
    SimEstimate est = simulate_policy(mgo, pol, 0, cfg);
    CHECK(est.mean[0] == 0.0);
    CHECK(est.std_error[0] == 0.0);
    CHECK(est.truncated_episode_count == cfg.episodes);  // the chain never absorbs
}

TEST_CASE("policy simulator covers the exact example values") {
    SimConfig cfg;
    cfg.episodes = 100000;
    cfg.seed = 7;
    SimEstimate est = simulate_policy(kExampleGo, half_half(), 0, cfg);
    CHECK(covered(0.5, est.mean[0], est.std_error[0]));
    CHECK(covered(1.0, est.mean[1], est.std_error[1]));
    CHECK(est.std_error[0] < 0.01);
}

TEST_CASE("strategy simulator covers the exact example values") {
    SimConfig cfg;
    cfg.episodes = 100000;
    cfg.seed = 11;
    SimEstimate est = simulate_strategy(kExample, lifted_half(), 0, cfg);
    CHECK(covered(0.5, est.mean[0], est.std_error[0]));
    CHECK(covered(1.0, est.mean[1], est.std_error[1]));
}

TEST_CASE("pseudo policy simulator matches the replicated values") {
    PseudoPoissonPolicy pp = build_pseudo_policy(kExampleGo, MarkovPolicy::constant(half_half()), 1.0);
    SimConfig cfg;
    cfg.episodes = 100000;
    cfg.seed = 13;
    SimEstimate est = simulate_policy(kExampleGo, pp, 0, cfg);
    CHECK(covered(0.5, est.mean[0], est.std_error[0]));
    CHECK(covered(1.0, est.mean[1], est.std_error[1]));
}

TEST_CASE("poisson strategy simulator matches the replicated values") {
    PseudoPoissonPolicy pp = build_pseudo_policy(kExampleGo, MarkovPolicy::constant(half_half()), 1.0);
    PoissonStrategy ps = build_poisson_strategy(kExample, pp);
    SimConfig cfg;
    cfg.episodes = 100000;
    cfg.seed = 17;
    SimEstimate est = simulate_strategy(kExample, ps, 0, cfg);
    CHECK(covered(0.5, est.mean[0], est.std_error[0]));
    CHECK(covered(1.0, est.mean[1], est.std_error[1]));
}

TEST_CASE("costless zeno chain truncates and reports zero cost") {
    GradualImpulsiveModel m;
    m.states = {"u", "v"};
    m.gradual_actions = {"g"};
    m.impulse_actions = {"b"};
    m.cost_count = 1;
    m.q.assign(2, Mat(1, Vec(2, 0.0)));
    m.Q.assign(2, Mat(1, Vec(2, 0.0)));
    m.Q[0][0][1] = 1.0;
    m.Q[1][0][0] = 1.0;
    m.cg.assign(1, Mat(2, Vec(1, 0.0)));
    m.ci.assign(1, Mat(2, Vec(1, 0.0)));
    m.default_admissibility();

    StationaryStrategy s;
    s.w_imp = {1.0, 1.0};
    s.beta.assign(2, {1.0});
    s.f_hat.assign(2, {1.0});
    SimConfig cfg;
    cfg.episodes = 20;
    cfg.max_impulse_chain = 50;
    SimEstimate est = simulate_strategy(m, s, 0, cfg);
    CHECK(est.truncated_episode_count == cfg.episodes);
    CHECK(est.mean[0] == 0.0);
}

TEST_CASE("impulse epoch index follows the geometric continuation law") {
    // Strategy at the example root: g_k = 2/3 at every redraw, so the
    // scheduled impulse index has P(K = k) = (2/3)^k * (1/3). Sample the
    // continuation draws as the simulator performs them and chi-square the
    // histogram against that law.
    PseudoPoissonPolicy pp = build_pseudo_policy(kExampleGo, MarkovPolicy::constant(half_half()), 1.0);
    PoissonStrategy ps = build_poisson_strategy(kExample, pp);
    const PoissonStateRule& rule = ps.tail_epoch[0];
    REQUIRE(rule.g_tail == doctest::Approx(2.0 / 3.0));

    const int samples = 200000;
    const int buckets = 12;  // indices 0..10 plus one tail bucket
    std::vector<int> counts(buckets, 0);
    for (int i = 0; i < samples; ++i) {
        RngStream rng(99, static_cast<std::uint64_t>(i));
        int k = 0;
        while (rng.uniform() < rule.g_at(k)) ++k;
        ++counts[static_cast<size_t>(std::min(k, buckets - 1))];
    }
    Real chi2 = 0.0;
    Real tail_prob = 1.0;
    for (int k = 0; k < buckets; ++k) {
        const Real pk = k < buckets - 1 ? std::pow(2.0 / 3.0, k) / 3.0 : tail_prob;
        if (k < buckets - 1) tail_prob -= pk;
        const Real expected = pk * samples;
        if (expected < 5.0) continue;
        const Real diff = counts[static_cast<size_t>(k)] - expected;
        chi2 += diff * diff / expected;
    }
    // chi-square with 11 degrees of freedom at the 1% level
    CHECK(chi2 < 24.725);
}

TEST_CASE("sim agrees with exact evaluation across ten seeds") {
    EvaluationResult exact = evaluate_strategy(kExample, lifted_half(), 0);
    int hits = 0;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        SimConfig cfg;
        cfg.episodes = 20000;
        cfg.seed = seed;
        SimEstimate est = simulate_strategy(kExample, lifted_half(), 0, cfg);
        if (covered(exact.W[0], est.mean[0], est.std_error[0]) &&
            covered(exact.W[1], est.mean[1], est.std_error[1]))
            ++hits;
    }
    CHECK(hits >= 9);
}
