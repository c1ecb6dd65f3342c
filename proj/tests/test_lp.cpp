#include "gictmdp/lp.hpp"

#include <cmath>

#include "doctest.h"
#include "gictmdp/errors.hpp"
#include "gictmdp/json_io.hpp"
#include "gictmdp/model.hpp"
#include "oracles.hpp"

using namespace gictmdp;
using namespace gictmdp::testing;

namespace {
const GradualImpulsiveModel kExample = builtin_model("paper-example");
}

TEST_CASE("occupation LP of the example is the hand-built one-state program") {
    // R = {0}: balance nu(0,a) + nu(0,b) = 1, constraint 2 nu(0,b) <= 1,
    // objective nu(0,a).
    OccupationLp lp = build_occupation_lp(kExample, {0}, 0, kExample.bounds);
    REQUIRE(lp.num_vars() == 2);
    CHECK(lp.columns[0] == std::pair<int, int>{0, 0});
    CHECK(lp.columns[1] == std::pair<int, int>{0, 1});
    REQUIRE(lp.eq.size() == 1);
    CHECK(lp.eq[0][0] == doctest::Approx(1.0));
    CHECK(lp.eq[0][1] == doctest::Approx(1.0));
    CHECK(lp.eq_rhs[0] == 1.0);
    REQUIRE(lp.le.size() == 1);
    CHECK(lp.le[0][0] == 0.0);
    CHECK(lp.le[0][1] == doctest::Approx(2.0));
    CHECK(lp.le_rhs[0] == 1.0);
    CHECK(lp.objective[0] == doctest::Approx(1.0));
    CHECK(lp.objective[1] == 0.0);
}

TEST_CASE("balance diagonal coefficient equals the exit rate") {
    TestRng rng(53);
    for (int trial = 0; trial < 10; ++trial) {
        GradualImpulsiveModel m = random_model(rng);
        std::vector<int> all_states;
        for (int x = 0; x < m.num_states(); ++x) all_states.push_back(x);
        OccupationLp lp = build_occupation_lp(m, all_states, m.x0, m.bounds);
        for (int col = 0; col < lp.num_vars(); ++col) {
            const auto [x, a] = lp.columns[static_cast<size_t>(col)];
            if (a >= m.num_gradual()) continue;
            CHECK(lp.eq[static_cast<size_t>(x)][static_cast<size_t>(col)] ==
                  doctest::Approx(m.rate(x, a)).epsilon(1e-12));
        }
    }
}

TEST_CASE("x0 outside R raises the trivial-problem signal") {
    GradualImpulsiveModel m = builtin_model("two-state-smoke");
    CHECK_THROWS_AS(build_occupation_lp(m, {}, 0, m.bounds), TrivialProblem);
}

TEST_CASE("simplex solves the example program and its variants") {
    SUBCASE("binding constraint: value 1/2 at nu = (1/2, 1/2)") {
        OccupationLp lp = build_occupation_lp(kExample, {0}, 0, {1.0});
        LpSolution sol = solve_simplex(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(sol.nu[0] == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(sol.nu[1] == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(sol.balance_residual <= 1e-8);
    }
    SUBCASE("loose constraint: impulse is free, value 0") {
        OccupationLp lp = build_occupation_lp(kExample, {0}, 0, {3.0});
        LpSolution sol = solve_simplex(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(0.0));
        CHECK(sol.nu[1] == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("negative bound: infeasible with a certificate") {
        OccupationLp lp = build_occupation_lp(kExample, {0}, 0, {-1.0});
        LpSolution sol = solve_simplex(lp);
        CHECK(sol.status == LpStatus::Infeasible);
        CHECK_FALSE(sol.certificate.empty());
    }
}

TEST_CASE("extract_policy disintegrates nu and fills off-R greedily") {
    StandardModel mgo = reduce_model(kExample);
    BellmanResult bell = compute_vstar(mgo);
    OccupationLp lp = build_occupation_lp(kExample, bell.R(), 0, kExample.bounds);
    LpSolution sol = solve_simplex(lp);
    StationaryPolicy pol = extract_policy(sol, lp, bell, mgo);
    CHECK(pol.rows[0][0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(pol.rows[0][1] == doctest::Approx(0.5).epsilon(1e-10));
    for (int x = 1; x < 4; ++x) CHECK(pol.rows[static_cast<size_t>(x)][0] == 1.0);
    for (auto& row : pol.rows) {
        Real sum = 0.0;
        for (Real p : row) sum += p;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("full pipeline on the example certifies the optimal mixture") {
    ConstrainedSolution sol = solve_constrained_problem(kExample);
    CHECK_FALSE(sol.trivial);
    CHECK(sol.value == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.strategy.w_imp[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.strategy.beta[0][0] == doctest::Approx(1.0));
    CHECK(sol.strategy.f_hat[0][0] == doctest::Approx(1.0));
    CHECK(sol.evaluation.W[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.evaluation.W[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.check_pass);
}

TEST_CASE("pipeline without constraints prefers the free impulse") {
    GradualImpulsiveModel m = kExample;
    m.bounds.clear();
    m.cost_count = 1;
    m.cg.resize(1);
    m.ci.resize(1);
    ConstrainedSolution sol = solve_constrained_problem(m);
    CHECK(sol.value == doctest::Approx(0.0));
    // nu concentrated on one action extracts as a point mass.
    CHECK(sol.policy.rows[0][1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sol.policy.rows[0][0] == doctest::Approx(0.0));
}

TEST_CASE("optimal solutions keep slacks nonnegative") {
    TestRng rng(67);
    int instances = 0;
    while (instances < 10) {
        ModelOptions opt;
        opt.constraints = rng.randint(1, 2);
        GradualImpulsiveModel m = random_model(rng, opt);
        StandardModel mgo = reduce_model(m);
        StationaryPolicy ref = random_case_policy(rng, m);
        if (!validate_policy(mgo, ref).pass()) continue;
        EvaluationResult wref = evaluate_policy(mgo, ref, m.x0);
        bool finite = true;
        for (Real w : wref.W) finite = finite && std::isfinite(w);
        if (!finite) continue;
        for (int j = 0; j < m.num_constraints(); ++j)
            m.bounds[static_cast<size_t>(j)] = wref.W[static_cast<size_t>(j + 1)] * 1.25 + 0.1;
        ConstrainedSolution sol;
        try {
            sol = solve_constrained_problem(m);
        } catch (const std::exception&) {
            continue;
        }
        if (sol.trivial || sol.lp.status != LpStatus::Optimal) continue;
        ++instances;
        CHECK(sol.lp.balance_residual <= 1e-8 * (1.0 + 1.0));
        for (Real slack : sol.lp.slacks) CHECK(slack >= -1e-8);
        Real nu_l1 = 0.0;
        for (Real v : sol.lp.nu) nu_l1 += std::abs(v);
        CHECK(sol.lp.balance_residual <= 1e-8 * (1.0 + nu_l1));
    }
}

TEST_CASE("pipeline on a zero-cost model is trivial") {
    ConstrainedSolution sol = solve_constrained_problem(builtin_model("two-state-smoke"));
    CHECK(sol.trivial);
    CHECK(sol.value == 0.0);
    CHECK(sol.check_pass);
}

TEST_CASE("weak duality: no feasible policy beats the LP optimum") {
    TestRng rng(59);
    int instances = 0;
    while (instances < 12) {
        ModelOptions opt;
        opt.constraints = rng.randint(0, 2);
        GradualImpulsiveModel m = random_model(rng, opt);
        StandardModel mgo = reduce_model(m);
        // Calibrate bounds so a reference policy is feasible.
        StationaryPolicy ref = random_case_policy(rng, m);
        if (!validate_policy(mgo, ref).pass()) continue;
        EvaluationResult wref = evaluate_policy(mgo, ref, m.x0);
        bool finite = true;
        for (Real w : wref.W) finite = finite && std::isfinite(w);
        if (!finite) continue;
        for (int j = 0; j < m.num_constraints(); ++j)
            m.bounds[static_cast<size_t>(j)] = wref.W[static_cast<size_t>(j + 1)] * 1.25 + 0.1;

        ConstrainedSolution sol;
        try {
            sol = solve_constrained_problem(m);
        } catch (const std::exception&) {
            continue;
        }
        if (sol.lp.status != LpStatus::Optimal && !sol.trivial) continue;
        ++instances;

        int policies = 0;
        while (policies < 8) {
            StationaryPolicy pol = random_case_policy(rng, m);
            if (!validate_policy(mgo, pol).pass()) continue;
            ++policies;
            EvaluationResult w = evaluate_policy(mgo, pol, m.x0);
            bool feasible = true;
            for (int j = 0; j < m.num_constraints(); ++j)
                feasible = feasible && w.W[static_cast<size_t>(j + 1)] <= m.bounds[static_cast<size_t>(j)];
            if (!feasible) continue;
            CHECK(w.W[0] >= sol.value - 1e-7);
        }
    }
}

TEST_CASE("occupation measure matches the jump-chain expected visits") {
    TestRng rng(61);
    int instances = 0;
    while (instances < 10) {
        GradualImpulsiveModel m = random_model(rng);
        StandardModel mgo = reduce_model(m);
        StationaryPolicy ref = random_case_policy(rng, m);
        if (!validate_policy(mgo, ref).pass()) continue;
        EvaluationResult wref = evaluate_policy(mgo, ref, m.x0);
        bool finite = true;
        for (Real w : wref.W) finite = finite && std::isfinite(w);
        if (!finite) continue;
        for (int j = 0; j < m.num_constraints(); ++j)
            m.bounds[static_cast<size_t>(j)] = wref.W[static_cast<size_t>(j + 1)] * 1.25 + 0.1;

        ConstrainedSolution sol;
        try {
            sol = solve_constrained_problem(m);
        } catch (const std::exception&) {
            continue;
        }
        if (sol.trivial || sol.lp.status != LpStatus::Optimal) continue;
        ++instances;

        // Expected visits of the embedded chain under the extracted policy,
        // restricted to R and weighted back into the occupation measure.
        std::vector<JumpLaw> laws;
        for (int x = 0; x < mgo.num_states(); ++x)
            laws.push_back(go_jump_law(mgo, x, TimeSchedule::constant(sol.policy.rows[static_cast<size_t>(x)])));
        std::vector<char> in_R(mgo.states.size(), 0);
        for (int x : sol.bellman.R()) in_R[static_cast<size_t>(x)] = 1;
        Vec visits = neumann_visits(laws, m.x0, in_R);

        Vec nu_mass(mgo.states.size(), 0.0);
        for (int col = 0; col < sol.lp_model.num_vars(); ++col)
            nu_mass[static_cast<size_t>(sol.lp_model.columns[static_cast<size_t>(col)].first)] +=
                sol.lp.nu[static_cast<size_t>(col)];
        for (int x = 0; x < mgo.num_states(); ++x) {
            if (!in_R[static_cast<size_t>(x)]) continue;
            Real rate = 0.0;
            for (int a = 0; a < mgo.num_actions(); ++a)
                rate += sol.policy.rows[static_cast<size_t>(x)][static_cast<size_t>(a)] * mgo.rate(x, a);
            if (rate <= 1e-12) continue;  // unvisited degenerate state
            CHECK(close(nu_mass[static_cast<size_t>(x)], visits[static_cast<size_t>(x)] / rate, 1e-7));
        }
    }
}

TEST_CASE("simplex output is bit-deterministic across runs") {
    OccupationLp lp = build_occupation_lp(kExample, {0}, 0, {1.0});
    LpSolution a = solve_simplex(lp);
    LpSolution b = solve_simplex(lp);
    CHECK(a.nu == b.nu);
    CHECK(a.objective == b.objective);
    CHECK(a.basis == b.basis);

    ConstrainedSolution s1 = solve_constrained_problem(kExample);
    ConstrainedSolution s2 = solve_constrained_problem(kExample);
    StandardModel mgo = reduce_model(kExample);
    CHECK(solution_to_json(s1, kExample, mgo) == solution_to_json(s2, kExample, mgo));
}
