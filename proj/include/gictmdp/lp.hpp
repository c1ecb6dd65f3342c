#pragma once

#include <stdexcept>

#include "gictmdp/bellman.hpp"
#include "gictmdp/model.hpp"
#include "gictmdp/reduction.hpp"

namespace gictmdp {

/// Occupation-measure linear program over R x A: one balance equality per
/// state of R, one inequality per cost bound, objective = expected cost 0.
struct OccupationLp {
    std::vector<std::pair<int, int>> columns;  // (state, standard-model action) per variable
    std::vector<int> row_state;                // balance row -> state
    Mat eq;                                    // balance rows
    Vec eq_rhs;                                // 1{x = x0}
    Mat le;                                    // cost rows
    Vec le_rhs;                                // d_j
    Vec objective;

    int num_vars() const { return static_cast<int>(columns.size()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Optimal;
    Vec nu;                  // per column
    Real objective = 0.0;
    Real balance_residual = 0.0;
    Vec slacks;              // d_j minus attained cost
    std::vector<int> basis;  // basic column indices of the final tableau
    /// Infeasible: row combination certifying an empty feasible set.
    /// Unbounded: improving ray in column space.
    Vec certificate;
};

/// Raised when x0 lies outside R: the optimal value is 0 and the lifted
/// greedy selector is optimal; there is no program to solve.
class TrivialProblem : public std::runtime_error {
public:
    explicit TrivialProblem(const std::string& what) : std::runtime_error(what) {}
};

OccupationLp build_occupation_lp(const GradualImpulsiveModel& m, const std::vector<int>& R,
                                 int x0, const Vec& bounds);

struct SimplexOptions {
    Real pivot_tol = 1e-11;
    Real feas_tol = 1e-9;
    int max_pivots = 200000;
};

/// Two-phase dense revised simplex with Bland's anti-cycling rule;
/// deterministic pivoting. Throws NumericalFailure on a pivot stall.
LpSolution solve_simplex(const OccupationLp& lp, const SimplexOptions& opts = {});

/// Disintegrates nu into a stationary policy on R; outside R (and on
/// nu-null states of R) uses the greedy selector.
StationaryPolicy extract_policy(const LpSolution& sol, const OccupationLp& lp,
                                const BellmanResult& bellman, const StandardModel& mgo);

struct PipelineOptions {
    BellmanOptions bellman;
    SimplexOptions simplex;
    EvalOptions eval;
    LiftOptions lift;  // empty -> defaults(m)
    Real check_tol = 1e-7;
};

/// Full constrained-problem pipeline: reduce, value function, occupation LP,
/// simplex, policy extraction, lift, and a re-evaluation check of the
/// resulting strategy against the LP objective and the bounds.
struct ConstrainedSolution {
    Real value = 0.0;
    StationaryStrategy strategy;
    StationaryPolicy policy;
    LpSolution lp;
    OccupationLp lp_model;
    BellmanResult bellman;
    EvaluationResult evaluation;
    bool trivial = false;  // x0 outside R
    bool check_pass = false;
};

ConstrainedSolution solve_constrained_problem(const GradualImpulsiveModel& m,
                                              const PipelineOptions& opts = {});

}  // namespace gictmdp
