#pragma once

#include "gictmdp/dynamics.hpp"
#include "gictmdp/errors.hpp"
#include "gictmdp/model.hpp"
#include "gictmdp/poisson.hpp"

namespace gictmdp {

struct BellmanOptions {
    Real epsilon = 1.0;
    Real tol = 1e-12;
    int max_iter = 1000000;
    Real divergence_cap = 1e12;  // values above are reported as +inf
};

/// Fixed point of the aggregate-cost operator: v, a greedy selector, and the
/// set R of states with positive value.
struct BellmanResult {
    Vec v;                    // >= 0, entries may be +inf
    std::vector<int> f_star;  // greedy action per state, lowest-index ties
    std::vector<char> in_R;   // v(x) > theta_R
    int iterations = 0;
    Real residual = 0.0;

    std::vector<int> R() const {
        std::vector<int> r;
        for (int x = 0; x < static_cast<int>(in_R.size()); ++x)
            if (in_R[static_cast<size_t>(x)]) r.push_back(x);
        return r;
    }
};

/// Minimal nonnegative solution of
///   v(x) = min_a [sum_j c_j(x,a) + sum_y flow(y|x,a) v(y) + eps v(x)] / (eps + q_x(a)),
/// iterated monotonically from zero. The fixed point does not depend on eps.
/// Throws BellmanUnconverged (partial iterate attached) at the iteration cap.
BellmanResult compute_vstar(const StandardModel& mgo, const BellmanOptions& opts = {});

class BellmanUnconverged : public UnconvergedError {
public:
    BellmanUnconverged(const std::string& what, BellmanResult partial)
        : UnconvergedError(what, partial.iterations), partial(std::move(partial)) {}
    BellmanResult partial;
};

struct EvalOptions {
    Real tol = 1e-13;
    int max_iter = 2000000;
    Real divergence_cap = 1e12;
};

/// Total expected cost vectors of a control rule.
struct EvaluationResult {
    Vec W;   // W[i] = w[i][x0], entries in [0, +inf]
    Mat w;   // per-state value vectors, w[i][x]
    int iterations = 0;
    Real residual = 0.0;
    Real max_trunc_error = 0.0;  // largest one-step-law truncation bound used
};

EvaluationResult evaluate_policy(const StandardModel& mgo, const StationaryPolicy& pol, int x0,
                                 const EvalOptions& opts = {});
EvaluationResult evaluate_policy(const StandardModel& mgo, const MarkovPolicy& pol, int x0,
                                 const EvalOptions& opts = {});
EvaluationResult evaluate_policy(const StandardModel& mgo, const PseudoPoissonPolicy& pol, int x0,
                                 const EvalOptions& opts = {}, const SeriesOptions& series = {});

EvaluationResult evaluate_strategy(const GradualImpulsiveModel& m, const StationaryStrategy& s,
                                   int x0, const EvalOptions& opts = {});
EvaluationResult evaluate_strategy(const GradualImpulsiveModel& m, const PoissonStrategy& s,
                                   int x0, const EvalOptions& opts = {},
                                   const SeriesOptions& series = {});

/// Minimal nonnegative solution of w = g + P w by monotone iteration from 0,
/// one system per cost index. laws[x] supplies P(x,.) = next and g = sojourn_cost.
EvaluationResult evaluate_laws(const std::vector<JumpLaw>& laws, int cost_count, int x0,
                               const EvalOptions& opts);

class EvaluationUnconverged : public UnconvergedError {
public:
    EvaluationUnconverged(const std::string& what, EvaluationResult partial)
        : UnconvergedError(what, partial.iterations), partial(std::move(partial)) {}
    EvaluationResult partial;
};

}  // namespace gictmdp
