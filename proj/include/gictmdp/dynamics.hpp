#pragma once

#include <limits>

#include "gictmdp/model.hpp"

namespace gictmdp {

constexpr Real kInf = std::numeric_limits<Real>::infinity();

/// Exact one-step law from a state: distribution of the next state, mass of
/// "no further jump ever" (absorption), expected cost accumulated over the
/// sojourn per cost index, and expected sojourn time.
struct JumpLaw {
    Vec next;                  // sub-distribution over states
    Real absorb = 0.0;         // mass of the (infinite sojourn, cemetery) event
    Vec sojourn_cost;          // expected accumulated cost, entries may be +inf
    Real mean_sojourn = 0.0;   // +inf whenever absorb > 0
    Real trunc_error = 0.0;    // series truncation bound, 0 for closed forms

    Real total_mass() const {
        Real s = absorb;
        for (Real p : next) s += p;
        return s;
    }
};

/// Truncation control for the kernel series of pseudo-Poisson and
/// Poisson-related laws.
struct SeriesOptions {
    Real tol = 1e-12;
    int k_max = 100000;
};

/// One-step law in the gradual-impulsive model under the triple
/// (planned impulse time c_hat, planned impulse b_hat, relaxed control rho).
/// rho is a schedule over gradual actions; b_hat is ignored when c_hat is
/// +inf (pass -1 in that case if preferred).
JumpLaw gi_jump_law(const GradualImpulsiveModel& m, int x, Real c_hat, int b_hat,
                    const TimeSchedule& rho);

/// One-step law in the standard model under the relaxed control rho
/// (a schedule over all actions).
JumpLaw go_jump_law(const StandardModel& mgo, int x, const TimeSchedule& rho);

/// Kernel list with a tail kernel reused for all larger indices.
struct KernelSequence {
    Mat prefix;  // kernels k = 0..prefix.size()-1
    Vec tail;    // kernel for every larger k
    const Vec& at(int k) const {
        return k < static_cast<int>(prefix.size()) ? prefix[static_cast<size_t>(k)] : tail;
    }
};

/// One-step law of a pseudo-Poisson-related kernel sequence on the standard
/// model: actions are redrawn from kernels[k] at action-dependent exponential
/// epochs (rate lambda on gradual-tagged draws, frozen on impulsive ones).
/// Throws DivergesError when the kernel series fails to contract at x.
JumpLaw pseudo_jump_law(const StandardModel& mgo, const KernelSequence& kernels, int x,
                        Real lambda, const SeriesOptions& opts = {});

/// Per-state epoch rule of a Poisson-related strategy: gradual redraw kernels,
/// continuation probabilities (the impulse fires at redraw index k with
/// probability prod_{m<k} g_m (1-g_k)), and impulse-choice kernels.
struct PoissonStateRule {
    Mat grad_prefix;            // kernels over gradual actions
    Vec grad_tail;
    std::vector<Real> g_prefix; // continuation probabilities in [0,1]
    Real g_tail = 1.0;
    Mat imp_prefix;             // kernels over impulse actions
    Vec imp_tail;

    const Vec& grad_at(int k) const {
        return k < static_cast<int>(grad_prefix.size()) ? grad_prefix[static_cast<size_t>(k)]
                                                        : grad_tail;
    }
    Real g_at(int k) const {
        return k < static_cast<int>(g_prefix.size()) ? g_prefix[static_cast<size_t>(k)] : g_tail;
    }
    const Vec& imp_at(int k) const {
        return k < static_cast<int>(imp_prefix.size()) ? imp_prefix[static_cast<size_t>(k)]
                                                       : imp_tail;
    }
};

/// One-step law of a Poisson-related rule in the gradual-impulsive model:
/// gradual actions are redrawn at Exp(lambda) epochs and the impulse is
/// scheduled at the geometrically selected epoch. Evaluated as the sum of the
/// natural-jump-before-impulse, natural-jump-never-impulse and impulse terms.
JumpLaw poisson_jump_law(const GradualImpulsiveModel& m, const PoissonStateRule& rule, int x,
                         Real lambda, const SeriesOptions& opts = {});

/// One-step law at x under a stationary strategy: mixture of the immediate
/// impulse branch (weight w_imp) and the run-forever gradual branch.
JumpLaw strategy_jump_law(const GradualImpulsiveModel& m, const StationaryStrategy& s, int x);

}  // namespace gictmdp
