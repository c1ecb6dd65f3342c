#pragma once

#include "gictmdp/dynamics.hpp"
#include "gictmdp/model.hpp"

namespace gictmdp {

/// Policy of the standard model that redraws its action from kernels[n][x][k]
/// at action-dependent exponential epochs: rate lambda while a gradual action
/// is active, frozen (no redraw) on impulsive ones.
struct PseudoPoissonPolicy {
    Real lambda = 1.0;

    struct StateKernels {
        KernelSequence kernels;  // over standard-model actions
        bool approximate = false;  // quadrature prefix + tail-segment closed form
    };
    using Epoch = std::vector<StateKernels>;  // [x]

    std::vector<Epoch> epochs;  // n = 0..N-1
    Epoch tail_epoch;           // reused for n >= N

    const Epoch& epoch(int n) const {
        return n < static_cast<int>(epochs.size()) ? epochs[static_cast<size_t>(n)] : tail_epoch;
    }
    int explicit_epochs() const { return static_cast<int>(epochs.size()); }
};

/// Strategy of the gradual-impulsive model that redraws gradual actions at
/// Exp(lambda) epochs and schedules the impulse at the geometrically selected
/// redraw index.
struct PoissonStrategy {
    Real lambda = 1.0;
    using Epoch = std::vector<PoissonStateRule>;  // [x]

    std::vector<Epoch> epochs;
    Epoch tail_epoch;

    const Epoch& epoch(int n) const {
        return n < static_cast<int>(epochs.size()) ? epochs[static_cast<size_t>(n)] : tail_epoch;
    }
    int explicit_epochs() const { return static_cast<int>(epochs.size()); }
};

struct PseudoBuildOptions {
    Real quad_tol = 1e-10;
    int k_cut = 32;  // explicit kernel prefix for piecewise schedules
};

/// Builds the pseudo-Poisson-related policy replicating a Markov policy.
/// Constant-in-time schedules collapse to a single closed-form kernel
/// p(a|x) ~ (q_x(a) + lambda_bar(a)) mu(a); piecewise schedules get a
/// quadrature-evaluated kernel prefix plus the final segment's closed form
/// as the tail, with the approximation flag set.
PseudoPoissonPolicy build_pseudo_policy(const StandardModel& mgo, const MarkovPolicy& pol,
                                        Real lambda, const PseudoBuildOptions& opts = {});

/// Splits each pseudo kernel into its gradual part (renormalized), the
/// continuation probability g = (gradual mass), and its impulse part
/// (renormalized), with the shared point-mass defaults on empty parts.
PoissonStrategy build_poisson_strategy(const GradualImpulsiveModel& m,
                                       const PseudoPoissonPolicy& pp);

}  // namespace gictmdp
