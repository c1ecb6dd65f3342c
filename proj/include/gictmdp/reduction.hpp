#pragma once

#include "gictmdp/model.hpp"

namespace gictmdp {

/// Default distributions used on probability-zero branches of the lift:
/// p_star over gradual actions (when the policy has no gradual mass) and
/// p_star_star over impulse actions (for the never-impulse branch).
struct LiftOptions {
    Vec p_star;
    Vec p_star_star;

    /// Point masses on the first gradual / first impulsive action.
    static LiftOptions defaults(const GradualImpulsiveModel& m);
};

/// Builds the standard model induced by m: gradual actions keep their rate
/// rows and cost rates; each impulse action becomes a rate-1 action whose
/// off-diagonal row is the impulse kernel and whose cost rate is the lump
/// cost. Action order: all gradual actions, then all impulse actions.
StandardModel reduce_model(const GradualImpulsiveModel& m);

/// Lifts a stationary policy of reduce_model(m) to a stationary strategy of m
/// with identical per-state jump law (next-state distribution, absorption and
/// expected sojourn costs).
StationaryStrategy lift_stationary_policy(const StationaryPolicy& fbar,
                                          const GradualImpulsiveModel& m,
                                          const LiftOptions& opts);

StationaryStrategy lift_stationary_policy(const StationaryPolicy& fbar,
                                          const GradualImpulsiveModel& m);

}  // namespace gictmdp
