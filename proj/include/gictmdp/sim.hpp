#pragma once

#include <cstdint>

#include "gictmdp/model.hpp"
#include "gictmdp/poisson.hpp"

namespace gictmdp {

/// Splittable counter-based stream: episode e of a run draws from a stream
/// derived from (seed, e), so results are independent of execution order.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t episode);

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    Real uniform();
    /// Exponential with the given rate; +inf when rate <= 0.
    Real exponential(Real rate);
    /// Index drawn from nonnegative weights with the given total; walks the
    /// cumulative sum in ascending index order.
    int categorical(const Vec& weights, Real total);

private:
    std::uint64_t state_[4];
};

struct SimConfig {
    int episodes = 1;
    std::uint64_t seed = 0;
    int max_jumps = 100000;
    Real time_horizon = -1.0;  // <= 0 disables the horizon cap
    int max_impulse_chain = 10000;
    Real lambda = 1.0;  // used by the Poisson control classes
};

struct SimEstimate {
    Vec mean;        // per cost index
    Vec std_error;   // per cost index
    int truncated_episode_count = 0;
    int episodes = 0;
};

SimEstimate simulate_policy(const StandardModel& mgo, const StationaryPolicy& pol, int x0,
                            const SimConfig& cfg);
SimEstimate simulate_policy(const StandardModel& mgo, const MarkovPolicy& pol, int x0,
                            const SimConfig& cfg);
SimEstimate simulate_policy(const StandardModel& mgo, const PseudoPoissonPolicy& pol, int x0,
                            const SimConfig& cfg);

SimEstimate simulate_strategy(const GradualImpulsiveModel& m, const StationaryStrategy& s, int x0,
                              const SimConfig& cfg);
SimEstimate simulate_strategy(const GradualImpulsiveModel& m, const PoissonStrategy& s, int x0,
                              const SimConfig& cfg);

}  // namespace gictmdp
