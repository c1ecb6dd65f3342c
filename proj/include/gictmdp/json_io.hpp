#pragma once

#include <string>

#include "gictmdp/bellman.hpp"
#include "gictmdp/lp.hpp"
#include "gictmdp/model.hpp"
#include "gictmdp/sim.hpp"

namespace gictmdp {

/// Parses the JSON model format: states, gradual_actions, impulse_actions,
/// q ("state/action" -> {state: rate}, diagonal inferred), Q, costs_g,
/// costs_i (arrays indexed by cost index), bounds, x0, optional admissible
/// masks. Throws ValidationError on malformed input.
GradualImpulsiveModel parse_gi_model(const std::string& json_text);

/// Canonical serialization; parse -> serialize is byte-stable.
std::string gi_model_to_json(const GradualImpulsiveModel& m, int indent = 2);

std::string standard_model_to_json(const StandardModel& m, int indent = 2);

/// Policy file: {state: {action: prob}}. Unlisted states default to a point
/// mass on the first admissible action.
StationaryPolicy parse_policy(const std::string& json_text, const StandardModel& mgo);
std::string policy_to_json(const StationaryPolicy& pol, const StandardModel& mgo, int indent = 2);

/// Strategy file: {state: {"w_imp": p, "beta": {action: prob}, "f_hat": {action: prob}}}.
StationaryStrategy parse_strategy(const std::string& json_text, const GradualImpulsiveModel& m);
std::string strategy_to_json(const StationaryStrategy& s, const GradualImpulsiveModel& m,
                             int indent = 2);

std::string validation_report_to_json(const ValidationReport& report, int indent = 2);
std::string evaluation_to_json(const EvaluationResult& result, int indent = 2);
std::string bellman_to_json(const BellmanResult& result, const StandardModel& mgo, int indent = 2);
std::string estimate_to_json(const SimEstimate& est, int indent = 2);
std::string solution_to_json(const ConstrainedSolution& sol, const GradualImpulsiveModel& m,
                             const StandardModel& mgo, int indent = 2);

}  // namespace gictmdp
