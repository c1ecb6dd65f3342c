#pragma once

#include <string>
#include <vector>

namespace gictmdp {

using Real = double;
using Vec = std::vector<Real>;
using Mat = std::vector<Vec>;

constexpr Real kDistTol = 1e-12;  // row-normalization / conservativeness tolerance

/// Finite gradual-impulsive CTMDP instance.
///
/// States and actions are ordered lists of identifiers addressed by index.
/// The cemetery state ("no further jump ever") is implicit: it never appears
/// in `states` and shows up only as absorption mass in a JumpLaw.
struct GradualImpulsiveModel {
    std::vector<std::string> states;
    std::vector<std::string> gradual_actions;
    std::vector<std::string> impulse_actions;

    /// q[x][a][y]: signed conservative rate row for gradual action a at state x.
    /// Diagonal q[x][a][x] = -q_x(a); off-diagonal entries are nonnegative flows.
    std::vector<Mat> q;
    /// Q[x][b][y]: post-impulse distribution for impulse action b at state x.
    /// Self-loops Q[x][b][x] are forbidden.
    std::vector<Mat> Q;

    int cost_count = 1;  // J+1 cost indices, index 0 is the objective
    /// cg[i][x][a]: nonnegative finite cost rate per unit time.
    std::vector<Mat> cg;
    /// ci[i][x][b]: nonnegative finite lump cost per impulse application.
    std::vector<Mat> ci;
    Vec bounds;  // d_1..d_J
    int x0 = 0;

    /// Per-state admissibility masks; default all-admissible.
    std::vector<std::vector<char>> adm_gradual;  // [x][a]
    std::vector<std::vector<char>> adm_impulse;  // [x][b]

    int num_states() const { return static_cast<int>(states.size()); }
    int num_gradual() const { return static_cast<int>(gradual_actions.size()); }
    int num_impulse() const { return static_cast<int>(impulse_actions.size()); }
    int num_constraints() const { return static_cast<int>(bounds.size()); }

    /// Exit rate q_x(a) = -q[x][a][x].
    Real rate(int x, int a) const { return -q[x][a][x]; }
    /// Off-diagonal flow q~(y|x,a), zero on the diagonal.
    Real flow(int x, int a, int y) const { return y == x ? 0.0 : q[x][a][y]; }

    bool gradual_admissible(int x, int a) const { return adm_gradual[x][a] != 0; }
    bool impulse_admissible(int x, int b) const { return adm_impulse[x][b] != 0; }

    /// Fills missing admissibility masks with all-true rows.
    void default_admissibility();
};

enum class ActionKind { Gradual, Impulsive };

struct StandardAction {
    std::string name;
    ActionKind kind = ActionKind::Gradual;
};

/// Standard CTMDP with gradual control only. Impulsive-tagged actions are
/// rate-1 pseudo-jumps whose off-diagonal row is the impulse kernel and whose
/// cost rate equals the original lump cost.
struct StandardModel {
    std::vector<std::string> states;
    std::vector<StandardAction> actions;

    /// q[x][a][y]: signed conservative rate row (diagonal -1 for impulsive tags).
    std::vector<Mat> q;
    /// c[i][x][a]: nonnegative finite cost rates.
    std::vector<Mat> c;

    int cost_count = 1;
    Vec bounds;
    int x0 = 0;

    std::vector<std::vector<char>> adm;  // [x][a]

    int num_states() const { return static_cast<int>(states.size()); }
    int num_actions() const { return static_cast<int>(actions.size()); }
    int num_constraints() const { return static_cast<int>(bounds.size()); }

    Real rate(int x, int a) const { return -q[x][a][x]; }
    Real flow(int x, int a, int y) const { return y == x ? 0.0 : q[x][a][y]; }
    bool admissible(int x, int a) const { return adm[x][a] != 0; }
    bool is_gradual(int a) const { return actions[a].kind == ActionKind::Gradual; }
};

/// Randomized stationary policy on a StandardModel: one distribution over
/// actions per state.
struct StationaryPolicy {
    Mat rows;  // rows[x][a]
    int num_states() const { return static_cast<int>(rows.size()); }
};

/// Piecewise-constant relaxed control in time: finitely many segments of
/// given duration followed by an unbounded tail distribution.
struct TimeSchedule {
    struct Segment {
        Real duration = 0.0;  // strictly positive and finite
        Vec dist;             // distribution over actions
    };
    std::vector<Segment> segments;
    Vec tail;

    static TimeSchedule constant(Vec dist) {
        TimeSchedule s;
        s.tail = std::move(dist);
        return s;
    }
    bool is_constant() const { return segments.empty(); }
};

/// Markov policy: one TimeSchedule per explicit decision epoch plus a
/// stationary tail epoch reused for every later sojourn. Each schedule maps
/// a state to the relaxed control used during that sojourn.
struct MarkovPolicy {
    std::vector<std::vector<TimeSchedule>> epochs;  // [n][x]
    std::vector<TimeSchedule> tail_epoch;           // [x]

    const std::vector<TimeSchedule>& epoch(int n) const {
        return n < static_cast<int>(epochs.size()) ? epochs[static_cast<size_t>(n)] : tail_epoch;
    }
    int explicit_epochs() const { return static_cast<int>(epochs.size()); }

    static MarkovPolicy constant(const StationaryPolicy& pol) {
        MarkovPolicy mp;
        mp.tail_epoch.reserve(pol.rows.size());
        for (const auto& row : pol.rows) mp.tail_epoch.push_back(TimeSchedule::constant(row));
        return mp;
    }
};

/// Stationary strategy for the gradual-impulsive model: at state x, apply an
/// immediate impulse drawn from beta with probability w_imp, otherwise run
/// the gradual relaxed control f_hat forever (until the natural jump).
struct StationaryStrategy {
    Vec w_imp;   // [x] in [0,1]
    Mat beta;    // [x][b] over impulse actions
    Mat f_hat;   // [x][a] over gradual actions
    int num_states() const { return static_cast<int>(w_imp.size()); }
};

enum class Severity { Error, Warning };

struct ValidationIssue {
    Severity severity = Severity::Error;
    std::string location;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool pass() const {
        for (const auto& it : issues)
            if (it.severity == Severity::Error) return false;
        return true;
    }
    std::string summary() const;
};

ValidationReport validate_gi_model(const GradualImpulsiveModel& m);
ValidationReport validate_standard_model(const StandardModel& m);
ValidationReport validate_policy(const StandardModel& m, const StationaryPolicy& pol);
ValidationReport validate_strategy(const GradualImpulsiveModel& m, const StationaryStrategy& s);

/// Throws ValidationError with the report summary unless `report` passes.
void require_valid(const ValidationReport& report, const std::string& what);

/// Built-in model zoo. Known names: "paper-example", "two-state-smoke".
GradualImpulsiveModel builtin_model(const std::string& name);
/// "paper-example" with an explicit truncation size M >= 3.
GradualImpulsiveModel builtin_paper_example(int truncation);

}  // namespace gictmdp
