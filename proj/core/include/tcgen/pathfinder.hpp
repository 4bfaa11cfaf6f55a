#pragma once

// Traverses the state machine to select every conditional predicate once,
// pairing it with the first path that reaches it and both desired outcomes.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tcgen/statemodel.hpp"

namespace tcgen::pathfinder {

using guardlang::ActionStmt;
using guardlang::Env;
using guardlang::GuardExpr;
using statemodel::StateMachine;

/// One step of the path leading to the target predicate: its guard (if any)
/// must evaluate true, then its actions run in listed order.
struct PrefixStep {
    std::string transition_id;
    std::optional<GuardExpr> guard;
    std::vector<ActionStmt> actions;
};

/// A predicate to generate boundary data for: the target transition's guard,
/// the desired outcome, and the path that puts the machine in front of it.
struct PredicateTarget {
    std::vector<std::string> path;  // transition ids, initial state onward; last is the target
    std::string target_transition;  // == path.back()
    GuardExpr guard;
    std::string guard_source;
    bool desired_outcome = true;
    std::vector<PrefixStep> prefix;  // path minus the target transition
};

enum class TraversalStrategy { DepthFirst, BreadthFirst };

struct TraversalOptions {
    std::size_t max_depth = 16;  // maximum path length, in transitions
    TraversalStrategy strategy = TraversalStrategy::DepthFirst;
};

struct EnumerationResult {
    std::vector<PredicateTarget> targets;
    /// Guarded transitions not reachable by any path within the options'
    /// bounds, in declared order. Never silently dropped.
    std::vector<std::string> skipped;
};

/// Walks the machine from the initial state, visiting transitions in declared
/// order, each transition at most once per path, paths no longer than
/// max_depth. For every guarded transition the first path that reaches it
/// yields two targets, desired outcome true then false. Deterministic: two
/// runs produce identical results.
EnumerationResult enumerate_targets(const StateMachine& machine,
                                    const TraversalOptions& options = {});

struct ReplayOutcome {
    Env env;  // environment in force at the target predicate (valid when no violation)
    std::optional<std::size_t> violation;  // index of the first violated prefix step
};

/// Arithmetic evaluation failure while replaying; carries the prefix step.
class ReplayError : public std::runtime_error {
public:
    ReplayError(std::size_t step, const std::string& message)
        : std::runtime_error("replay step " + std::to_string(step) + ": " + message),
          step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

/// Replays the target's prefix from `input`: each step's guard must hold
/// under the current environment, then its actions apply in order. Returns
/// the environment at the target predicate, or the index of the first
/// violated step.
ReplayOutcome replay_prefix(const StateMachine& machine, const PredicateTarget& target,
                            const Env& input);

/// State the machine ends in when the target predicate takes the desired
/// outcome: past the target transition when true, its source state when
/// false.
std::string expected_end_state(const StateMachine& machine, const PredicateTarget& target);

}  // namespace tcgen::pathfinder
