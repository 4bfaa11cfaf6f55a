#pragma once

// Boundary test-data generation: turns a selected predicate into an oriented
// predicate function F and minimizes it one input variable at a time
// (alternating variable method: exploratory moves at the variable's unit
// step, step doubling on success, step halving on failure) until the guard
// outcome flips. The flip pair is then refined to unit adjacency, giving the
// ON/OFF input pair that straddles the predicate boundary.

#include <cstdint>
#include <optional>
#include <string>

#include "tcgen/pathfinder.hpp"
#include "tcgen/statemodel.hpp"

namespace tcgen::datagen {

using guardlang::Env;
using guardlang::Value;
using pathfinder::PredicateTarget;
using statemodel::StateMachine;

// ---------------------------------------------------------------------------
// Predicate function
// ---------------------------------------------------------------------------

enum class Orientation { LhsMinusRhs, RhsMinusLhs, AbsDiff };

/// Oriented difference of the guard's two sides; positive while the outcome
/// still disagrees with the one being sought, driven toward zero/negative by
/// the search. Equality and inequality guards use the absolute difference.
struct PredicateFunction {
    Orientation orientation = Orientation::LhsMinusRhs;
    const PredicateTarget* target = nullptr;
    bool sought_outcome = true;

    /// F at an environment already replayed to the target predicate.
    Value eval(const Env& env_at_target) const;
};

/// Chooses the orientation so that F(env0) >= 0 and minimizing F moves the
/// guard toward `sought` at env0 (env0 is the environment at the target
/// predicate). Precondition: the guard's outcome at env0 differs from
/// `sought`.
PredicateFunction build_predicate_function(const PredicateTarget& target, const Env& env0,
                                           bool sought);

// ---------------------------------------------------------------------------
// Search configuration and results
// ---------------------------------------------------------------------------

struct SearchConfig {
    std::uint64_t seed = 0;
    std::uint32_t max_evaluations = 10000;
    /// When set, the first attempt starts here instead of a random draw;
    /// restarts are always random. Must bind every declared variable within
    /// its domain.
    std::optional<Env> initial;
    /// Refinement floor scale for real variables: floor = unit_step * 2^-20.
    /// Integer variables always use their unit_step as the floor.
    static constexpr double kRealFloorScale = 1.0 / (1 << 20);
};

/// The ON/OFF pair: i_in keeps the outcome the search started from, i_out has
/// the desired outcome; they differ in exactly one variable by at most one
/// refinement-floor step, and both replay the prefix without violation.
struct BoundaryPair {
    Env i_in;
    Env i_out;
    Value f_in;
    Value f_out;
    std::uint32_t evaluations_used = 0;
};

struct ViolationHotspot {
    std::size_t step_index = 0;     // prefix step index; == prefix size for the target itself
    std::string transition_id;
    std::uint64_t hits = 0;
};

struct FailureReport {
    std::string target_transition;
    bool desired_outcome = true;
    std::optional<double> best_f;  // best (lowest) feasible F seen, if any point was feasible
    std::uint32_t evaluations_used = 0;
    std::uint32_t restarts = 0;
    std::optional<ViolationHotspot> top_violation;
    std::string reason;  // "budget_exhausted"
};

struct SearchStats {
    std::uint32_t evaluations = 0;
    std::uint32_t restarts = 0;
    /// Accepted moves whose F failed to strictly decrease within a variable
    /// phase. Always zero unless the descent logic is broken; instrumented so
    /// the invariant is checkable from outside.
    std::uint32_t monotone_violations = 0;
};

struct SearchResult {
    std::optional<BoundaryPair> pair;      // set on success
    std::optional<FailureReport> failure;  // set on failure
    SearchStats stats;

    bool ok() const { return pair.has_value(); }
};

/// Runs the alternating variable search for one predicate target.
/// `target_index` selects the private random substream: searches for distinct
/// targets are independent, and serial or parallel execution produces the
/// same result for the same (seed, target_index).
///
/// If the initial data already yields the desired outcome the search runs
/// toward the opposite side instead, so the returned pair always straddles
/// the boundary with i_out on the desired side.
SearchResult alternating_variable_search(const StateMachine& machine,
                                         const PredicateTarget& target,
                                         const SearchConfig& config,
                                         std::uint64_t target_index);

// ---------------------------------------------------------------------------
// Random substreams
// ---------------------------------------------------------------------------

/// splitmix64; used to derive per-target, per-restart RNG seeds so results
/// are reproducible across platforms and thread counts.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace tcgen::datagen
