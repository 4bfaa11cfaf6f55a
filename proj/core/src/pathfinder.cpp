#include "tcgen/pathfinder.hpp"

#include <deque>
#include <map>
#include <set>

namespace tcgen::pathfinder {

namespace {

// Per-state set of guarded transition ids reachable in the raw state graph
// (ignoring path constraints). Used to prune traversal branches that cannot
// cover anything new; an overapproximation, so pruning never loses coverage.
std::map<std::string, std::set<std::string>> guarded_reachability(const StateMachine& m) {
    // Transitive closure over states.
    std::map<std::string, std::set<std::string>> state_closure;
    for (const auto& s : m.states) {
        std::set<std::string> reach{s};
        std::deque<std::string> queue{s};
        while (!queue.empty()) {
            std::string cur = queue.front();
            queue.pop_front();
            for (const auto& t : m.transitions) {
                if (t.source == cur && !reach.count(t.target)) {
                    reach.insert(t.target);
                    queue.push_back(t.target);
                }
            }
        }
        state_closure[s] = std::move(reach);
    }
    std::map<std::string, std::set<std::string>> out;
    for (const auto& s : m.states) {
        std::set<std::string> guarded;
        for (const auto& from : state_closure[s])
            for (const auto& t : m.transitions)
                if (t.guard && t.source == from) guarded.insert(t.id);
        out[s] = std::move(guarded);
    }
    return out;
}

struct Walker {
    const StateMachine& machine;
    const TraversalOptions& options;
    std::map<std::string, std::set<std::string>> reachable_guarded;
    std::set<std::string> covered;
    std::size_t total_guarded = 0;
    std::vector<PredicateTarget> targets;

    std::vector<const statemodel::Transition*> path;

    explicit Walker(const StateMachine& m, const TraversalOptions& opt)
        : machine(m), options(opt), reachable_guarded(guarded_reachability(m)) {
        for (const auto& t : m.transitions)
            if (t.guard) ++total_guarded;
    }

    bool done() const { return covered.size() == total_guarded; }

    bool worth_descending(const std::string& state) const {
        const auto& candidates = reachable_guarded.at(state);
        for (const auto& id : candidates)
            if (!covered.count(id)) return true;
        return false;
    }

    void emit(const statemodel::Transition& t) {
        covered.insert(t.id);
        PredicateTarget base;
        for (const auto* step : path) base.path.push_back(step->id);
        base.target_transition = t.id;
        base.guard = *t.guard;
        base.guard_source = t.guard_source;
        for (std::size_t i = 0; i + 1 < path.size(); ++i)
            base.prefix.push_back({path[i]->id, path[i]->guard, path[i]->actions});
        base.desired_outcome = true;
        targets.push_back(base);
        base.desired_outcome = false;
        targets.push_back(std::move(base));
    }

    bool on_path(const std::string& id) const {
        for (const auto* step : path)
            if (step->id == id) return true;
        return false;
    }

    void dfs(const std::string& state) {
        if (done() || path.size() >= options.max_depth) return;
        for (const auto& t : machine.transitions) {
            if (t.source != state || on_path(t.id)) continue;
            path.push_back(&t);
            if (t.guard && !covered.count(t.id)) emit(t);
            if (!done() && worth_descending(t.target)) dfs(t.target);
            path.pop_back();
            if (done()) return;
        }
    }

    void bfs(const std::string& initial) {
        std::deque<std::vector<const statemodel::Transition*>> queue;
        queue.push_back({});
        while (!queue.empty() && !done()) {
            auto prefix_path = queue.front();
            queue.pop_front();
            if (prefix_path.size() >= options.max_depth) continue;
            const std::string& state =
                prefix_path.empty() ? initial : prefix_path.back()->target;
            for (const auto& t : machine.transitions) {
                if (t.source != state) continue;
                bool used = false;
                for (const auto* step : prefix_path)
                    if (step->id == t.id) used = true;
                if (used) continue;
                path = prefix_path;
                path.push_back(&t);
                if (t.guard && !covered.count(t.id)) emit(t);
                if (worth_descending(t.target)) queue.push_back(path);
            }
        }
        path.clear();
    }
};

}  // namespace

EnumerationResult enumerate_targets(const StateMachine& machine, const TraversalOptions& options) {
    Walker w(machine, options);
    if (options.strategy == TraversalStrategy::DepthFirst)
        w.dfs(machine.initial);
    else
        w.bfs(machine.initial);

    EnumerationResult result;
    result.targets = std::move(w.targets);
    for (const auto& t : machine.transitions)
        if (t.guard && !w.covered.count(t.id)) result.skipped.push_back(t.id);
    return result;
}

ReplayOutcome replay_prefix(const StateMachine& machine, const PredicateTarget& target,
                            const Env& input) {
    (void)machine;
    ReplayOutcome out;
    out.env = input;
    for (std::size_t i = 0; i < target.prefix.size(); ++i) {
        const auto& step = target.prefix[i];
        try {
            if (step.guard && !guardlang::eval_guard(*step.guard, out.env)) {
                out.violation = i;
                return out;
            }
            for (const auto& action : step.actions)
                out.env[action.target] = guardlang::eval_arith(action.expr, out.env);
        } catch (const guardlang::EvalError& e) {
            throw ReplayError(i, e.what());
        }
    }
    return out;
}

std::string expected_end_state(const StateMachine& machine, const PredicateTarget& target) {
    const auto* t = machine.find_transition(target.target_transition);
    if (!t) throw std::logic_error("target transition not found in machine");
    return target.desired_outcome ? t->target : t->source;
}

}  // namespace tcgen::pathfinder
