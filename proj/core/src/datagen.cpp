#include "tcgen/datagen.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <map>

namespace tcgen::datagen {

using guardlang::ArithmeticError;
using guardlang::EvalError;
using guardlang::NumKind;
using guardlang::RelOp;
using guardlang::v_abs;
using guardlang::v_compare;
using guardlang::v_equal;
using guardlang::v_neg;
using guardlang::v_sub;
using statemodel::VariableDecl;

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

// Deterministic across platforms, unlike the std distributions.
class SplitMixRng {
public:
    explicit SplitMixRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

private:
    std::uint64_t state_;
};

/// Number of unit-step lattice points in [lo, hi].
std::uint64_t lattice_points(const VariableDecl& var) {
    if (var.kind == NumKind::Integer) {
        unsigned __int128 span = static_cast<unsigned __int128>(
            static_cast<__int128>(var.hi.as_integer()) - var.lo.as_integer());
        std::uint64_t step = static_cast<std::uint64_t>(var.unit_step.as_integer());
        return static_cast<std::uint64_t>(span / step) + 1;
    }
    double span = var.hi.as_real() - var.lo.as_real();
    double n = std::floor(span / var.unit_step.as_real());
    if (!(n >= 0)) return 1;
    if (n > 4.6e18) return std::uint64_t(1) << 62;
    return static_cast<std::uint64_t>(n) + 1;
}

/// Random draws land on the unit-step lattice so later unit-sized moves stay
/// exact for both kinds.
Value draw_in_domain(const VariableDecl& var, SplitMixRng& rng) {
    std::uint64_t k = rng.below(lattice_points(var));
    if (var.kind == NumKind::Integer)
        return Value::integer(var.lo.as_integer() +
                              static_cast<std::int64_t>(k) * var.unit_step.as_integer());
    return Value::real(var.lo.as_real() + static_cast<double>(k) * var.unit_step.as_real());
}

Orientation choose_orientation(RelOp op, bool sought) {
    if (op == RelOp::Eq || op == RelOp::Ne) return Orientation::AbsDiff;
    bool lhs_should_shrink = (op == RelOp::Lt && sought) || (op == RelOp::Le && sought) ||
                             (op == RelOp::Gt && !sought) || (op == RelOp::Ge && !sought);
    return lhs_should_shrink ? Orientation::LhsMinusRhs : Orientation::RhsMinusLhs;
}

struct PointEval {
    bool feasible = false;
    std::optional<std::size_t> violated_step;
    Env env_at_target;
    bool outcome = false;
    Value diff;  // lhs - rhs at the target predicate
};

struct RefineOutcome {
    enum class Status { Ok, Infeasible, Budget };
    Status status = Status::Infeasible;
    BoundaryPair pair;
};

class Searcher {
public:
    Searcher(const StateMachine& machine, const PredicateTarget& target,
             const SearchConfig& config, std::uint64_t target_index)
        : machine_(machine), target_(target), config_(config), target_index_(target_index) {}

    SearchResult run() {
        if (config_.max_evaluations == 0)
            throw std::invalid_argument("max_evaluations must be at least 1");
        if (config_.initial) check_initial(*config_.initial);

        SearchResult result;
        std::uint64_t attempt = 0;
        const auto& vars = machine_.variables;

        while (stats_.evaluations < config_.max_evaluations) {
            Env input = draw_initial(attempt);
            if (attempt > 0) ++stats_.restarts;
            ++attempt;

            auto ev0 = evaluate_point(input);
            if (!ev0) break;  // budget
            if (!ev0->feasible) continue;

            sought_ = ev0->outcome == target_.desired_outcome ? !target_.desired_outcome
                                                              : target_.desired_outcome;
            orientation_ = choose_orientation(target_.guard.op, sought_);
            auto f0 = oriented_f(ev0->diff);
            if (!f0) continue;
            env_ = std::move(input);
            f_cur_ = *f0;
            note_feasible_f(f_cur_);

            if (vars.empty()) continue;  // no inputs to move; redraw until the budget runs out

            std::size_t var_index = 0;
            std::size_t barren_phases = 0;  // consecutive phases with no accepted move
            bool give_up = false;
            while (!give_up && stats_.evaluations < config_.max_evaluations) {
                PhaseResult pr = run_phase(vars[var_index]);
                switch (pr.kind) {
                    case PhaseResult::Kind::Flip:
                        pr.pair.evaluations_used = stats_.evaluations;
                        result.pair = std::move(pr.pair);
                        result.stats = stats_;
                        return result;
                    case PhaseResult::Kind::Budget:
                        give_up = true;
                        break;
                    case PhaseResult::Kind::LocalMin:
                        barren_phases = pr.any_success ? 0 : barren_phases + 1;
                        if (barren_phases >= vars.size())
                            give_up = true;  // full cycle without progress: restart
                        else
                            var_index = (var_index + 1) % vars.size();
                        break;
                }
            }
        }

        FailureReport report;
        report.target_transition = target_.target_transition;
        report.desired_outcome = target_.desired_outcome;
        report.best_f = best_f_;
        report.evaluations_used = stats_.evaluations;
        report.restarts = stats_.restarts;
        report.top_violation = top_violation();
        report.reason = "budget_exhausted";
        result.failure = std::move(report);
        result.stats = stats_;
        return result;
    }

private:
    // --- initial data -------------------------------------------------------

    void check_initial(const Env& env) const {
        for (const auto& var : machine_.variables) {
            auto it = env.find(var.name);
            if (it == env.end())
                throw std::invalid_argument("initial data does not bind variable '" + var.name +
                                            "'");
            if (v_compare(it->second, var.lo) < 0 || v_compare(it->second, var.hi) > 0)
                throw std::invalid_argument("initial value of '" + var.name +
                                            "' is outside its domain");
        }
    }

    Env draw_initial(std::uint64_t attempt) {
        if (attempt == 0 && config_.initial) return *config_.initial;
        std::uint64_t stream =
            mix_seed(mix_seed(config_.seed + 0x9e3779b97f4a7c15ULL * (target_index_ + 1)) + attempt);
        SplitMixRng rng(stream);
        Env env;
        for (const auto& var : machine_.variables) env[var.name] = draw_in_domain(var, rng);
        return env;
    }

    // --- point evaluation ---------------------------------------------------

    void record_violation(std::size_t step) { ++violation_hits_[step]; }

    /// One budgeted evaluation: replay the prefix, then the guard's two sides.
    /// nullopt means the budget is exhausted (nothing was spent).
    std::optional<PointEval> evaluate_point(const Env& input) {
        if (stats_.evaluations >= config_.max_evaluations) return std::nullopt;
        ++stats_.evaluations;
        PointEval ev;
        try {
            auto replay = pathfinder::replay_prefix(machine_, target_, input);
            if (replay.violation) {
                ev.violated_step = replay.violation;
                record_violation(*replay.violation);
                return ev;
            }
            Value lhs = guardlang::eval_arith(target_.guard.lhs, replay.env);
            Value rhs = guardlang::eval_arith(target_.guard.rhs, replay.env);
            int cmp = v_compare(lhs, rhs);
            ev.outcome = guardlang::relop_holds(target_.guard.op, cmp);
            ev.diff = v_sub(lhs, rhs);
            ev.env_at_target = std::move(replay.env);
            ev.feasible = true;
        } catch (const pathfinder::ReplayError& e) {
            ev.violated_step = e.step();
            record_violation(e.step());
        } catch (const EvalError&) {
            ev.violated_step = target_.prefix.size();  // the target predicate itself
            record_violation(target_.prefix.size());
        } catch (const ArithmeticError&) {
            ev.violated_step = target_.prefix.size();
            record_violation(target_.prefix.size());
        }
        return ev;
    }

    std::optional<Value> oriented_f(const Value& diff) const {
        try {
            switch (orientation_) {
                case Orientation::LhsMinusRhs: return diff;
                case Orientation::RhsMinusLhs: return v_neg(diff);
                case Orientation::AbsDiff: return v_abs(diff);
            }
        } catch (const ArithmeticError&) {
        }
        return std::nullopt;
    }

    void note_feasible_f(const Value& f) {
        double v = f.as_real();
        if (!best_f_ || v < *best_f_) best_f_ = v;
    }

    // --- moves ---------------------------------------------------------------

    struct MoveResult {
        enum class Kind { Fail, Accept, Flip, Budget };
        Kind kind = Kind::Fail;
        BoundaryPair pair;  // Flip only
    };

    static Value clamp(const Value& v, const VariableDecl& var) {
        if (v_compare(v, var.lo) < 0) return var.lo;
        if (v_compare(v, var.hi) > 0) return var.hi;
        return v;
    }

    /// Current value moved by dir*step, clamped into the domain; nullopt if
    /// the arithmetic itself is out of range.
    static std::optional<Value> stepped(const Value& cur, int dir, const Value& step,
                                        const VariableDecl& var) {
        if (cur.is_integer() && step.is_integer()) {
            std::int64_t delta, cand;
            if (__builtin_mul_overflow(static_cast<std::int64_t>(dir), step.as_integer(), &delta))
                return std::nullopt;
            if (__builtin_add_overflow(cur.as_integer(), delta, &cand))
                cand = dir > 0 ? std::numeric_limits<std::int64_t>::max()
                               : std::numeric_limits<std::int64_t>::min();
            return clamp(Value::integer(cand), var);
        }
        double cand = cur.as_real() + dir * step.as_real();
        if (std::isnan(cand)) return std::nullopt;
        return clamp(Value::real(cand), var);
    }

    MoveResult try_move(const VariableDecl& var, int dir, const Value& step) {
        MoveResult mr;
        Value cur = env_.at(var.name);
        auto cand_val = stepped(cur, dir, step, var);
        if (!cand_val || v_equal(*cand_val, cur)) return mr;  // clamped into a no-op

        Env cand = env_;
        cand[var.name] = *cand_val;
        auto ev = evaluate_point(cand);
        if (!ev) {
            mr.kind = MoveResult::Kind::Budget;
            return mr;
        }
        if (!ev->feasible) return mr;

        if (ev->outcome == sought_) {
            // Boundary crossed; the authoritative signal is the guard outcome,
            // not the sign of F.
            auto refined = refine_adjacency(var, dir, cand, *ev);
            switch (refined.status) {
                case RefineOutcome::Status::Ok:
                    mr.kind = MoveResult::Kind::Flip;
                    mr.pair = std::move(refined.pair);
                    return mr;
                case RefineOutcome::Status::Budget:
                    mr.kind = MoveResult::Kind::Budget;
                    return mr;
                case RefineOutcome::Status::Infeasible:
                    return mr;  // unusable flip: an infeasible band blocks adjacency
            }
        }

        auto f_new = oriented_f(ev->diff);
        if (!f_new) return mr;
        note_feasible_f(*f_new);
        if (v_compare(*f_new, f_cur_) < 0) {
            if (last_accepted_f_ && v_compare(*f_new, *last_accepted_f_) >= 0)
                ++stats_.monotone_violations;
            last_accepted_f_ = *f_new;
            env_ = std::move(cand);
            f_cur_ = *f_new;
            mr.kind = MoveResult::Kind::Accept;
        }
        return mr;
    }

    // --- adjacency refinement -------------------------------------------------

    Value floor_for(const VariableDecl& var) const {
        if (var.kind == NumKind::Integer) return var.unit_step;
        return Value::real(var.unit_step.as_real() * SearchConfig::kRealFloorScale);
    }

    /// Bisects between the last point before the flip (env_, outcome
    /// != sought) and the flipped point until they are one refinement-floor
    /// step apart. Both ends stay feasible with their outcomes.
    RefineOutcome refine_adjacency(const VariableDecl& var, int dir, const Env& flipped_env,
                                   const PointEval& flipped_ev) {
        RefineOutcome out;
        Env in_env = env_;
        Value in_f = f_cur_;
        Env out_env = flipped_env;
        auto out_f = oriented_f(flipped_ev.diff);
        if (!out_f) return out;
        Value floor = floor_for(var);
        bool integer = var.kind == NumKind::Integer;

        while (true) {
            Value a = in_env.at(var.name);
            Value b = out_env.at(var.name);
            Value gap = v_abs(v_sub(b, a));
            if (v_compare(gap, floor) <= 0) break;

            Value half;
            if (integer) {
                std::int64_t units = gap.as_integer() / var.unit_step.as_integer();
                half = Value::integer((units / 2) * var.unit_step.as_integer());
            } else {
                half = Value::real(gap.as_real() / 2.0);
            }
            auto mid_val = stepped(a, dir, half, var);
            if (!mid_val || v_equal(*mid_val, a) || v_equal(*mid_val, b)) {
                // Sub-ULP gap on reals: as tight as representable.
                if (!integer) break;
                return scan_adjacent(var, dir, in_env, in_f, out_env, *out_f);
            }
            Env mid = in_env;
            mid[var.name] = *mid_val;
            auto ev = evaluate_point(mid);
            if (!ev) {
                out.status = RefineOutcome::Status::Budget;
                return out;
            }
            if (!ev->feasible) {
                if (integer) return scan_adjacent(var, dir, in_env, in_f, out_env, *out_f);
                return out;  // real kind: cannot bridge an infeasible band
            }
            auto f_mid = oriented_f(ev->diff);
            if (!f_mid) {
                if (integer) return scan_adjacent(var, dir, in_env, in_f, out_env, *out_f);
                return out;
            }
            if (ev->outcome == sought_) {
                out_env = std::move(mid);
                *out_f = *f_mid;
            } else {
                in_env = std::move(mid);
                in_f = *f_mid;
            }
        }

        out.status = RefineOutcome::Status::Ok;
        out.pair.i_in = std::move(in_env);
        out.pair.i_out = std::move(out_env);
        out.pair.f_in = in_f;
        out.pair.f_out = *out_f;
        return out;
    }

    /// Fallback for integer variables when bisection hits an infeasible
    /// midpoint: walk unit by unit from the inside point and take the first
    /// adjacent feasible straddle, if one exists on this segment.
    RefineOutcome scan_adjacent(const VariableDecl& var, int dir, Env in_env, Value in_f,
                                const Env& out_env, const Value& out_f) {
        RefineOutcome out;
        Value stop = out_env.at(var.name);
        Env prev = std::move(in_env);
        Value prev_f = in_f;
        bool prev_adjacent = true;  // prev starts at the inside point itself
        Env cursor = prev;
        while (true) {
            Value x = cursor.at(var.name);
            if (v_equal(x, stop)) return out;  // exhausted without an adjacent straddle
            auto next_val = stepped(x, dir, var.unit_step, var);
            if (!next_val || v_equal(*next_val, x)) return out;
            cursor[var.name] = *next_val;
            if (v_equal(*next_val, stop)) {
                // The far end is known feasible and flipped.
                if (prev_adjacent_to(*next_val, prev.at(var.name), var)) {
                    out.status = RefineOutcome::Status::Ok;
                    out.pair.i_in = std::move(prev);
                    out.pair.i_out = out_env;
                    out.pair.f_in = prev_f;
                    out.pair.f_out = out_f;
                }
                return out;
            }
            auto ev = evaluate_point(cursor);
            if (!ev) {
                out.status = RefineOutcome::Status::Budget;
                return out;
            }
            if (!ev->feasible) continue;
            auto f_here = oriented_f(ev->diff);
            if (!f_here) continue;
            if (ev->outcome == sought_) {
                if (prev_adjacent_to(*next_val, prev.at(var.name), var)) {
                    out.status = RefineOutcome::Status::Ok;
                    out.pair.i_in = std::move(prev);
                    out.pair.i_out = cursor;
                    out.pair.f_in = prev_f;
                    out.pair.f_out = *f_here;
                }
                return out;
            }
            prev = cursor;
            prev_f = *f_here;
        }
    }

    static bool prev_adjacent_to(const Value& a, const Value& b, const VariableDecl& var) {
        return v_compare(v_abs(v_sub(a, b)), var.unit_step) <= 0;
    }

    // --- per-variable descent --------------------------------------------------

    struct PhaseResult {
        enum class Kind { LocalMin, Flip, Budget };
        Kind kind = Kind::LocalMin;
        bool any_success = false;
        BoundaryPair pair;
    };

    static Value halve_step(const Value& step, const VariableDecl& var) {
        if (var.kind == NumKind::Integer) {
            std::int64_t unit = var.unit_step.as_integer();
            std::int64_t units = step.as_integer() / unit;
            return Value::integer((units / 2) * unit);
        }
        return Value::real(step.as_real() / 2.0);
    }

    static Value double_step(const Value& step, const VariableDecl& var) {
        if (var.kind == NumKind::Integer) {
            std::int64_t next;
            if (__builtin_mul_overflow(step.as_integer(), std::int64_t{2}, &next)) return step;
            return Value::integer(next);
        }
        double next = step.as_real() * 2.0;
        if (!std::isfinite(next)) return step;
        return Value::real(next);
    }

    PhaseResult run_phase(const VariableDecl& var) {
        PhaseResult result;
        last_accepted_f_.reset();  // monotone-descent instrumentation is per phase
        Value floor = floor_for(var);

        while (true) {
            // Exploratory: find a direction that strictly improves F, probing
            // below the unit step only for real variables.
            int dir = 0;
            Value step = var.unit_step;
            while (dir == 0) {
                for (int d : {+1, -1}) {
                    MoveResult mv = try_move(var, d, step);
                    if (mv.kind == MoveResult::Kind::Flip) {
                        result.kind = PhaseResult::Kind::Flip;
                        result.pair = std::move(mv.pair);
                        return result;
                    }
                    if (mv.kind == MoveResult::Kind::Budget) {
                        result.kind = PhaseResult::Kind::Budget;
                        return result;
                    }
                    if (mv.kind == MoveResult::Kind::Accept) {
                        dir = d;
                        result.any_success = true;
                        break;
                    }
                }
                if (dir != 0) break;
                if (var.kind == NumKind::Integer) return result;  // LocalMin
                step = halve_step(step, var);
                if (v_compare(step, floor) < 0) return result;  // LocalMin
            }

            // Pattern: keep moving in dir, doubling the step each success.
            Value pstep = step;
            while (true) {
                pstep = double_step(pstep, var);
                MoveResult mv = try_move(var, dir, pstep);
                if (mv.kind == MoveResult::Kind::Flip) {
                    result.kind = PhaseResult::Kind::Flip;
                    result.pair = std::move(mv.pair);
                    return result;
                }
                if (mv.kind == MoveResult::Kind::Budget) {
                    result.kind = PhaseResult::Kind::Budget;
                    return result;
                }
                if (mv.kind == MoveResult::Kind::Fail) break;
            }

            // Refinement: the last move overshot; halve the step back toward
            // the current point until the floor.
            Value rstep = halve_step(pstep, var);
            while (v_compare(rstep, floor) >= 0 && v_compare(rstep, Value::integer(0)) > 0) {
                MoveResult mv = try_move(var, dir, rstep);
                if (mv.kind == MoveResult::Kind::Flip) {
                    result.kind = PhaseResult::Kind::Flip;
                    result.pair = std::move(mv.pair);
                    return result;
                }
                if (mv.kind == MoveResult::Kind::Budget) {
                    result.kind = PhaseResult::Kind::Budget;
                    return result;
                }
                rstep = halve_step(rstep, var);
            }
            // Bottomed out; loop back to the exploratory stage. When it finds
            // nothing further, this variable is at a positive local minimum.
        }
    }

    std::optional<ViolationHotspot> top_violation() const {
        std::optional<ViolationHotspot> best;
        for (const auto& [step, hits] : violation_hits_) {
            if (!best || hits > best->hits) {
                ViolationHotspot h;
                h.step_index = step;
                h.hits = hits;
                h.transition_id = step < target_.prefix.size()
                                      ? target_.prefix[step].transition_id
                                      : target_.target_transition;
                best = h;
            }
        }
        return best;
    }

    const StateMachine& machine_;
    const PredicateTarget& target_;
    const SearchConfig& config_;
    std::uint64_t target_index_;

    SearchStats stats_;
    std::map<std::size_t, std::uint64_t> violation_hits_;
    std::optional<double> best_f_;

    Orientation orientation_ = Orientation::LhsMinusRhs;
    bool sought_ = true;
    Env env_;
    Value f_cur_;
    std::optional<Value> last_accepted_f_;
};

}  // namespace

Value PredicateFunction::eval(const Env& env_at_target) const {
    Value lhs = guardlang::eval_arith(target->guard.lhs, env_at_target);
    Value rhs = guardlang::eval_arith(target->guard.rhs, env_at_target);
    Value diff = v_sub(lhs, rhs);
    switch (orientation) {
        case Orientation::LhsMinusRhs: return diff;
        case Orientation::RhsMinusLhs: return v_neg(diff);
        case Orientation::AbsDiff: return v_abs(diff);
    }
    throw std::logic_error("corrupt orientation");
}

PredicateFunction build_predicate_function(const PredicateTarget& target, const Env& env0,
                                           bool sought) {
    Value lhs = guardlang::eval_arith(target.guard.lhs, env0);
    Value rhs = guardlang::eval_arith(target.guard.rhs, env0);
    int cmp = v_compare(lhs, rhs);
    if (guardlang::relop_holds(target.guard.op, cmp) == sought)
        throw std::invalid_argument(
            "predicate function is undefined when the outcome already matches");
    PredicateFunction f;
    f.target = &target;
    f.sought_outcome = sought;
    f.orientation = choose_orientation(target.guard.op, sought);
    return f;
}

SearchResult alternating_variable_search(const StateMachine& machine,
                                         const PredicateTarget& target,
                                         const SearchConfig& config,
                                         std::uint64_t target_index) {
    return Searcher(machine, target, config, target_index).run();
}

}  // namespace tcgen::datagen
