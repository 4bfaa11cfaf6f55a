#include <doctest.h>

#include "support/model_gen.hpp"
#include "support/naive_interp.hpp"
#include "tcgen/datagen.hpp"
#include "tcgen/pathfinder.hpp"

using namespace tcgen::datagen;
using tcgen::guardlang::Env;
using tcgen::guardlang::Value;
using tcgen::pathfinder::enumerate_targets;
using tcgen::statemodel::StateMachine;
using tcgen::statemodel::load_model;

namespace {

const char* kTwoState = R"({"name":"m","states":["A","B"],"initial":"A",
  "variables":[{"name":"x","kind":"integer","domain":[0,100],"unit_step":1}],
  "transitions":[{"id":"t1","source":"A","target":"B","guard":"x > 10"}]})";

const tcgen::pathfinder::PredicateTarget& target_for(
    const std::vector<tcgen::pathfinder::PredicateTarget>& targets, const std::string& id,
    bool outcome) {
    for (const auto& t : targets)
        if (t.target_transition == id && t.desired_outcome == outcome) return t;
    throw std::logic_error("no such target");
}

}  // namespace

TEST_CASE("predicate function orientation follows the positive side") {
    StateMachine m = load_model(kTwoState);
    auto targets = enumerate_targets(m).targets;

    SUBCASE("x > 10 at x=15, seeking false: F = lhs - rhs = 5") {
        const auto& t = target_for(targets, "t1", false);
        auto f = build_predicate_function(t, {{"x", Value::integer(15)}}, false);
        CHECK(f.orientation == Orientation::LhsMinusRhs);
        CHECK(f.eval({{"x", Value::integer(15)}}).as_integer() == 5);
    }
    SUBCASE("x > 10 at x=3, seeking true: F = rhs - lhs = 7") {
        const auto& t = target_for(targets, "t1", true);
        auto f = build_predicate_function(t, {{"x", Value::integer(3)}}, true);
        CHECK(f.orientation == Orientation::RhsMinusLhs);
        CHECK(f.eval({{"x", Value::integer(3)}}).as_integer() == 7);
    }
    SUBCASE("outcome already matching is a precondition violation") {
        const auto& t = target_for(targets, "t1", true);
        CHECK_THROWS_AS(build_predicate_function(t, {{"x", Value::integer(15)}}, true),
                        std::invalid_argument);
    }
}

TEST_CASE("equality guards use the absolute difference") {
    StateMachine m = load_model(R"({"name":"m","states":["A","B"],"initial":"A",
      "variables":[{"name":"x","kind":"integer","domain":[0,20],"unit_step":1},
                   {"name":"y","kind":"integer","domain":[0,20],"unit_step":1}],
      "transitions":[{"id":"t1","source":"A","target":"B","guard":"x == y"}]})");
    auto targets = enumerate_targets(m).targets;
    const auto& t = target_for(targets, "t1", true);
    Env env0{{"x", Value::integer(2)}, {"y", Value::integer(7)}};
    auto f = build_predicate_function(t, env0, true);
    CHECK(f.orientation == Orientation::AbsDiff);
    CHECK(f.eval(env0).as_integer() == 5);
}

TEST_CASE("worked example: the straddle of x > 10 is {11, 10} from any start") {
    StateMachine m = load_model(kTwoState);
    auto targets = enumerate_targets(m).targets;

    // Exhaustive scan oracle over x in [0,100]: the predicate flips exactly
    // between 10 (false) and 11 (true); {10, 11} is the unique tight straddle.
    {
        const auto& t = target_for(targets, "t1", true);
        int flips = 0;
        std::optional<bool> prev;
        for (int x = 0; x <= 100; ++x) {
            auto outcome = oracle::naive_outcome(t, {{"x", Value::integer(x)}});
            REQUIRE(outcome.has_value());
            if (prev && *prev != *outcome) {
                ++flips;
                CHECK(x == 11);
            }
            prev = outcome;
        }
        CHECK(flips == 1);
    }

    for (std::uint64_t seed : {0ULL, 1ULL, 7ULL, 42ULL, 99999ULL}) {
        SearchConfig cfg;
        cfg.seed = seed;
        CAPTURE(seed);

        const auto& want_false = target_for(targets, "t1", false);
        auto r = alternating_variable_search(m, want_false, cfg, 1);
        REQUIRE(r.ok());
        CHECK(r.pair->i_in.at("x").as_integer() == 11);
        CHECK(r.pair->i_out.at("x").as_integer() == 10);
        CHECK(r.pair->f_out.as_integer() == 0);  // flip lands exactly on the border

        const auto& want_true = target_for(targets, "t1", true);
        auto r2 = alternating_variable_search(m, want_true, cfg, 0);
        REQUIRE(r2.ok());
        CHECK(r2.pair->i_in.at("x").as_integer() == 10);
        CHECK(r2.pair->i_out.at("x").as_integer() == 11);
    }
}

TEST_CASE("equality search walks one variable onto the other") {
    StateMachine m = load_model(R"({"name":"m","states":["A","B"],"initial":"A",
      "variables":[{"name":"x","kind":"integer","domain":[0,20],"unit_step":1},
                   {"name":"y","kind":"integer","domain":[0,20],"unit_step":1}],
      "transitions":[{"id":"t1","source":"A","target":"B","guard":"x == y"}]})");
    auto targets = enumerate_targets(m).targets;
    const auto& t = target_for(targets, "t1", true);

    SearchConfig cfg;
    cfg.initial = Env{{"x", Value::integer(2)}, {"y", Value::integer(7)}};
    auto r = alternating_variable_search(m, t, cfg, 0);
    REQUIRE(r.ok());

    // Frozen trace of the descent from {x:2, y:7}: x climbs 3, 5, overshoots
    // at 9, flips at 7; refinement tightens the pair to {6,7} vs {7,7}.
    CHECK(r.pair->i_in.at("x").as_integer() == 6);
    CHECK(r.pair->i_in.at("y").as_integer() == 7);
    CHECK(r.pair->i_out.at("x").as_integer() == 7);
    CHECK(r.pair->i_out.at("y").as_integer() == 7);
    CHECK(r.pair->f_in.as_integer() == 1);
    CHECK(r.pair->f_out.as_integer() == 0);

    // Oracle: the pair is an adjacent straddle on the 21x21 grid.
    auto check = oracle::check_boundary_pair(m, t, r.pair->i_in, r.pair->i_out);
    CAPTURE(check.why);
    CHECK(check.ok);
}

TEST_CASE("contradictory prefixes produce a failure report, not a pair") {
    StateMachine m = load_model(R"({"name":"m","states":["A","B","C"],"initial":"A",
      "variables":[{"name":"x","kind":"integer","domain":[0,100],"unit_step":1}],
      "transitions":[{"id":"t1","source":"A","target":"B","guard":"x < 5"},
                     {"id":"t2","source":"B","target":"C","guard":"x > 10"}]})");
    auto targets = enumerate_targets(m).targets;
    const auto& t = target_for(targets, "t2", true);

    SearchConfig cfg;
    cfg.max_evaluations = 2000;
    auto r = alternating_variable_search(m, t, cfg, 0);
    REQUIRE_FALSE(r.ok());
    const auto& f = *r.failure;
    CHECK(f.target_transition == "t2");
    CHECK(f.evaluations_used <= 2000);
    CHECK(f.reason == "budget_exhausted");
    CHECK(f.restarts > 0);
    REQUIRE(f.top_violation.has_value());
    CHECK(f.top_violation->step_index == 0);
    CHECK(f.top_violation->transition_id == "t1");
}

TEST_CASE("searches are deterministic per (seed, target index)") {
    StateMachine m = oracle::ModelGen(5).generate();
    auto targets = enumerate_targets(m).targets;
    SearchConfig cfg;
    cfg.seed = 77;
    cfg.max_evaluations = 3000;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        auto a = alternating_variable_search(m, targets[i], cfg, i);
        auto b = alternating_variable_search(m, targets[i], cfg, i);
        CHECK(a.ok() == b.ok());
        CHECK(a.stats.evaluations == b.stats.evaluations);
        CHECK(a.stats.restarts == b.stats.restarts);
        if (a.ok()) {
            CHECK(tcgen::guardlang::v_equal(a.pair->i_in.at(m.variables[0].name),
                                            b.pair->i_in.at(m.variables[0].name)));
            CHECK(tcgen::guardlang::v_equal(a.pair->i_out.at(m.variables[0].name),
                                            b.pair->i_out.at(m.variables[0].name)));
        }
    }
}

TEST_CASE("property: every successful search returns an oracle-tight straddle") {
    std::size_t successes = 0;
    for (std::uint64_t seed = 200; seed < 220; ++seed) {
        StateMachine m = oracle::ModelGen(seed).generate();
        auto targets = enumerate_targets(m).targets;
        SearchConfig cfg;
        cfg.seed = seed;
        cfg.max_evaluations = 4000;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            auto r = alternating_variable_search(m, targets[i], cfg, i);
            CHECK(r.stats.monotone_violations == 0);
            CHECK(r.stats.evaluations <= cfg.max_evaluations);
            if (!r.ok()) continue;
            ++successes;
            auto check = oracle::check_boundary_pair(m, targets[i], r.pair->i_in, r.pair->i_out);
            CAPTURE(seed);
            CAPTURE(targets[i].guard_source);
            CAPTURE(targets[i].desired_outcome);
            CAPTURE(check.why);
            CHECK(check.ok);
        }
    }
    CHECK(successes > 30);  // the corpus must actually exercise the search
}

TEST_CASE("real-kind equality converges to the refinement floor") {
    StateMachine m = load_model(R"({"name":"m","states":["A","B"],"initial":"A",
      "variables":[{"name":"x","kind":"real","domain":[0.0,20.0],"unit_step":1.0},
                   {"name":"y","kind":"real","domain":[0.0,20.0],"unit_step":1.0}],
      "transitions":[{"id":"t1","source":"A","target":"B","guard":"x == y"}]})");
    auto targets = enumerate_targets(m).targets;
    const auto& t = target_for(targets, "t1", true);

    SearchConfig cfg;
    cfg.seed = 3;
    auto r = alternating_variable_search(m, t, cfg, 0);
    REQUIRE(r.ok());
    double in_x = r.pair->i_in.at("x").as_real(), in_y = r.pair->i_in.at("y").as_real();
    double out_x = r.pair->i_out.at("x").as_real(), out_y = r.pair->i_out.at("y").as_real();
    CHECK(out_x == out_y);                      // i_out satisfies the equality exactly
    CHECK(std::abs(in_x - in_y) > 0);           // i_in sits beside it
    double floor = 1.0 / (1 << 20);
    double gap = std::max(std::abs(in_x - out_x), std::abs(in_y - out_y));
    CHECK(gap > 0);
    CHECK(gap <= floor);                        // ON/OFF adjacency at the real floor
}

TEST_CASE("user-supplied initial data must be complete and in-domain") {
    StateMachine m = load_model(kTwoState);
    auto targets = enumerate_targets(m).targets;
    SearchConfig cfg;
    cfg.initial = Env{{"x", Value::integer(500)}};
    CHECK_THROWS_AS(alternating_variable_search(m, targets[0], cfg, 0), std::invalid_argument);
    cfg.initial = Env{};
    CHECK_THROWS_AS(alternating_variable_search(m, targets[0], cfg, 0), std::invalid_argument);
}

TEST_CASE("budget is always respected") {
    StateMachine m = load_model(R"({"name":"m","states":["A","B"],"initial":"A",
      "variables":[{"name":"x","kind":"integer","domain":[0,100],"unit_step":1}],
      "transitions":[{"id":"t1","source":"A","target":"B","guard":"x > 200"}]})");
    auto targets = enumerate_targets(m).targets;
    SearchConfig cfg;
    cfg.max_evaluations = 50;
    auto r = alternating_variable_search(m, targets[0], cfg, 0);  // infeasible: x <= 100 < 200
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure->evaluations_used <= 50);
    CHECK(r.stats.evaluations <= 50);
}
