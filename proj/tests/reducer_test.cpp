#include <doctest.h>

#include <algorithm>
#include <random>

#include "support/model_gen.hpp"
#include "tcgen/reducer.hpp"

using namespace tcgen::reducer;
using tcgen::guardlang::Value;
using tcgen::statemodel::StateMachine;
using tcgen::statemodel::load_model;
using tcgen::suite::TestCase;
using tcgen::suite::TestSuite;

namespace {

const char* kThreeTransitions = R"({"name":"m","states":["A","B","C","D"],"initial":"A",
  "variables":[{"name":"x","kind":"integer","domain":[0,100],"unit_step":1}],
  "transitions":[{"id":"t1","source":"A","target":"B","guard":"x > 10"},
                 {"id":"t2","source":"B","target":"C","guard":"x > 20"},
                 {"id":"t3","source":"C","target":"D","guard":"x > 30"}]})";

TestCase make_case(std::string id, std::set<std::string> transitions, std::string pred,
                   bool outcome, std::int64_t x) {
    TestCase c;
    c.id = std::move(id);
    c.footprint.transitions = std::move(transitions);
    c.footprint.predicate = {std::move(pred), outcome};
    c.i_out["x"] = Value::integer(x);
    c.i_in["x"] = Value::integer(x + 1);
    c.f_in = Value::integer(1);
    c.f_out = Value::integer(0);
    return c;
}

TestSuite suite_of(std::vector<TestCase> cases) {
    TestSuite s;
    s.model_digest = "fnv1a64:test";
    s.cases = std::move(cases);
    return s;
}

}  // namespace

TEST_CASE("featurize normalizes inputs and orders coverage bits by declaration") {
    StateMachine m = load_model(kThreeTransitions);
    TestCase c = make_case("c0001", {"t1"}, "t1", true, 10);
    auto fv = featurize(c, m);
    CHECK(fv.coverage_bits == std::vector<bool>{true, false, false});
    REQUIRE(fv.inputs.size() == 1);
    CHECK(fv.inputs[0] == doctest::Approx(0.1).epsilon(1e-12));

    SUBCASE("identical cases produce identical vectors") {
        TestCase d = c;
        d.id = "c0002";
        auto fw = featurize(d, m);
        CHECK(fw.coverage_bits == fv.coverage_bits);
        CHECK(fw.inputs == fv.inputs);
    }
    SUBCASE("domain maximum maps to 1.0") {
        c.i_out["x"] = Value::integer(100);
        CHECK(featurize(c, m).inputs[0] == 1.0);
    }
}

TEST_CASE("distance combines Jaccard and scaled Euclidean terms") {
    StateMachine m = load_model(kThreeTransitions);
    TestCase a = make_case("a", {"t1"}, "t1", true, 50);
    TestCase b = make_case("b", {"t2"}, "t2", true, 50);
    auto fa = featurize(a, m), fb = featurize(b, m);

    SUBCASE("identity") { CHECK(distance(fa, fa) == 0.0); }
    SUBCASE("disjoint coverage bits with equal inputs score w * 1") {
        CHECK(distance(fa, fb, 0.7) == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(distance(fa, fb, 0.4) == doctest::Approx(0.4).epsilon(1e-12));
    }
    SUBCASE("symmetry and bounds on random pairs") {
        std::mt19937_64 rng(21);
        for (int i = 0; i < 100; ++i) {
            TestCase x = make_case("x", {}, "t1", true,
                                   static_cast<std::int64_t>(rng() % 101));
            TestCase y = make_case("y", {}, "t2", false,
                                   static_cast<std::int64_t>(rng() % 101));
            if (rng() % 2) x.footprint.transitions.insert("t1");
            if (rng() % 2) x.footprint.transitions.insert("t2");
            if (rng() % 2) y.footprint.transitions.insert("t2");
            if (rng() % 2) y.footprint.transitions.insert("t3");
            auto fx = featurize(x, m), fy = featurize(y, m);
            double d1 = distance(fx, fy), d2 = distance(fy, fx);
            CHECK(d1 == d2);
            CHECK(d1 >= 0.0);
            CHECK(d1 <= 1.0);
        }
    }
    SUBCASE("triangle inequality on random triples") {
        std::mt19937_64 rng(22);
        for (int i = 0; i < 200; ++i) {
            auto rand_case = [&](std::string id) {
                TestCase c = make_case(std::move(id), {}, "t1", true,
                                       static_cast<std::int64_t>(rng() % 101));
                for (const char* t : {"t1", "t2", "t3"})
                    if (rng() % 2) c.footprint.transitions.insert(t);
                return c;
            };
            auto fa2 = featurize(rand_case("a"), m);
            auto fb2 = featurize(rand_case("b"), m);
            auto fc2 = featurize(rand_case("c"), m);
            CHECK(distance(fa2, fc2) <= distance(fa2, fb2) + distance(fb2, fc2) + 1e-12);
        }
    }
    SUBCASE("dimensionality mismatch is an error") {
        FeatureVector bad;
        bad.coverage_bits = {true};
        bad.inputs = {0.5};
        CHECK_THROWS_AS(distance(fa, bad), std::invalid_argument);
    }
}

TEST_CASE("cluster handles the degenerate sizes") {
    StateMachine m = load_model(kThreeTransitions);

    SUBCASE("n=1, k=1: the case is its own medoid") {
        auto s = suite_of({make_case("c0001", {"t1"}, "t1", true, 10)});
        auto c = cluster(s, m, std::size_t{1});
        CHECK(c.k == 1);
        CHECK(c.medoids == std::vector<std::string>{"c0001"});
        CHECK(c.assignment.at("c0001") == 0);
        CHECK(c.total_distance == 0.0);
    }
    SUBCASE("k=n: every case a medoid, zero total distance") {
        auto s = suite_of({make_case("c0001", {"t1"}, "t1", true, 10),
                           make_case("c0002", {"t2"}, "t2", true, 50),
                           make_case("c0003", {"t3"}, "t3", true, 90)});
        auto c = cluster(s, m, std::size_t{3});
        CHECK(c.medoids.size() == 3);
        CHECK(c.total_distance == 0.0);
    }
    SUBCASE("k greater than n is rejected") {
        auto s = suite_of({make_case("c0001", {"t1"}, "t1", true, 10)});
        CHECK_THROWS_AS(cluster(s, m, std::size_t{2}), std::invalid_argument);
    }
}

TEST_CASE("two identical pairs separate into two clusters") {
    StateMachine m = load_model(kThreeTransitions);
    auto s = suite_of({make_case("c0001", {"t1"}, "t1", true, 10),
                       make_case("c0002", {"t1"}, "t1", true, 10),
                       make_case("c0003", {"t2"}, "t2", true, 90),
                       make_case("c0004", {"t2"}, "t2", true, 90)});
    auto c = cluster(s, m, std::size_t{2});
    CHECK(c.total_distance == 0.0);
    CHECK(c.assignment.at("c0001") == c.assignment.at("c0002"));
    CHECK(c.assignment.at("c0003") == c.assignment.at("c0004"));
    CHECK(c.assignment.at("c0001") != c.assignment.at("c0003"));

    // Brute-force oracle: try every 2-partition; none beats total distance 0
    // with medoids chosen per cluster.
    const auto& cases = s.cases;
    double best = 1e9;
    for (int mask = 1; mask < 15; ++mask) {  // nonempty proper subsets of 4
        double cost = 0.0;
        for (int side = 0; side < 2; ++side) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < 4; ++i)
                if (((mask >> i) & 1) == side) members.push_back(i);
            if (members.empty()) { cost = 1e9; break; }
            double side_best = 1e9;
            for (std::size_t medoid : members) {
                double c2 = 0.0;
                for (std::size_t i : members)
                    c2 += distance(featurize(cases[medoid], m), featurize(cases[i], m));
                side_best = std::min(side_best, c2);
            }
            cost += side_best;
        }
        best = std::min(best, cost);
    }
    CHECK(c.total_distance == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("reduce collapses duplicated suites to half size") {
    StateMachine m = load_model(kThreeTransitions);
    // 6 cases: 3 distinct footprints, each duplicated once.
    auto s = suite_of({make_case("c0001", {"t1"}, "t1", true, 10),
                       make_case("c0002", {"t1"}, "t1", true, 10),
                       make_case("c0003", {"t2"}, "t2", true, 50),
                       make_case("c0004", {"t2"}, "t2", true, 50),
                       make_case("c0005", {"t3"}, "t3", false, 90),
                       make_case("c0006", {"t3"}, "t3", false, 90)});
    ReduceOptions opt;
    opt.k = std::size_t{3};
    auto r = reduce(s, m, opt);
    CHECK(r.reduced.cases.size() == 3);
    CHECK(tcgen::suite::covered_pairs(r.reduced) == tcgen::suite::covered_pairs(s));

    // Brute force on the 6-case instance: 3 locations, so zero-cost
    // clusterings keep exactly one case per location.
    std::set<std::set<std::string>> footprint_sets;
    for (const auto& c : r.reduced.cases) footprint_sets.insert(c.footprint.transitions);
    CHECK(footprint_sets.size() == 3);
}

TEST_CASE("reduce keeps everything when every case covers a distinct pair") {
    StateMachine m = load_model(kThreeTransitions);
    auto s = suite_of({make_case("c0001", {"t1"}, "t1", true, 10),
                       make_case("c0002", {"t1"}, "t1", false, 30),
                       make_case("c0003", {"t2"}, "t2", true, 50),
                       make_case("c0004", {"t3"}, "t3", true, 90)});
    ReduceOptions opt;
    opt.k = std::size_t{2};
    auto r = reduce(s, m, opt);
    CHECK(r.reduced.cases.size() == 4);  // repair restores all dropped pairs
    CHECK(tcgen::suite::covered_pairs(r.reduced) == tcgen::suite::covered_pairs(s));
    CHECK(r.dropped_pairs.size() == 2);

    SUBCASE("without repair the loss is reported instead") {
        opt.repair = false;
        auto r2 = reduce(s, m, opt);
        CHECK(r2.reduced.cases.size() == 2);
        CHECK(r2.dropped_pairs.size() == 2);
    }
}

TEST_CASE("singleton suites reduce to themselves") {
    StateMachine m = load_model(kThreeTransitions);
    auto s = suite_of({make_case("c0001", {"t1"}, "t1", true, 10)});
    auto r = reduce(s, m, {});
    REQUIRE(r.reduced.cases.size() == 1);
    CHECK(r.reduced.cases[0].id == "c0001");
}

TEST_CASE("property: reduction preserves coverage and never grows, any order") {
    std::mt19937_64 rng(31);
    for (std::uint64_t seed = 400; seed < 412; ++seed) {
        StateMachine m = oracle::ModelGen(seed).generate();
        tcgen::suite::GenerationConfig cfg;
        cfg.seed = seed;
        cfg.max_evaluations = 2000;
        auto gen = tcgen::suite::generate_suite(m, "fnv1a64:prop", cfg);
        if (gen.suite.cases.empty()) continue;

        for (const auto& k :
             std::vector<KChoice>{AutoK{}, std::size_t{1},
                                  std::min<std::size_t>(3, gen.suite.cases.size())}) {
            ReduceOptions opt;
            opt.k = k;
            auto r = reduce(gen.suite, m, opt);
            CAPTURE(seed);
            CHECK(r.reduced.cases.size() <= gen.suite.cases.size());
            CHECK(tcgen::suite::covered_pairs(r.reduced) ==
                  tcgen::suite::covered_pairs(gen.suite));
            // Subset: every kept case exists verbatim in the original.
            for (const auto& c : r.reduced.cases) {
                bool found = false;
                for (const auto& o : gen.suite.cases)
                    if (o.id == c.id) found = true;
                CHECK(found);
            }

            // Order insensitivity: shuffle the case list, ids unchanged.
            auto shuffled = gen.suite;
            std::shuffle(shuffled.cases.begin(), shuffled.cases.end(), rng);
            auto r2 = reduce(shuffled, m, opt);
            CHECK(tcgen::suite::to_json(r2.reduced) == tcgen::suite::to_json(r.reduced));
        }
    }
}
