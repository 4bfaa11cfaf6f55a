#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "support/model_gen.hpp"
#include "support/naive_interp.hpp"
#include "tcgen/suite.hpp"

using namespace tcgen::suite;
using tcgen::guardlang::Value;
using tcgen::statemodel::StateMachine;
using tcgen::statemodel::content_digest;
using tcgen::statemodel::load_model;

namespace {

const char* kTwoState = R"({"name":"m","states":["A","B"],"initial":"A",
  "variables":[{"name":"x","kind":"integer","domain":[0,100],"unit_step":1}],
  "transitions":[{"id":"t1","source":"A","target":"B","guard":"x > 10"}]})";

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("tcgen_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("generate_suite packages both boundary sides per target") {
    StateMachine m = load_model(kTwoState);
    GenerationConfig cfg;
    cfg.seed = 9;
    auto result = generate_suite(m, content_digest(kTwoState), cfg);
    REQUIRE(result.suite.cases.size() == 2);
    CHECK(result.suite.failed_targets.empty());
    CHECK(result.skipped.empty());

    const auto& c_true = result.suite.cases[0];
    CHECK(c_true.id == "c0001");
    CHECK(c_true.target.desired_outcome == true);
    CHECK(c_true.i_out.at("x").as_integer() == 11);
    CHECK(c_true.i_in.at("x").as_integer() == 10);
    CHECK(c_true.expected_end_state == "B");
    CHECK(c_true.footprint.transitions == std::set<std::string>{"t1"});
    CHECK(c_true.footprint.predicate == std::pair<std::string, bool>{"t1", true});

    const auto& c_false = result.suite.cases[1];
    CHECK(c_false.id == "c0002");
    CHECK(c_false.i_out.at("x").as_integer() == 10);
    CHECK(c_false.expected_end_state == "A");   // failing the guard stays put
    CHECK(c_false.footprint.transitions.empty());  // nothing is traversed
}

TEST_CASE("unguarded machines produce an empty suite") {
    StateMachine m = load_model(R"({"name":"m","states":["A","B"],"initial":"A",
        "transitions":[{"id":"t1","source":"A","target":"B"}]})");
    auto result = generate_suite(m, "fnv1a64:0", {});
    CHECK(result.suite.cases.empty());
    CHECK(result.suite.failed_targets.empty());
}

TEST_CASE("replay oracle: every case's inputs drive the recorded outcomes") {
    for (std::uint64_t seed = 300; seed < 312; ++seed) {
        StateMachine m = oracle::ModelGen(seed).generate();
        GenerationConfig cfg;
        cfg.seed = seed;
        cfg.max_evaluations = 3000;
        auto result = generate_suite(m, "fnv1a64:x", cfg);
        auto targets = tcgen::pathfinder::enumerate_targets(m).targets;
        REQUIRE(result.suite.cases.size() + result.suite.failed_targets.size() ==
                targets.size());
        std::size_t target_index = 0;
        for (const auto& c : result.suite.cases) {
            while (targets[target_index].target_transition != c.target.transition_id ||
                   targets[target_index].desired_outcome != c.target.desired_outcome)
                ++target_index;
            const auto& target = targets[target_index];

            auto out_outcome = oracle::naive_outcome(target, c.i_out);
            REQUIRE(out_outcome.has_value());
            CHECK(*out_outcome == c.target.desired_outcome);
            auto in_outcome = oracle::naive_outcome(target, c.i_in);
            REQUIRE(in_outcome.has_value());
            CHECK(*in_outcome != c.target.desired_outcome);

            // Re-check feasibility through the production replay too.
            auto replay = tcgen::pathfinder::replay_prefix(m, target, c.i_out);
            CHECK_FALSE(replay.violation.has_value());

            const auto* tr = m.find_transition(c.target.transition_id);
            CHECK(c.expected_end_state ==
                  (c.target.desired_outcome ? tr->target : tr->source));
        }
    }
}

TEST_CASE("suite file round trip is lossless and byte-stable") {
    StateMachine m = load_model(kTwoState);
    GenerationConfig cfg;
    cfg.seed = 4;
    auto result = generate_suite(m, content_digest(kTwoState), cfg);

    TempDir dir;
    auto path = dir.file("suite.json");
    write_suite(result.suite, path);
    std::string bytes = slurp(path);

    TestSuite back = read_suite(path);
    CHECK(back.model_digest == result.suite.model_digest);
    CHECK(back.config.seed == 4);
    REQUIRE(back.cases.size() == result.suite.cases.size());
    CHECK(back.cases[0].id == result.suite.cases[0].id);
    CHECK(tcgen::guardlang::v_equal(back.cases[0].i_in.at("x"),
                                    result.suite.cases[0].i_in.at("x")));

    auto path2 = dir.file("suite2.json");
    write_suite(back, path2);
    CHECK(slurp(path2) == bytes);  // write . read . write is byte-identical
}

TEST_CASE("same seed regenerates identical file bytes") {
    StateMachine m = load_model(kTwoState);
    TempDir dir;
    GenerationConfig cfg;
    cfg.seed = 123;
    auto a = generate_suite(m, content_digest(kTwoState), cfg);
    auto b = generate_suite(m, content_digest(kTwoState), cfg);
    write_suite(a.suite, dir.file("a.json"));
    write_suite(b.suite, dir.file("b.json"));
    CHECK(slurp(dir.file("a.json")) == slurp(dir.file("b.json")));
}

TEST_CASE("unknown format versions are rejected with the version named") {
    StateMachine m = load_model(kTwoState);
    auto result = generate_suite(m, content_digest(kTwoState), {});
    std::string text = to_json(result.suite);
    auto pos = text.find("\"format_version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("\"format_version\": 1").size(), "\"format_version\": 99");
    try {
        from_json(text);
        FAIL("expected SuiteFormatError");
    } catch (const SuiteFormatError& e) {
        CHECK(std::string(e.what()).find("99") != std::string::npos);
    }
}

TEST_CASE("coverage counts the two-state example as fully covered") {
    StateMachine m = load_model(kTwoState);
    std::string digest = content_digest(kTwoState);
    auto result = generate_suite(m, digest, {});
    auto report = coverage(result.suite, m, digest);
    CHECK(report.guarded_total == 1);
    CHECK(report.guarded_covered == 1);
    CHECK(report.pairs_total == 2);
    CHECK(report.pairs_covered == 2);
    CHECK(report.skipped.empty());
    CHECK(report.failed.empty());
}

TEST_CASE("coverage of an empty suite reports machine totals") {
    StateMachine m = load_model(kTwoState);
    std::string digest = content_digest(kTwoState);
    TestSuite empty;
    empty.model_digest = digest;
    auto report = coverage(empty, m, digest);
    CHECK(report.guarded_total == 1);
    CHECK(report.guarded_covered == 0);
    CHECK(report.pairs_total == 2);
    CHECK(report.pairs_covered == 0);
}

TEST_CASE("coverage lists failed targets as uncovered") {
    const char* doc = R"({"name":"m","states":["A","B","C"],"initial":"A",
      "variables":[{"name":"x","kind":"integer","domain":[0,100],"unit_step":1}],
      "transitions":[{"id":"t1","source":"A","target":"B","guard":"x < 5"},
                     {"id":"t2","source":"B","target":"C","guard":"x > 10"}]})";
    StateMachine m = load_model(doc);
    std::string digest = content_digest(doc);
    GenerationConfig cfg;
    cfg.max_evaluations = 500;
    auto result = generate_suite(m, digest, cfg);
    REQUIRE(result.suite.failed_targets.size() == 2);  // both outcomes of t2 are infeasible
    auto report = coverage(result.suite, m, digest);
    CHECK(report.guarded_total == 2);
    CHECK(report.guarded_covered == 1);
    CHECK(report.pairs_covered == 2);
    CHECK(report.failed.size() == 2);
}

TEST_CASE("coverage requires a matching digest") {
    StateMachine m = load_model(kTwoState);
    auto result = generate_suite(m, "fnv1a64:1111111111111111", {});
    CHECK_THROWS_AS(coverage(result.suite, m, "fnv1a64:2222222222222222"), DigestMismatch);
}
