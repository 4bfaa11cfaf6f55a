#include "tcgen/suite.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace tcgen::suite {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

TestCase make_case(const StateMachine& machine, const pathfinder::PredicateTarget& target,
                   const datagen::BoundaryPair& pair, std::size_t case_number) {
    TestCase c;
    {
        std::ostringstream id;
        id << 'c' << std::setw(4) << std::setfill('0') << case_number;
        c.id = id.str();
    }
    c.path = target.path;
    c.target = {target.target_transition, target.guard_source, target.desired_outcome};
    c.i_in = pair.i_in;
    c.i_out = pair.i_out;
    c.f_in = pair.f_in;
    c.f_out = pair.f_out;
    c.evaluations_used = pair.evaluations_used;
    c.expected_end_state = pathfinder::expected_end_state(machine, target);
    for (const auto& step : target.prefix) c.footprint.transitions.insert(step.transition_id);
    if (target.desired_outcome) c.footprint.transitions.insert(target.target_transition);
    c.footprint.predicate = {target.target_transition, target.desired_outcome};
    return c;
}

GenerationResult generate_suite(const StateMachine& machine, const std::string& model_digest,
                                const GenerationConfig& config) {
    GenerationResult result;
    result.suite.model_digest = model_digest;
    result.suite.config = config;

    pathfinder::TraversalOptions opts;
    opts.max_depth = config.max_depth;
    opts.strategy = config.strategy;
    auto enumeration = pathfinder::enumerate_targets(machine, opts);
    result.skipped = enumeration.skipped;

    datagen::SearchConfig search;
    search.seed = config.seed;
    search.max_evaluations = config.max_evaluations;

    std::size_t case_number = 0;
    for (std::size_t i = 0; i < enumeration.targets.size(); ++i) {
        const auto& target = enumeration.targets[i];
        auto outcome = datagen::alternating_variable_search(machine, target, search, i);
        result.stats.evaluations += outcome.stats.evaluations;
        result.stats.restarts += outcome.stats.restarts;
        result.stats.monotone_violations += outcome.stats.monotone_violations;
        if (outcome.pair) {
            result.suite.cases.push_back(make_case(machine, target, *outcome.pair, ++case_number));
        } else {
            result.suite.failed_targets.push_back(std::move(*outcome.failure));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace {

ordered_json value_json(const Value& v) {
    if (v.is_integer()) return v.as_integer();
    return v.as_real();
}

Value value_from_json(const ordered_json& j, const std::string& where) {
    if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
    if (j.is_number_float()) return Value::real(j.get<double>());
    throw SuiteFormatError("suite: expected a number at " + where);
}

ordered_json env_json(const Env& env) {
    ordered_json j = ordered_json::object();
    for (const auto& [name, value] : env) j[name] = value_json(value);
    return j;
}

Env env_from_json(const ordered_json& j, const std::string& where) {
    if (!j.is_object()) throw SuiteFormatError("suite: expected an object at " + where);
    Env env;
    for (const auto& [name, value] : j.items())
        env[name] = value_from_json(value, where + "." + name);
    return env;
}

const ordered_json& require(const ordered_json& j, const std::string& key,
                            const std::string& where) {
    if (!j.contains(key))
        throw SuiteFormatError("suite: missing key '" + key + "' at " + where);
    return j[key];
}

}  // namespace

std::string to_json(const TestSuite& suite) {
    ordered_json j;
    j["format_version"] = suite.format_version;
    j["model_digest"] = suite.model_digest;
    {
        ordered_json cfg;
        cfg["seed"] = suite.config.seed;
        cfg["max_depth"] = suite.config.max_depth;
        cfg["max_evaluations"] = suite.config.max_evaluations;
        cfg["strategy"] =
            suite.config.strategy == pathfinder::TraversalStrategy::DepthFirst ? "dfs" : "bfs";
        j["config"] = std::move(cfg);
    }
    j["cases"] = ordered_json::array();
    for (const auto& c : suite.cases) {
        ordered_json cj;
        cj["id"] = c.id;
        cj["path"] = c.path;
        cj["target"] = {{"transition", c.target.transition_id},
                        {"guard", c.target.guard_source},
                        {"outcome", c.target.desired_outcome}};
        cj["i_in"] = env_json(c.i_in);
        cj["i_out"] = env_json(c.i_out);
        cj["f_in"] = value_json(c.f_in);
        cj["f_out"] = value_json(c.f_out);
        cj["evaluations"] = c.evaluations_used;
        cj["expected_end_state"] = c.expected_end_state;
        ordered_json fp;
        fp["transitions"] =
            std::vector<std::string>(c.footprint.transitions.begin(), c.footprint.transitions.end());
        fp["predicate"] = ordered_json::array({c.footprint.predicate.first,
                                               c.footprint.predicate.second});
        cj["footprint"] = std::move(fp);
        j["cases"].push_back(std::move(cj));
    }
    j["failed_targets"] = ordered_json::array();
    for (const auto& f : suite.failed_targets) {
        ordered_json fj;
        fj["transition"] = f.target_transition;
        fj["outcome"] = f.desired_outcome;
        if (f.best_f) fj["best_f"] = *f.best_f;
        fj["evaluations"] = f.evaluations_used;
        fj["restarts"] = f.restarts;
        if (f.top_violation) {
            fj["top_violation"] = {{"step", f.top_violation->step_index},
                                   {"transition", f.top_violation->transition_id},
                                   {"hits", f.top_violation->hits}};
        }
        fj["reason"] = f.reason;
        j["failed_targets"].push_back(std::move(fj));
    }
    return j.dump(2) + "\n";
}

TestSuite from_json(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SuiteFormatError(std::string("suite: ") + e.what());
    }
    if (!j.is_object()) throw SuiteFormatError("suite: expected a JSON object");

    TestSuite s;
    const auto& ver = require(j, "format_version", "$");
    if (!ver.is_number_integer())
        throw SuiteFormatError("suite: format_version must be an integer");
    s.format_version = ver.get<int>();
    if (s.format_version != kFormatVersion)
        throw SuiteFormatError("suite: unsupported format_version " +
                               std::to_string(s.format_version) + " (expected " +
                               std::to_string(kFormatVersion) + ")");

    s.model_digest = require(j, "model_digest", "$").get<std::string>();
    const auto& cfg = require(j, "config", "$");
    s.config.seed = require(cfg, "seed", "$.config").get<std::uint64_t>();
    s.config.max_depth = require(cfg, "max_depth", "$.config").get<std::size_t>();
    s.config.max_evaluations =
        require(cfg, "max_evaluations", "$.config").get<std::uint32_t>();
    std::string strategy = require(cfg, "strategy", "$.config").get<std::string>();
    if (strategy == "dfs")
        s.config.strategy = pathfinder::TraversalStrategy::DepthFirst;
    else if (strategy == "bfs")
        s.config.strategy = pathfinder::TraversalStrategy::BreadthFirst;
    else
        throw SuiteFormatError("suite: unknown strategy '" + strategy + "'");

    for (const auto& cj : require(j, "cases", "$")) {
        TestCase c;
        c.id = require(cj, "id", "case").get<std::string>();
        c.path = require(cj, "path", c.id).get<std::vector<std::string>>();
        const auto& t = require(cj, "target", c.id);
        c.target.transition_id = require(t, "transition", c.id).get<std::string>();
        c.target.guard_source = require(t, "guard", c.id).get<std::string>();
        c.target.desired_outcome = require(t, "outcome", c.id).get<bool>();
        c.i_in = env_from_json(require(cj, "i_in", c.id), c.id + ".i_in");
        c.i_out = env_from_json(require(cj, "i_out", c.id), c.id + ".i_out");
        c.f_in = value_from_json(require(cj, "f_in", c.id), c.id + ".f_in");
        c.f_out = value_from_json(require(cj, "f_out", c.id), c.id + ".f_out");
        c.evaluations_used = require(cj, "evaluations", c.id).get<std::uint32_t>();
        c.expected_end_state = require(cj, "expected_end_state", c.id).get<std::string>();
        const auto& fp = require(cj, "footprint", c.id);
        for (const auto& tr : require(fp, "transitions", c.id))
            c.footprint.transitions.insert(tr.get<std::string>());
        const auto& pred = require(fp, "predicate", c.id);
        if (!pred.is_array() || pred.size() != 2)
            throw SuiteFormatError("suite: malformed predicate footprint in " + c.id);
        c.footprint.predicate = {pred[0].get<std::string>(), pred[1].get<bool>()};
        s.cases.push_back(std::move(c));
    }

    for (const auto& fj : require(j, "failed_targets", "$")) {
        datagen::FailureReport f;
        f.target_transition = require(fj, "transition", "failed_targets").get<std::string>();
        f.desired_outcome = require(fj, "outcome", "failed_targets").get<bool>();
        if (fj.contains("best_f")) f.best_f = fj["best_f"].get<double>();
        f.evaluations_used = require(fj, "evaluations", "failed_targets").get<std::uint32_t>();
        f.restarts = require(fj, "restarts", "failed_targets").get<std::uint32_t>();
        if (fj.contains("top_violation")) {
            datagen::ViolationHotspot h;
            h.step_index = fj["top_violation"]["step"].get<std::size_t>();
            h.transition_id = fj["top_violation"]["transition"].get<std::string>();
            h.hits = fj["top_violation"]["hits"].get<std::uint64_t>();
            f.top_violation = std::move(h);
        }
        f.reason = require(fj, "reason", "failed_targets").get<std::string>();
        s.failed_targets.push_back(std::move(f));
    }
    return s;
}

void write_suite(const TestSuite& suite, const std::string& path) {
    namespace fs = std::filesystem;
    std::string text = to_json(suite);
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

TestSuite read_suite(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open suite file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

// ---------------------------------------------------------------------------
// Coverage
// ---------------------------------------------------------------------------

std::set<std::pair<std::string, bool>> covered_pairs(const TestSuite& suite) {
    std::set<std::pair<std::string, bool>> pairs;
    for (const auto& c : suite.cases) pairs.insert(c.footprint.predicate);
    return pairs;
}

CoverageReport coverage(const TestSuite& suite, const StateMachine& machine,
                        const std::string& model_digest) {
    if (suite.model_digest != model_digest)
        throw DigestMismatch("suite digest " + suite.model_digest +
                             " does not match model digest " + model_digest);

    CoverageReport r;
    std::set<std::string> guarded;
    for (const auto& t : machine.transitions)
        if (t.guard) guarded.insert(t.id);
    r.guarded_total = guarded.size();
    r.pairs_total = guarded.size() * 2;

    auto pairs = covered_pairs(suite);
    r.pairs_covered = pairs.size();
    std::set<std::string> covered_transitions;
    for (const auto& [id, _] : pairs) covered_transitions.insert(id);
    r.guarded_covered = covered_transitions.size();

    pathfinder::TraversalOptions opts;
    opts.max_depth = suite.config.max_depth;
    opts.strategy = suite.config.strategy;
    r.skipped = pathfinder::enumerate_targets(machine, opts).skipped;

    for (const auto& f : suite.failed_targets)
        r.failed.emplace_back(f.target_transition, f.desired_outcome);
    return r;
}

std::string format_coverage_text(const CoverageReport& r) {
    std::ostringstream os;
    os << "guarded transitions    " << r.guarded_covered << " / " << r.guarded_total << "\n";
    os << "predicate outcomes     " << r.pairs_covered << " / " << r.pairs_total << "\n";
    os << "skipped (unreachable)  " << r.skipped.size();
    for (const auto& id : r.skipped) os << " " << id;
    os << "\n";
    os << "failed targets         " << r.failed.size();
    for (const auto& [id, outcome] : r.failed)
        os << " " << id << ":" << (outcome ? "true" : "false");
    os << "\n";
    return os.str();
}

std::string format_coverage_json(const CoverageReport& r) {
    ordered_json j;
    j["guarded_transitions"] = {{"covered", r.guarded_covered}, {"total", r.guarded_total}};
    j["predicate_outcomes"] = {{"covered", r.pairs_covered}, {"total", r.pairs_total}};
    j["skipped"] = r.skipped;
    j["failed"] = ordered_json::array();
    for (const auto& [id, outcome] : r.failed)
        j["failed"].push_back(ordered_json::array({id, outcome}));
    return j.dump(2) + "\n";
}

}  // namespace tcgen::suite
