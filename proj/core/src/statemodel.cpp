#include "tcgen/statemodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tcgen::statemodel {

using nlohmann::ordered_json;

const Transition* StateMachine::find_transition(std::string_view id) const {
    for (const auto& t : transitions)
        if (t.id == id) return &t;
    return nullptr;
}

const VariableDecl* StateMachine::find_variable(std::string_view name) const {
    for (const auto& v : variables)
        if (v.name == name) return &v;
    return nullptr;
}

std::vector<const Transition*> StateMachine::outgoing(std::string_view state) const {
    std::vector<const Transition*> out;
    for (const auto& t : transitions)
        if (t.source == state) out.push_back(&t);
    return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

bool is_integral_number(const Value& v) {
    if (v.is_integer()) return true;
    double d = v.as_real();
    return std::floor(d) == d;
}

void check_expr_variables(const guardlang::Expr& e, const StateMachine& m,
                          const std::string& location, std::vector<Diagnostic>& out) {
    std::set<std::string> vars;
    guardlang::collect_variables(e, vars);
    for (const auto& v : vars) {
        if (!m.find_variable(v))
            out.push_back({"UNDECLARED_VARIABLE", Severity::Error, location,
                           "reference to undeclared variable '" + v + "'"});
    }
}

}  // namespace

std::vector<Diagnostic> validate(const StateMachine& m) {
    std::vector<Diagnostic> diags;

    // State set and initial state.
    std::set<std::string> seen_states;
    for (std::size_t i = 0; i < m.states.size(); ++i) {
        if (!seen_states.insert(m.states[i]).second)
            diags.push_back({"DUPLICATE_STATE", Severity::Error, "states[" + std::to_string(i) + "]",
                             "state '" + m.states[i] + "' declared more than once"});
    }
    if (!seen_states.count(m.initial))
        diags.push_back({"UNKNOWN_INITIAL", Severity::Error, "initial",
                         "initial state '" + m.initial + "' is not declared"});

    // Variables.
    std::map<std::string, NumKind> kinds;
    std::set<std::string> seen_vars;
    for (std::size_t i = 0; i < m.variables.size(); ++i) {
        const auto& v = m.variables[i];
        std::string loc = "variables[" + std::to_string(i) + "]";
        if (!seen_vars.insert(v.name).second)
            diags.push_back({"DUPLICATE_VARIABLE", Severity::Error, loc,
                             "variable '" + v.name + "' declared more than once"});
        kinds[v.name] = v.kind;
        if (guardlang::v_compare(v.lo, v.hi) > 0)
            diags.push_back({"DOMAIN_EMPTY", Severity::Error, loc,
                             "variable '" + v.name + "' has empty domain (lo > hi)"});
        if (guardlang::v_compare(v.unit_step, Value::integer(0)) <= 0)
            diags.push_back({"UNIT_STEP_INVALID", Severity::Error, loc,
                             "variable '" + v.name + "' must have unit_step > 0"});
        if (v.kind == NumKind::Integer) {
            if (!is_integral_number(v.lo) || !is_integral_number(v.hi) ||
                !is_integral_number(v.unit_step))
                diags.push_back({"NON_INTEGER_BOUND", Severity::Error, loc,
                                 "integer variable '" + v.name +
                                     "' requires integral lo, hi and unit_step"});
            else if (v.unit_step.is_integer() && guardlang::v_compare(v.lo, v.hi) <= 0) {
                std::int64_t span = v.hi.as_integer() - v.lo.as_integer();
                std::int64_t step = v.unit_step.as_integer();
                if (step > 0 && span % step != 0)
                    diags.push_back({"UNIT_STEP_MISALIGNED", Severity::Warning, loc,
                                     "domain span of '" + v.name +
                                         "' is not a multiple of unit_step; hi is reachable "
                                         "only via clamping"});
            }
        }
    }

    // Transitions.
    std::set<std::string> seen_ids;
    for (std::size_t i = 0; i < m.transitions.size(); ++i) {
        const auto& t = m.transitions[i];
        std::string loc = "transitions[" + std::to_string(i) + "]";
        if (!seen_ids.insert(t.id).second)
            diags.push_back({"DUPLICATE_TRANSITION_ID", Severity::Error, loc,
                             "transition id '" + t.id + "' declared more than once"});
        if (!seen_states.count(t.source))
            diags.push_back({"DANGLING_STATE", Severity::Error, loc,
                             "source state '" + t.source + "' is not declared"});
        if (!seen_states.count(t.target))
            diags.push_back({"DANGLING_STATE", Severity::Error, loc,
                             "target state '" + t.target + "' is not declared"});
        if (t.guard) {
            check_expr_variables(*t.guard->lhs, m, loc + ".guard", diags);
            check_expr_variables(*t.guard->rhs, m, loc + ".guard", diags);
        }
        for (std::size_t a = 0; a < t.actions.size(); ++a) {
            const auto& act = t.actions[a];
            std::string aloc = loc + ".actions[" + std::to_string(a) + "]";
            const VariableDecl* target_var = m.find_variable(act.target);
            if (!target_var) {
                diags.push_back({"UNDECLARED_VARIABLE", Severity::Error, aloc,
                                 "assignment to undeclared variable '" + act.target + "'"});
            }
            check_expr_variables(*act.expr, m, aloc, diags);
            if (target_var) {
                bool refs_ok = true;
                std::set<std::string> vars;
                guardlang::collect_variables(*act.expr, vars);
                for (const auto& v : vars)
                    if (!kinds.count(v)) refs_ok = false;
                if (refs_ok && target_var->kind == NumKind::Integer &&
                    guardlang::infer_kind(*act.expr, kinds) == NumKind::Real)
                    diags.push_back({"TYPE_MISMATCH", Severity::Error, aloc,
                                     "real-valued expression assigned to integer variable '" +
                                         act.target + "'"});
            }
        }
    }

    // Reachability from the initial state (BFS over the state graph).
    if (seen_states.count(m.initial)) {
        std::set<std::string> reachable{m.initial};
        std::deque<std::string> queue{m.initial};
        while (!queue.empty()) {
            std::string s = queue.front();
            queue.pop_front();
            for (const auto& t : m.transitions) {
                if (t.source == s && seen_states.count(t.target) && !reachable.count(t.target)) {
                    reachable.insert(t.target);
                    queue.push_back(t.target);
                }
            }
        }
        for (std::size_t i = 0; i < m.states.size(); ++i) {
            if (!reachable.count(m.states[i]))
                diags.push_back({"REACHABILITY", Severity::Warning,
                                 "states[" + std::to_string(i) + "]",
                                 "state '" + m.states[i] + "' is unreachable from the initial state"});
        }
        bool any_out = false;
        for (const auto& t : m.transitions)
            if (t.source == m.initial) any_out = true;
        if (!any_out)
            diags.push_back({"NO_INITIAL_OUTGOING", Severity::Warning, "initial",
                             "no transition leaves the initial state"});
    }

    return diags;
}

std::string format_diagnostic(const Diagnostic& d) {
    std::ostringstream os;
    os << (d.severity == Severity::Error ? "error" : "warning") << " [" << d.code << "] "
       << d.location << ": " << d.message;
    return os.str();
}

// ---------------------------------------------------------------------------
// JSON loading
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ModelError("model " + path + ": " + message);
}

void reject_unknown_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                         const std::string& path) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) fail(path + "." + key, "unknown key");
    }
}

std::string require_string(const ordered_json& obj, const std::string& key,
                           const std::string& path) {
    if (!obj.contains(key)) fail(path, "missing required key '" + key + "'");
    if (!obj[key].is_string()) fail(path + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

Value number_value(const ordered_json& j, NumKind kind, const std::string& path) {
    if (kind == NumKind::Integer) {
        if (!j.is_number_integer()) fail(path, "expected an integer");
        return Value::integer(j.get<std::int64_t>());
    }
    if (!j.is_number()) fail(path, "expected a number");
    return Value::real(j.get<double>());
}

VariableDecl parse_variable(const ordered_json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    reject_unknown_keys(j, {"name", "kind", "domain", "unit_step"}, path);
    VariableDecl v;
    v.name = require_string(j, "name", path);
    std::string kind = require_string(j, "kind", path);
    if (kind == "integer") v.kind = NumKind::Integer;
    else if (kind == "real") v.kind = NumKind::Real;
    else fail(path + ".kind", "expected \"integer\" or \"real\"");
    if (!j.contains("domain") || !j["domain"].is_array() || j["domain"].size() != 2)
        fail(path + ".domain", "expected [lo, hi]");
    v.lo = number_value(j["domain"][0], v.kind, path + ".domain[0]");
    v.hi = number_value(j["domain"][1], v.kind, path + ".domain[1]");
    if (!j.contains("unit_step")) fail(path, "missing required key 'unit_step'");
    v.unit_step = number_value(j["unit_step"], v.kind, path + ".unit_step");
    return v;
}

Transition parse_transition(const ordered_json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    reject_unknown_keys(j, {"id", "source", "target", "guard", "actions", "event"}, path);
    Transition t;
    t.id = require_string(j, "id", path);
    t.source = require_string(j, "source", path);
    t.target = require_string(j, "target", path);
    if (j.contains("guard")) {
        if (!j["guard"].is_string()) fail(path + ".guard", "expected a guard source string");
        t.guard_source = j["guard"].get<std::string>();
        try {
            t.guard = guardlang::parse_guard(t.guard_source);
        } catch (const guardlang::ParseError& e) {
            fail(path + ".guard", e.what());
        }
    }
    if (j.contains("actions")) {
        if (!j["actions"].is_array()) fail(path + ".actions", "expected an array of strings");
        for (std::size_t i = 0; i < j["actions"].size(); ++i) {
            const auto& a = j["actions"][i];
            std::string apath = path + ".actions[" + std::to_string(i) + "]";
            if (!a.is_string()) fail(apath, "expected an action source string");
            t.action_sources.push_back(a.get<std::string>());
            try {
                t.actions.push_back(guardlang::parse_action(t.action_sources.back()));
            } catch (const guardlang::ParseError& e) {
                fail(apath, e.what());
            }
        }
    }
    if (j.contains("event")) {
        if (!j["event"].is_string()) fail(path + ".event", "expected a string");
        t.event = j["event"].get<std::string>();
    }
    return t;
}

}  // namespace

StateMachine load_model(std::string_view document) {
    ordered_json j;
    try {
        j = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelError(std::string("model: ") + e.what());
    }
    if (!j.is_object()) fail("$", "expected a JSON object");
    reject_unknown_keys(j, {"name", "states", "initial", "variables", "transitions"}, "$");

    StateMachine m;
    m.name = require_string(j, "name", "$");
    if (!j.contains("states") || !j["states"].is_array()) fail("$.states", "expected an array");
    for (std::size_t i = 0; i < j["states"].size(); ++i) {
        const auto& s = j["states"][i];
        if (!s.is_string())
            fail("$.states[" + std::to_string(i) + "]",
                 "expected a state name; nested or composite states are not supported "
                 "(flat machines only)");
        m.states.push_back(s.get<std::string>());
    }
    m.initial = require_string(j, "initial", "$");
    if (j.contains("variables")) {
        if (!j["variables"].is_array()) fail("$.variables", "expected an array");
        for (std::size_t i = 0; i < j["variables"].size(); ++i)
            m.variables.push_back(
                parse_variable(j["variables"][i], "$.variables[" + std::to_string(i) + "]"));
    }
    if (j.contains("transitions")) {
        if (!j["transitions"].is_array()) fail("$.transitions", "expected an array");
        for (std::size_t i = 0; i < j["transitions"].size(); ++i)
            m.transitions.push_back(
                parse_transition(j["transitions"][i], "$.transitions[" + std::to_string(i) + "]"));
    }

    auto diags = validate(m);
    if (has_errors(diags)) {
        std::ostringstream os;
        os << "model validation failed:";
        for (const auto& d : diags)
            if (d.severity == Severity::Error) os << "\n  " << format_diagnostic(d);
        throw ModelError(os.str(), std::move(diags));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

ordered_json value_json(const Value& v) {
    if (v.is_integer()) return v.as_integer();
    return v.as_real();
}

}  // namespace

std::string serialize(const StateMachine& m) {
    ordered_json j;
    j["name"] = m.name;
    j["states"] = m.states;
    j["initial"] = m.initial;
    j["variables"] = ordered_json::array();
    for (const auto& v : m.variables) {
        ordered_json vj;
        vj["name"] = v.name;
        vj["kind"] = v.kind == NumKind::Integer ? "integer" : "real";
        vj["domain"] = ordered_json::array({value_json(v.lo), value_json(v.hi)});
        vj["unit_step"] = value_json(v.unit_step);
        j["variables"].push_back(vj);
    }
    j["transitions"] = ordered_json::array();
    for (const auto& t : m.transitions) {
        ordered_json tj;
        tj["id"] = t.id;
        tj["source"] = t.source;
        tj["target"] = t.target;
        if (t.guard) tj["guard"] = t.guard_source;
        if (!t.action_sources.empty()) tj["actions"] = t.action_sources;
        if (!t.event.empty()) tj["event"] = t.event;
        j["transitions"].push_back(tj);
    }
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// File loading + digest
// ---------------------------------------------------------------------------

std::string content_digest(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string("fnv1a64:") + buf;
}

LoadedModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("model " + path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();
    LoadedModel lm;
    lm.digest = content_digest(content);
    try {
        lm.machine = load_model(content);
    } catch (const ModelError& e) {
        throw ModelError(path + ": " + e.what(), e.diagnostics());
    }
    return lm;
}

}  // namespace tcgen::statemodel
