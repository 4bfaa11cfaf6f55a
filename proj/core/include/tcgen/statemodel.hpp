#pragma once

// Flat guarded state-machine model: the input every downstream stage consumes.
// Models are loaded from a JSON document (schema in docs/file_formats.md),
// validated, and immutable afterwards; a loaded StateMachine is safe to share
// across threads.

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tcgen/guardlang.hpp"

namespace tcgen::statemodel {

using guardlang::ActionStmt;
using guardlang::GuardExpr;
using guardlang::NumKind;
using guardlang::Value;

/// Input variable with an inclusive domain box and the smallest move
/// granularity the data-generation search may use.
struct VariableDecl {
    std::string name;
    NumKind kind = NumKind::Integer;
    Value lo;
    Value hi;
    Value unit_step;
};

struct Transition {
    std::string id;
    std::string source;
    std::string target;
    std::optional<GuardExpr> guard;
    std::string guard_source;  // empty when unguarded
    std::vector<ActionStmt> actions;
    std::vector<std::string> action_sources;
    std::string event;  // informational, may be empty
};

struct StateMachine {
    std::string name;
    std::vector<std::string> states;  // declared order
    std::string initial;
    std::vector<VariableDecl> variables;    // declared order
    std::vector<Transition> transitions;    // declared order

    const Transition* find_transition(std::string_view id) const;
    const VariableDecl* find_variable(std::string_view name) const;
    /// Transitions leaving `state`, in declared order.
    std::vector<const Transition*> outgoing(std::string_view state) const;
};

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

enum class Severity { Error, Warning };

struct Diagnostic {
    std::string code;      // stable machine-readable code, e.g. "DOMAIN_EMPTY"
    Severity severity = Severity::Error;
    std::string location;  // e.g. "transitions[2]" or "variable 'x'"
    std::string message;
};

/// Checks every structural invariant. Empty result means the machine is fully
/// valid; entries with Severity::Warning (REACHABILITY, NO_INITIAL_OUTGOING,
/// UNIT_STEP_MISALIGNED) do not block generation.
std::vector<Diagnostic> validate(const StateMachine& machine);

inline bool has_errors(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.severity == Severity::Error) return true;
    return false;
}

std::string format_diagnostic(const Diagnostic& d);

// ---------------------------------------------------------------------------
// Loading / serialization
// ---------------------------------------------------------------------------

/// Malformed document or invalid model; the message names the offending
/// location (JSON path or validation location).
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& message, std::vector<Diagnostic> diagnostics = {})
        : std::runtime_error(message), diagnostics_(std::move(diagnostics)) {}
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

/// Parses and fully validates a model document. Guards and actions are parsed
/// with guardlang; unknown JSON keys are rejected; any error-severity
/// diagnostic raises ModelError.
StateMachine load_model(std::string_view document);

/// Canonical JSON form; load_model(serialize(m)) reproduces m and
/// serialize is idempotent over that round trip.
std::string serialize(const StateMachine& machine);

/// Reads, digests (FNV-1a 64) and loads a model file.
struct LoadedModel {
    StateMachine machine;
    std::string digest;  // "fnv1a64:<16 hex digits>"
};
LoadedModel load_model_file(const std::string& path);

/// FNV-1a 64-bit content hash, formatted "fnv1a64:<16 hex digits>".
std::string content_digest(std::string_view bytes);

}  // namespace tcgen::statemodel
