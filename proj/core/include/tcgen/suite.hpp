#pragma once

// Test-case and test-suite data model, file persistence and coverage
// reporting. Suite files are canonical JSON (fixed key order, 2-space
// indent), so regenerating with the same seed reproduces the bytes exactly.
// Schema in docs/file_formats.md; format_version starts at 1.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tcgen/datagen.hpp"
#include "tcgen/pathfinder.hpp"
#include "tcgen/statemodel.hpp"

namespace tcgen::suite {

using guardlang::Env;
using guardlang::Value;
using statemodel::StateMachine;

inline constexpr int kFormatVersion = 1;

struct TargetRef {
    std::string transition_id;
    std::string guard_source;
    bool desired_outcome = true;
};

/// Transitions traversed when the case drives the desired outcome, plus the
/// (predicate, outcome) pair the case exists to exercise.
struct CoverageFootprint {
    std::set<std::string> transitions;
    std::pair<std::string, bool> predicate;
};

struct TestCase {
    std::string id;
    std::vector<std::string> path;
    TargetRef target;
    Env i_in;
    Env i_out;
    Value f_in;
    Value f_out;
    std::uint32_t evaluations_used = 0;
    std::string expected_end_state;
    CoverageFootprint footprint;
};

struct GenerationConfig {
    std::uint64_t seed = 0;
    std::size_t max_depth = 16;
    std::uint32_t max_evaluations = 10000;
    pathfinder::TraversalStrategy strategy = pathfinder::TraversalStrategy::DepthFirst;
};

struct TestSuite {
    int format_version = kFormatVersion;
    std::string model_digest;
    GenerationConfig config;
    std::vector<TestCase> cases;
    std::vector<datagen::FailureReport> failed_targets;
};

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct GenerationResult {
    TestSuite suite;
    std::vector<std::string> skipped;  // unreachable guarded transitions
    datagen::SearchStats stats;        // aggregated over all searches
};

/// Runs the full pipeline for one machine: enumerate predicate targets, search
/// each one, package boundary pairs into test cases. Failed targets land in
/// the suite's failed_targets section, never silently dropped. Deterministic
/// for a fixed (machine, digest, config).
GenerationResult generate_suite(const StateMachine& machine, const std::string& model_digest,
                                const GenerationConfig& config);

/// Packages one search result; case ids are "c0001", "c0002", ... in target
/// order.
TestCase make_case(const StateMachine& machine, const pathfinder::PredicateTarget& target,
                   const datagen::BoundaryPair& pair, std::size_t case_number);

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

class SuiteFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string to_json(const TestSuite& suite);
TestSuite from_json(std::string_view text);

/// Whole-file atomic write (temp file + rename).
void write_suite(const TestSuite& suite, const std::string& path);
TestSuite read_suite(const std::string& path);

// ---------------------------------------------------------------------------
// Coverage
// ---------------------------------------------------------------------------

struct CoverageReport {
    std::size_t guarded_total = 0;
    std::size_t guarded_covered = 0;
    std::size_t pairs_total = 0;
    std::size_t pairs_covered = 0;
    std::vector<std::string> skipped;  // unreachable guarded transitions
    std::vector<std::pair<std::string, bool>> failed;  // pairs with failed searches
};

class DigestMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Counts guarded-transition and predicate-outcome coverage from the cases'
/// footprints; re-enumerates with the suite's echoed config to classify
/// uncovered targets as skipped (unreachable) vs failed. Throws
/// DigestMismatch when the suite was generated from different model content.
CoverageReport coverage(const TestSuite& suite, const StateMachine& machine,
                        const std::string& model_digest);

std::string format_coverage_text(const CoverageReport& report);
std::string format_coverage_json(const CoverageReport& report);

/// The set of (predicate, outcome) pairs the suite covers.
std::set<std::pair<std::string, bool>> covered_pairs(const TestSuite& suite);

}  // namespace tcgen::suite
