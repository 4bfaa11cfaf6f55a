#pragma once

// Test-suite reduction: cluster cases by a weighted coverage/input distance,
// keep each cluster's medoid, then repair any predicate-outcome coverage the
// medoid set dropped. All tie-breaks key on case ids, so the result is
// independent of case order in the input suite.

#include <cstddef>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "tcgen/statemodel.hpp"
#include "tcgen/suite.hpp"

namespace tcgen::reducer {

using statemodel::StateMachine;
using suite::TestCase;
using suite::TestSuite;

/// Transition-coverage bits (declared order) followed by the i_out values
/// normalized into [0,1] per variable domain.
struct FeatureVector {
    std::vector<bool> coverage_bits;
    std::vector<double> inputs;
};

FeatureVector featurize(const TestCase& test_case, const StateMachine& machine);

/// d = w * Jaccard(coverage bits) + (1-w) * Euclidean(inputs)/sqrt(dims),
/// always in [0, 1]. Throws on dimensionality mismatch.
double distance(const FeatureVector& a, const FeatureVector& b, double weight = 0.7);

struct Clustering {
    std::size_t k = 0;
    std::map<std::string, std::size_t> assignment;  // case id -> cluster index
    std::vector<std::string> medoids;               // one case id per cluster
    double total_distance = 0.0;
};

struct AutoK {};
using KChoice = std::variant<std::size_t, AutoK>;

struct ReduceOptions {
    KChoice k = AutoK{};
    double weight = 0.7;
    bool repair = true;
};

/// PAM-style k-medoids: greedy farthest-point seeding from the
/// lexicographically smallest case id, then best-improvement swaps.
/// AutoK picks k in [2, min(10, n-1)] by mean silhouette (k = 1 when n < 3).
/// Deterministic for fixed suite content regardless of case order.
Clustering cluster(const TestSuite& suite, const StateMachine& machine, const KChoice& k,
                   double weight = 0.7);

struct ReductionResult {
    TestSuite reduced;  // cases sorted by id; digest/config/failed_targets carried over
    Clustering clustering;
    /// Predicate-outcome pairs the medoid set alone would have dropped; the
    /// repair pass re-added the smallest-id case for each (empty when repair
    /// ran and nothing was missing, or lists the loss when repair is off).
    std::vector<std::pair<std::string, bool>> dropped_pairs;
};

/// Never drops coverage when options.repair is set:
/// covered_pairs(reduced) == covered_pairs(original) and the result is a
/// subset of the original cases.
ReductionResult reduce(const TestSuite& suite, const StateMachine& machine,
                       const ReduceOptions& options = {});

}  // namespace tcgen::reducer
