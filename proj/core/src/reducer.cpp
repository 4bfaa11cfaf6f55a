#include "tcgen/reducer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace tcgen::reducer {

FeatureVector featurize(const TestCase& test_case, const StateMachine& machine) {
    FeatureVector fv;
    fv.coverage_bits.reserve(machine.transitions.size());
    for (const auto& t : machine.transitions)
        fv.coverage_bits.push_back(test_case.footprint.transitions.count(t.id) > 0);
    fv.inputs.reserve(machine.variables.size());
    for (const auto& var : machine.variables) {
        auto it = test_case.i_out.find(var.name);
        double v = it == test_case.i_out.end() ? var.lo.as_real() : it->second.as_real();
        double lo = var.lo.as_real();
        double hi = var.hi.as_real();
        fv.inputs.push_back(hi > lo ? (v - lo) / (hi - lo) : 0.0);
    }
    return fv;
}

double distance(const FeatureVector& a, const FeatureVector& b, double weight) {
    if (a.coverage_bits.size() != b.coverage_bits.size() || a.inputs.size() != b.inputs.size())
        throw std::invalid_argument("feature vectors have mismatched dimensionality");

    std::size_t both = 0, either = 0;
    for (std::size_t i = 0; i < a.coverage_bits.size(); ++i) {
        bool x = a.coverage_bits[i], y = b.coverage_bits[i];
        both += x && y;
        either += x || y;
    }
    double jaccard = either == 0 ? 0.0 : 1.0 - static_cast<double>(both) / either;

    double euclid = 0.0;
    if (!a.inputs.empty()) {
        double sq = 0.0;
        for (std::size_t i = 0; i < a.inputs.size(); ++i) {
            double d = a.inputs[i] - b.inputs[i];
            sq += d * d;
        }
        euclid = std::sqrt(sq) / std::sqrt(static_cast<double>(a.inputs.size()));
    }
    return weight * jaccard + (1.0 - weight) * euclid;
}

namespace {

/// Cases sorted by id with their pairwise distances; all clustering decisions
/// key on positions in this sorted order, never on input order.
struct Workspace {
    std::vector<const TestCase*> cases;  // sorted by id
    std::vector<std::vector<double>> dist;

    Workspace(const TestSuite& suite, const StateMachine& machine, double weight) {
        for (const auto& c : suite.cases) cases.push_back(&c);
        std::sort(cases.begin(), cases.end(),
                  [](const TestCase* a, const TestCase* b) { return a->id < b->id; });
        std::vector<FeatureVector> fvs;
        fvs.reserve(cases.size());
        for (const auto* c : cases) fvs.push_back(featurize(*c, machine));
        dist.assign(cases.size(), std::vector<double>(cases.size(), 0.0));
        for (std::size_t i = 0; i < cases.size(); ++i)
            for (std::size_t j = i + 1; j < cases.size(); ++j)
                dist[i][j] = dist[j][i] = distance(fvs[i], fvs[j], weight);
    }

    std::size_t size() const { return cases.size(); }
};

/// Nearest medoid; a medoid always claims itself, other ties go to the
/// smaller position (smaller case id).
std::vector<std::size_t> assign(const Workspace& w, const std::vector<std::size_t>& medoids) {
    std::vector<std::size_t> owner(w.size(), 0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::size_t best = medoids.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < medoids.size(); ++m) {
            if (medoids[m] == i) {
                best = m;
                break;
            }
            double d = w.dist[i][medoids[m]];
            if (d < best_d) {
                best_d = d;
                best = m;
            }
        }
        owner[i] = best;
    }
    return owner;
}

double total_cost(const Workspace& w, const std::vector<std::size_t>& medoids) {
    double cost = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t m : medoids) {
            if (m == i) {
                best = 0.0;
                break;
            }
            best = std::min(best, w.dist[i][m]);
        }
        cost += best;
    }
    return cost;
}

std::vector<std::size_t> seed_medoids(const Workspace& w, std::size_t k) {
    std::vector<std::size_t> medoids{0};  // smallest case id
    std::vector<double> min_dist(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) min_dist[i] = w.dist[i][0];
    while (medoids.size() < k) {
        std::size_t farthest = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            bool taken = std::find(medoids.begin(), medoids.end(), i) != medoids.end();
            if (!taken && min_dist[i] > best) {
                best = min_dist[i];
                farthest = i;
            }
        }
        medoids.push_back(farthest);
        for (std::size_t i = 0; i < w.size(); ++i)
            min_dist[i] = std::min(min_dist[i], w.dist[i][farthest]);
    }
    return medoids;
}

std::vector<std::size_t> pam(const Workspace& w, std::size_t k) {
    auto medoids = seed_medoids(w, k);
    double cost = total_cost(w, medoids);
    bool improved = true;
    while (improved) {
        improved = false;
        std::size_t best_m = 0, best_h = 0;
        double best_cost = cost;
        for (std::size_t mi = 0; mi < medoids.size(); ++mi) {
            for (std::size_t h = 0; h < w.size(); ++h) {
                if (std::find(medoids.begin(), medoids.end(), h) != medoids.end()) continue;
                auto candidate = medoids;
                candidate[mi] = h;
                double c = total_cost(w, candidate);
                if (c < best_cost) {
                    best_cost = c;
                    best_m = mi;
                    best_h = h;
                    improved = true;
                }
            }
        }
        if (improved) {
            medoids[best_m] = best_h;
            cost = best_cost;
        }
    }
    std::sort(medoids.begin(), medoids.end());
    return medoids;
}

double mean_silhouette(const Workspace& w, const std::vector<std::size_t>& medoids) {
    auto owner = assign(w, medoids);
    std::size_t k = medoids.size();
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < w.size(); ++i) members[owner[i]].push_back(i);

    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& own = members[owner[i]];
        if (own.size() <= 1) continue;  // singleton: s = 0
        double a = 0.0;
        for (std::size_t j : own)
            if (j != i) a += w.dist[i][j];
        a /= static_cast<double>(own.size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c == owner[i] || members[c].empty()) continue;
            double mean = 0.0;
            for (std::size_t j : members[c]) mean += w.dist[i][j];
            mean /= static_cast<double>(members[c].size());
            b = std::min(b, mean);
        }
        if (!std::isfinite(b)) continue;
        double denom = std::max(a, b);
        if (denom > 0.0) sum += (b - a) / denom;
    }
    return sum / static_cast<double>(w.size());
}

std::size_t pick_k(const Workspace& w, const KChoice& choice) {
    if (const auto* fixed = std::get_if<std::size_t>(&choice)) {
        if (*fixed == 0) throw std::invalid_argument("cluster count must be positive");
        if (*fixed > w.size())
            throw std::invalid_argument("cluster count " + std::to_string(*fixed) +
                                        " exceeds suite size " + std::to_string(w.size()));
        return *fixed;
    }
    if (w.size() < 3) return 1;
    std::size_t k_max = std::min<std::size_t>(10, w.size() - 1);
    std::size_t best_k = 2;
    double best_s = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 2; k <= k_max; ++k) {
        double s = mean_silhouette(w, pam(w, k));
        if (s > best_s) {
            best_s = s;
            best_k = k;
        }
    }
    return best_k;
}

}  // namespace

Clustering cluster(const TestSuite& suite, const StateMachine& machine, const KChoice& k,
                   double weight) {
    if (suite.cases.empty()) throw std::invalid_argument("cannot cluster an empty suite");
    Workspace w(suite, machine, weight);
    std::size_t chosen_k = pick_k(w, k);
    auto medoids = pam(w, chosen_k);
    auto owner = assign(w, medoids);

    Clustering result;
    result.k = chosen_k;
    for (std::size_t m : medoids) result.medoids.push_back(w.cases[m]->id);
    for (std::size_t i = 0; i < w.size(); ++i) {
        result.assignment[w.cases[i]->id] = owner[i];
        result.total_distance += medoids[owner[i]] == i ? 0.0 : w.dist[i][medoids[owner[i]]];
    }
    return result;
}

ReductionResult reduce(const TestSuite& suite, const StateMachine& machine,
                       const ReduceOptions& options) {
    ReductionResult result;
    result.reduced = suite;
    result.reduced.cases.clear();
    if (suite.cases.empty()) return result;

    result.clustering = cluster(suite, machine, options.k, options.weight);

    std::set<std::string> keep(result.clustering.medoids.begin(),
                               result.clustering.medoids.end());

    // Coverage repair: every predicate-outcome pair of the original suite must
    // survive; re-add the smallest-id case for any pair the medoids dropped.
    std::set<std::pair<std::string, bool>> have;
    for (const auto& c : suite.cases)
        if (keep.count(c.id)) have.insert(c.footprint.predicate);

    std::vector<const TestCase*> by_id;
    for (const auto& c : suite.cases) by_id.push_back(&c);
    std::sort(by_id.begin(), by_id.end(),
              [](const TestCase* a, const TestCase* b) { return a->id < b->id; });

    for (const auto* c : by_id) {
        if (have.count(c->footprint.predicate)) continue;
        have.insert(c->footprint.predicate);
        result.dropped_pairs.push_back(c->footprint.predicate);
        if (options.repair) keep.insert(c->id);
    }

    for (const auto* c : by_id)
        if (keep.count(c->id)) result.reduced.cases.push_back(*c);
    return result;
}

}  // namespace tcgen::reducer
