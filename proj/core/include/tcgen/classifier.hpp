#pragma once

// Sentence-level FR/NFR requirement classifier: multinomial naive Bayes with
// add-alpha smoothing, plus the three-column evaluation report and the
// exported "IF sentence contains <token> THEN <class>" rule list.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tcgen::classifier {

enum class Label { FR, NFR };

std::string_view to_string(Label label);
Label label_from_string(std::string_view text);  // throws on anything but "FR"/"NFR"

struct Sentence {
    std::string text;
    Label label = Label::FR;
};

using Corpus = std::vector<Sentence>;

/// Parses UTF-8 tab-separated lines, `label<TAB>sentence`, skipping blank
/// lines; errors name the 1-based line number.
Corpus load_corpus(std::string_view text);

/// Lowercases and splits on non-alphanumeric runs; empty tokens dropped.
/// "x>=10" tokenizes to ["x", "10"].
std::vector<std::string> tokenize(std::string_view sentence, bool remove_stop_words = false);

struct ClassifierModel {
    double alpha = 1.0;
    bool remove_stop_words = false;
    std::map<std::string, std::size_t> vocabulary;  // token -> index
    std::vector<std::int64_t> fr_counts;            // per vocab index
    std::vector<std::int64_t> nfr_counts;
    std::int64_t fr_total = 0;   // token occurrences per class
    std::int64_t nfr_total = 0;
    std::int64_t fr_docs = 0;
    std::int64_t nfr_docs = 0;

    double log_prior(Label c) const;
    /// Smoothed log P(token | class); unseen tokens hit the alpha floor.
    double log_likelihood(const std::string& token, Label c) const;
};

/// Multinomial counts with add-alpha smoothing. Requires a non-empty corpus
/// containing both labels and alpha > 0.
ClassifierModel train(const Corpus& corpus, double alpha = 1.0,
                      bool remove_stop_words = false);

struct Prediction {
    Label label = Label::NFR;
    double margin = 0.0;  // winning log-score minus losing; ties go to NFR
};

Prediction classify(const ClassifierModel& model, std::string_view sentence);

/// Normalized class posteriors (FR, NFR); they sum to 1.
std::pair<double, double> posterior(const ClassifierModel& model, std::string_view sentence);

struct EvaluationRow {
    int set_number = 0;
    std::size_t correct = 0;
    std::size_t incorrect = 0;
};

EvaluationRow evaluate(const ClassifierModel& model, const Corpus& corpus, int set_number);

/// Three-column text table: training set number, correctly classified count,
/// incorrectly classified count.
std::string format_report(const std::vector<EvaluationRow>& rows);

struct Rule {
    std::string token;
    Label label = Label::FR;
    double weight = 0.0;  // log-likelihood ratio toward `label`
};

/// Top-n tokens per class by log-likelihood ratio, FR rules first, each class
/// descending by weight with ties broken by token text. Truncated when the
/// vocabulary is smaller than n.
std::vector<Rule> export_rules(const ClassifierModel& model, std::size_t n);

std::string format_rules(const std::vector<Rule>& rules);

}  // namespace tcgen::classifier
