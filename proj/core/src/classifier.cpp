#include "tcgen/classifier.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tcgen::classifier {

std::string_view to_string(Label label) { return label == Label::FR ? "FR" : "NFR"; }

Label label_from_string(std::string_view text) {
    if (text == "FR") return Label::FR;
    if (text == "NFR") return Label::NFR;
    throw std::invalid_argument("unknown label '" + std::string(text) + "' (expected FR or NFR)");
}

Corpus load_corpus(std::string_view text) {
    Corpus corpus;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) {
            if (pos > text.size()) break;
            continue;
        }
        std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw std::invalid_argument("corpus line " + std::to_string(line_no) +
                                        ": expected label<TAB>sentence");
        Sentence s;
        try {
            s.label = label_from_string(line.substr(0, tab));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("corpus line " + std::to_string(line_no) + ": " +
                                        e.what());
        }
        s.text = std::string(line.substr(tab + 1));
        corpus.push_back(std::move(s));
        if (pos > text.size()) break;
    }
    return corpus;
}

namespace {

// Modal requirement keywords (shall, should, must, may, will) are
// deliberately absent: they carry most of the FR/NFR signal.
const std::set<std::string>& stop_words() {
    static const std::set<std::string> words = {
        "a",   "an",  "and", "are", "as",  "at",   "be",   "by",  "for", "from", "in",
        "is",  "it",  "of",  "on",  "or",  "that", "the",  "this", "to",  "was",  "were",
        "with"};
    return words;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view sentence, bool remove_stop_words) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : sentence) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    if (remove_stop_words) {
        std::erase_if(tokens, [](const std::string& t) { return stop_words().count(t) > 0; });
    }
    return tokens;
}

double ClassifierModel::log_prior(Label c) const {
    double total = static_cast<double>(fr_docs + nfr_docs);
    double docs = static_cast<double>(c == Label::FR ? fr_docs : nfr_docs);
    return std::log(docs / total);
}

double ClassifierModel::log_likelihood(const std::string& token, Label c) const {
    const auto& counts = c == Label::FR ? fr_counts : nfr_counts;
    std::int64_t total = c == Label::FR ? fr_total : nfr_total;
    double count = 0.0;
    auto it = vocabulary.find(token);
    if (it != vocabulary.end()) count = static_cast<double>(counts[it->second]);
    double denom = static_cast<double>(total) + alpha * static_cast<double>(vocabulary.size());
    return std::log((count + alpha) / denom);
}

ClassifierModel train(const Corpus& corpus, double alpha, bool remove_stop_words) {
    if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
    if (!(alpha > 0.0))
        throw std::invalid_argument("smoothing constant alpha must be positive");

    ClassifierModel m;
    m.alpha = alpha;
    m.remove_stop_words = remove_stop_words;

    std::vector<std::pair<std::vector<std::string>, Label>> docs;
    for (const auto& s : corpus) {
        docs.emplace_back(tokenize(s.text, remove_stop_words), s.label);
        if (s.label == Label::FR)
            ++m.fr_docs;
        else
            ++m.nfr_docs;
        for (const auto& t : docs.back().first) m.vocabulary.emplace(t, 0);
    }
    if (m.fr_docs == 0 || m.nfr_docs == 0)
        throw std::invalid_argument("training corpus must contain both FR and NFR sentences");

    std::size_t index = 0;
    for (auto& [token, idx] : m.vocabulary) idx = index++;
    m.fr_counts.assign(m.vocabulary.size(), 0);
    m.nfr_counts.assign(m.vocabulary.size(), 0);

    for (const auto& [tokens, label] : docs) {
        auto& counts = label == Label::FR ? m.fr_counts : m.nfr_counts;
        auto& total = label == Label::FR ? m.fr_total : m.nfr_total;
        for (const auto& t : tokens) {
            ++counts[m.vocabulary[t]];
            ++total;
        }
    }
    return m;
}

namespace {

std::pair<double, double> log_scores(const ClassifierModel& model, std::string_view sentence) {
    auto tokens = tokenize(sentence, model.remove_stop_words);
    double fr = model.log_prior(Label::FR);
    double nfr = model.log_prior(Label::NFR);
    for (const auto& t : tokens) {
        fr += model.log_likelihood(t, Label::FR);
        nfr += model.log_likelihood(t, Label::NFR);
    }
    return {fr, nfr};
}

}  // namespace

Prediction classify(const ClassifierModel& model, std::string_view sentence) {
    auto [fr, nfr] = log_scores(model, sentence);
    Prediction p;
    // Exact ties go to NFR, the majority class of requirement corpora.
    p.label = fr > nfr ? Label::FR : Label::NFR;
    p.margin = std::abs(fr - nfr);
    return p;
}

std::pair<double, double> posterior(const ClassifierModel& model, std::string_view sentence) {
    auto [fr, nfr] = log_scores(model, sentence);
    double m = std::max(fr, nfr);
    double efr = std::exp(fr - m);
    double enfr = std::exp(nfr - m);
    double z = efr + enfr;
    return {efr / z, enfr / z};
}

EvaluationRow evaluate(const ClassifierModel& model, const Corpus& corpus, int set_number) {
    EvaluationRow row;
    row.set_number = set_number;
    for (const auto& s : corpus) {
        if (classify(model, s.text).label == s.label)
            ++row.correct;
        else
            ++row.incorrect;
    }
    return row;
}

std::string format_report(const std::vector<EvaluationRow>& rows) {
    std::ostringstream os;
    os << "Training set    Correctly classified    Incorrectly classified\n";
    for (const auto& r : rows) {
        os << r.set_number;
        for (std::size_t i = std::to_string(r.set_number).size(); i < 16; ++i) os << ' ';
        std::string c = std::to_string(r.correct);
        os << c;
        for (std::size_t i = c.size(); i < 24; ++i) os << ' ';
        os << r.incorrect << "\n";
    }
    return os.str();
}

std::vector<Rule> export_rules(const ClassifierModel& model, std::size_t n) {
    std::vector<Rule> rules;
    if (n == 0) return rules;
    for (Label label : {Label::FR, Label::NFR}) {
        Label other = label == Label::FR ? Label::NFR : Label::FR;
        std::vector<Rule> class_rules;
        for (const auto& [token, _] : model.vocabulary) {
            Rule r;
            r.token = token;
            r.label = label;
            r.weight = model.log_likelihood(token, label) - model.log_likelihood(token, other);
            class_rules.push_back(std::move(r));
        }
        std::sort(class_rules.begin(), class_rules.end(), [](const Rule& a, const Rule& b) {
            if (a.weight != b.weight) return a.weight > b.weight;
            return a.token < b.token;
        });
        if (class_rules.size() > n) class_rules.resize(n);
        rules.insert(rules.end(), class_rules.begin(), class_rules.end());
    }
    return rules;
}

std::string format_rules(const std::vector<Rule>& rules) {
    std::ostringstream os;
    for (const auto& r : rules) {
        os << "IF sentence contains '" << r.token << "' THEN " << to_string(r.label)
           << " (weight " << r.weight << ")\n";
    }
    return os.str();
}

}  // namespace tcgen::classifier
