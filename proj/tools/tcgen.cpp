// tcgen: command-line front end for the test-case generation toolchain.
//
// Subcommands:
//   classify  train an FR/NFR sentence classifier and label input sentences
//   generate  enumerate predicate targets and search boundary test data
//   reduce    cluster a generated suite and keep coverage-preserving medoids
//   pipeline  classify + generate + reduce into an output directory
//
// Exit codes: 0 success, 1 usage or validation error, 2 generation finished
// with failed targets (artifacts are still written).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tcgen/classifier.hpp"
#include "tcgen/reducer.hpp"
#include "tcgen/statemodel.hpp"
#include "tcgen/suite.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

struct SharedFlags {
    std::uint64_t seed = 0;
    std::size_t max_depth = 16;
    std::uint32_t max_evals = 10000;
    std::string strategy = "dfs";
    std::string format = "text";
};

void add_generation_flags(CLI::App* cmd, SharedFlags& flags) {
    cmd->add_option("--seed", flags.seed, "Random seed for the boundary search");
    cmd->add_option("--max-depth", flags.max_depth, "Maximum path length during traversal")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-evals", flags.max_evals,
                    "Evaluation budget per predicate target")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--strategy", flags.strategy, "Traversal order")
        ->check(CLI::IsMember({"dfs", "bfs"}));
}

tcgen::suite::GenerationConfig make_config(const SharedFlags& flags) {
    tcgen::suite::GenerationConfig cfg;
    cfg.seed = flags.seed;
    cfg.max_depth = flags.max_depth;
    cfg.max_evaluations = flags.max_evals;
    cfg.strategy = flags.strategy == "bfs" ? tcgen::pathfinder::TraversalStrategy::BreadthFirst
                                           : tcgen::pathfinder::TraversalStrategy::DepthFirst;
    return cfg;
}

tcgen::reducer::KChoice parse_clusters(const std::string& text) {
    if (text == "auto") return tcgen::reducer::AutoK{};
    std::size_t pos = 0;
    unsigned long long k = std::stoull(text, &pos);
    if (pos != text.size()) throw std::runtime_error("--clusters expects a count or 'auto'");
    return static_cast<std::size_t>(k);
}

void print_warnings(const tcgen::statemodel::StateMachine& machine) {
    for (const auto& d : tcgen::statemodel::validate(machine))
        if (d.severity == tcgen::statemodel::Severity::Warning)
            std::cerr << tcgen::statemodel::format_diagnostic(d) << "\n";
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

struct ClassifyArgs {
    std::string train_path;
    std::string input_path;
    std::string out_path;
    double alpha = 1.0;
    bool stop_words = false;
    std::size_t rules = 0;
    int set_number = 1;
    std::string format = "text";
};

bool input_is_labeled(const std::string& content) {
    bool any = false;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        any = true;
        if (line.rfind("FR\t", 0) != 0 && line.rfind("NFR\t", 0) != 0) return false;
    }
    return any;
}

int run_classify(const ClassifyArgs& args) {
    using namespace tcgen::classifier;

    auto model = train(load_corpus(read_file(args.train_path)), args.alpha, args.stop_words);
    std::string input = read_file(args.input_path);

    std::ostringstream labeled;
    std::ostringstream report;
    if (input_is_labeled(input)) {
        Corpus corpus = load_corpus(input);
        for (const auto& s : corpus)
            labeled << to_string(classify(model, s.text).label) << '\t' << s.text << '\n';
        auto row = evaluate(model, corpus, args.set_number);
        if (args.format == "structured") {
            report << "{\n  \"set_number\": " << row.set_number
                   << ",\n  \"correct\": " << row.correct
                   << ",\n  \"incorrect\": " << row.incorrect << "\n}\n";
        } else {
            report << format_report({row});
        }
    } else {
        std::size_t fr = 0, nfr = 0;
        std::istringstream in(input);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            Label label = classify(model, line).label;
            (label == Label::FR ? fr : nfr)++;
            labeled << to_string(label) << '\t' << line << '\n';
        }
        if (args.format == "structured") {
            report << "{\n  \"sentences\": " << fr + nfr << ",\n  \"fr\": " << fr
                   << ",\n  \"nfr\": " << nfr << "\n}\n";
        } else {
            report << "sentences " << fr + nfr << "\nFR        " << fr << "\nNFR       " << nfr
                   << "\n";
        }
    }

    std::cout << report.str();
    if (args.rules > 0) std::cout << format_rules(export_rules(model, args.rules));
    if (!args.out_path.empty())
        write_file(args.out_path, labeled.str());
    else
        std::cout << labeled.str();
    return 0;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

int run_generate(const std::string& model_path, const std::string& out_path,
                 const SharedFlags& flags) {
    auto loaded = tcgen::statemodel::load_model_file(model_path);
    print_warnings(loaded.machine);

    auto result = tcgen::suite::generate_suite(loaded.machine, loaded.digest, make_config(flags));
    tcgen::suite::write_suite(result.suite, out_path);

    auto report = tcgen::suite::coverage(result.suite, loaded.machine, loaded.digest);
    std::cout << (flags.format == "structured" ? tcgen::suite::format_coverage_json(report)
                                               : tcgen::suite::format_coverage_text(report));
    return result.suite.failed_targets.empty() ? 0 : 2;
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

struct ReduceArgs {
    std::string suite_path;
    std::string model_path;
    std::string out_path;
    std::string clusters = "auto";
    double weight = 0.7;
    bool no_repair = false;
    std::string format = "text";
};

int run_reduce(const ReduceArgs& args) {
    auto loaded = tcgen::statemodel::load_model_file(args.model_path);
    auto original = tcgen::suite::read_suite(args.suite_path);
    if (original.model_digest != loaded.digest)
        throw std::runtime_error("suite " + args.suite_path +
                                 " was generated from different model content (digest mismatch)");

    tcgen::reducer::ReduceOptions options;
    options.k = parse_clusters(args.clusters);
    options.weight = args.weight;
    options.repair = !args.no_repair;
    auto result = tcgen::reducer::reduce(original, loaded.machine, options);
    tcgen::suite::write_suite(result.reduced, args.out_path);

    auto before = tcgen::suite::coverage(original, loaded.machine, loaded.digest);
    auto after = tcgen::suite::coverage(result.reduced, loaded.machine, loaded.digest);
    if (args.format == "structured") {
        std::cout << "{\n\"cases_before\": " << original.cases.size()
                  << ",\n\"cases_after\": " << result.reduced.cases.size() << ",\n\"before\": "
                  << tcgen::suite::format_coverage_json(before)
                  << ",\n\"after\": " << tcgen::suite::format_coverage_json(after) << "}\n";
    } else {
        std::cout << "cases: " << original.cases.size() << " -> " << result.reduced.cases.size()
                  << " (k=" << result.clustering.k << ")\n";
        std::cout << "before:\n" << tcgen::suite::format_coverage_text(before);
        std::cout << "after:\n" << tcgen::suite::format_coverage_text(after);
    }
    if (args.no_repair && !result.dropped_pairs.empty()) {
        std::cout << "coverage lost without repair:";
        for (const auto& [id, outcome] : result.dropped_pairs)
            std::cout << " " << id << ":" << (outcome ? "true" : "false");
        std::cout << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

struct PipelineArgs {
    std::string train_path;
    std::string srs_path;
    std::string model_path;
    std::string out_dir;
    ClassifyArgs classify;
    SharedFlags shared;
    std::string clusters = "auto";
    double weight = 0.7;
};

int run_generate_to(const std::string& model_path, const std::string& suite_path,
                    const std::string& coverage_path, const SharedFlags& flags) {
    std::ostringstream captured;
    auto* old = std::cout.rdbuf(captured.rdbuf());
    int rc = run_generate(model_path, suite_path, flags);
    std::cout.rdbuf(old);
    write_file(coverage_path, captured.str());
    return rc;
}

int run_pipeline(const PipelineArgs& args) {
    fs::create_directories(args.out_dir);
    fs::path dir(args.out_dir);

    ClassifyArgs classify = args.classify;
    classify.train_path = args.train_path;
    classify.input_path = args.srs_path;
    classify.out_path = (dir / "labels.tsv").string();
    classify.format = args.shared.format;
    {
        std::ostringstream captured;
        auto* old = std::cout.rdbuf(captured.rdbuf());
        run_classify(classify);
        std::cout.rdbuf(old);
        write_file((dir / "classify_report.txt").string(), captured.str());
    }

    int generate_rc = run_generate_to(args.model_path, (dir / "suite.json").string(),
                                      (dir / "coverage.txt").string(), args.shared);

    ReduceArgs reduce;
    reduce.suite_path = (dir / "suite.json").string();
    reduce.model_path = args.model_path;
    reduce.out_path = (dir / "reduced.json").string();
    reduce.clusters = args.clusters;
    reduce.weight = args.weight;
    reduce.format = args.shared.format;
    {
        std::ostringstream captured;
        auto* old = std::cout.rdbuf(captured.rdbuf());
        run_reduce(reduce);
        std::cout.rdbuf(old);
        write_file((dir / "reduced_coverage.txt").string(), captured.str());
    }

    std::cout << "pipeline artifacts written to " << args.out_dir << "\n";
    return generate_rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary test-case generation from guarded state-machine models"};
    app.require_subcommand(1);

    // classify
    ClassifyArgs classify_args;
    auto* classify_cmd =
        app.add_subcommand("classify", "Label sentences as FR or NFR and report accuracy");
    classify_cmd->add_option("--train", classify_args.train_path, "Training corpus (TSV)")
        ->required();
    classify_cmd->add_option("--input", classify_args.input_path, "Sentences to label")
        ->required();
    classify_cmd->add_option("--out", classify_args.out_path, "Labeled output path");
    classify_cmd->add_option("--alpha", classify_args.alpha, "Add-alpha smoothing constant");
    classify_cmd->add_flag("--stop-words", classify_args.stop_words,
                           "Drop common function words before counting");
    classify_cmd->add_option("--rules", classify_args.rules,
                             "Print the top-n classification rules per class");
    classify_cmd->add_option("--set-number", classify_args.set_number,
                             "Training-set number for the report row");
    classify_cmd->add_option("--format", classify_args.format, "Report format")
        ->check(CLI::IsMember({"text", "structured"}));

    // generate
    std::string gen_model, gen_out;
    SharedFlags gen_flags;
    auto* generate_cmd =
        app.add_subcommand("generate", "Generate boundary test data for every predicate");
    generate_cmd->add_option("--model", gen_model, "State-machine model file")->required();
    generate_cmd->add_option("--out", gen_out, "Suite output path")->required();
    add_generation_flags(generate_cmd, gen_flags);
    generate_cmd->add_option("--format", gen_flags.format, "Coverage report format")
        ->check(CLI::IsMember({"text", "structured"}));

    // reduce
    ReduceArgs reduce_args;
    auto* reduce_cmd = app.add_subcommand("reduce", "Shrink a suite, preserving coverage");
    reduce_cmd->add_option("--suite", reduce_args.suite_path, "Generated suite file")->required();
    reduce_cmd->add_option("--model", reduce_args.model_path, "State-machine model file")
        ->required();
    reduce_cmd->add_option("--out", reduce_args.out_path, "Reduced suite output path")
        ->required();
    reduce_cmd->add_option("--clusters", reduce_args.clusters, "Cluster count or 'auto'");
    reduce_cmd->add_option("--weight", reduce_args.weight,
                           "Coverage-vs-input distance weight in [0,1]");
    reduce_cmd->add_flag("--no-repair", reduce_args.no_repair,
                         "Report coverage loss instead of repairing it");
    reduce_cmd->add_option("--format", reduce_args.format, "Report format")
        ->check(CLI::IsMember({"text", "structured"}));

    // pipeline
    PipelineArgs pipeline_args;
    auto* pipeline_cmd =
        app.add_subcommand("pipeline", "classify + generate + reduce into a directory");
    pipeline_cmd->add_option("--train", pipeline_args.train_path, "Training corpus (TSV)")
        ->required();
    pipeline_cmd->add_option("--srs", pipeline_args.srs_path, "Requirement sentences to label")
        ->required();
    pipeline_cmd->add_option("--model", pipeline_args.model_path, "State-machine model file")
        ->required();
    pipeline_cmd->add_option("--out-dir", pipeline_args.out_dir, "Artifact directory")
        ->required();
    add_generation_flags(pipeline_cmd, pipeline_args.shared);
    pipeline_cmd->add_option("--clusters", pipeline_args.clusters, "Cluster count or 'auto'");
    pipeline_cmd->add_option("--weight", pipeline_args.weight, "Distance weight in [0,1]");
    pipeline_cmd->add_option("--alpha", pipeline_args.classify.alpha, "Smoothing constant");
    pipeline_cmd->add_flag("--stop-words", pipeline_args.classify.stop_words,
                           "Drop common function words");
    pipeline_cmd->add_option("--format", pipeline_args.shared.format, "Report format")
        ->check(CLI::IsMember({"text", "structured"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (classify_cmd->parsed()) return run_classify(classify_args);
        if (generate_cmd->parsed()) return run_generate(gen_model, gen_out, gen_flags);
        if (reduce_cmd->parsed()) return run_reduce(reduce_args);
        if (pipeline_cmd->parsed()) return run_pipeline(pipeline_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
