// patchcomm command-line tool: ingest KB dumps, answer consultation
// requests, run the dataset harness, print the worked demos, and train the
// fallback scorer.
//
// Exit codes: 0 ok, 1 usage/config, 2 I/O, 3 protocol, 4 dataset, 5 training.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "patchcomm/patchcomm.hpp"

namespace {

using namespace patchcomm;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitDataset = 4;
constexpr int kExitTraining = 5;

struct Options {
    std::string mode = "kb-only";
    std::string kb_path;
    std::string embeddings_path;
    std::string models_path;
    std::string exceptions_path;
    std::size_t k_neighbors = 5;
    std::size_t trim = 3;
    std::size_t min_support = 1;
    bool explain = false;
    std::string json_path;
};

struct Backends {
    std::optional<KbStore> kb;
    std::unique_ptr<PrototypeScorer> scorer;
    Inflector inflector;
};

void validate(const Options& options) {
    BackendMode mode = backend_mode_from_string(options.mode);
    if ((mode == BackendMode::kb_only || mode == BackendMode::hybrid) && options.kb_path.empty()) {
        throw ConfigError("mode " + options.mode + " needs --kb");
    }
    if (mode == BackendMode::fallback_only || mode == BackendMode::hybrid) {
        if (options.embeddings_path.empty()) {
            throw ConfigError("mode " + options.mode + " needs --embeddings");
        }
        if (options.models_path.empty()) {
            throw ConfigError("mode " + options.mode + " needs --models");
        }
    }
    if ((options.k_neighbors + 1) * (options.k_neighbors + 1) <= 2 * options.trim) {
        throw ConfigError("(k+1)^2 must exceed 2*trim");
    }
}

Backends load_backends(const Options& options) {
    validate(options);
    BackendMode mode = backend_mode_from_string(options.mode);
    Backends backends;
    backends.inflector = options.exceptions_path.empty()
                             ? Inflector::builtin()
                             : Inflector::from_file(options.exceptions_path);
    if (mode == BackendMode::kb_only || mode == BackendMode::hybrid) {
        auto result = load_kb(options.kb_path);
        std::cerr << "kb: " << options.kb_path << " (" << result.report.summary() << ")\n";
        backends.kb = std::move(result.store);
    }
    if (mode == BackendMode::fallback_only || mode == BackendMode::hybrid) {
        auto store = load_embeddings_file(options.embeddings_path);
        auto models = load_relation_models_file(options.models_path);
        std::cerr << "scorer: " << models.size() << " relation models over "
                  << store.size() << " vectors\n";
        backends.scorer = std::make_unique<PrototypeScorer>(
            std::move(store), std::move(models), options.k_neighbors, options.trim);
    }
    return backends;
}

void print_explain_table(const AmbiguityRequest& request, const AttachmentDecision& decision,
                         std::ostream& out) {
    out << "candidate  kind  head             relation      weight    start  source\n";
    for (const auto& score : decision.scores) {
        const Candidate& candidate = request.candidates[score.candidate_index];
        char line[160];
        std::string relation = score.relation.value_or("-");
        std::string weight = score.weight ? format_number(*score.weight) : "-";
        std::string start = "-";
        if (score.start_side) {
            start = *score.start_side == StartSide::pp_noun ? request.pp_noun : candidate.head;
        }
        std::snprintf(line, sizeof(line), "%-9zu  %-4s  %-15s  %-12s  %-8s  %-5s  %s",
                      score.candidate_index, to_string(candidate.kind).c_str(),
                      candidate.head.c_str(), relation.c_str(), weight.c_str(), start.c_str(),
                      to_string(score.source).c_str());
        out << line << "\n";
    }
}

int cmd_ingest(const std::string& dump_path, const std::string& out_path) {
    auto result = load_kb(dump_path);
    std::ofstream out(out_path);
    if (!out) throw IngestError("cannot write KB file: " + out_path);
    result.store.save_fixture(out);
    std::cout << result.report.summary() << "\n";
    for (const auto& [line, reason] : result.report.details) {
        std::cerr << "  line " << line << ": " << reason << "\n";
    }
    return kExitOk;
}

int cmd_resolve(const Options& options, const std::string& input_path) {
    Backends backends = load_backends(options);
    BackendMode mode = backend_mode_from_string(options.mode);

    std::string text;
    if (input_path.empty() || input_path == "-") {
        std::ostringstream buffer;
        buffer << std::cin.rdbuf();
        text = buffer.str();
    } else {
        std::ifstream in(input_path);
        if (!in) throw IngestError("cannot open request file: " + input_path);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        text = buffer.str();
    }

    const KbStore* kb = backends.kb ? &*backends.kb : nullptr;
    for (const auto& node : parse_sexprs(text)) {
        AmbiguityRequest request = request_from_sexpr(node);
        AttachmentDecision decision =
            decide(request, kb, backends.scorer.get(), mode, backends.inflector);
        if (options.explain) print_explain_table(request, decision, std::cerr);
        std::cout << serialize_decision(decision, request) << "\n";
    }
    return kExitOk;
}

int cmd_eval(const Options& options, const std::string& data_dir, const std::string& prep,
             std::size_t max_heads, const std::string& file_prefix) {
    Backends backends = load_backends(options);
    BackendMode mode = backend_mode_from_string(options.mode);

    auto records = load_dataset(data_dir, DatasetFiles::with_prefix(file_prefix));
    auto filtered = filter_records(records, prep, max_heads);
    if (filtered.empty()) throw EmptyDataset("no records after filtering");
    std::cerr << "dataset: " << records.size() << " records, " << filtered.size()
              << " after filtering to prep \"" << prep << "\" and <= " << max_heads
              << " heads\n";

    const KbStore* kb = backends.kb ? &*backends.kb : nullptr;
    auto report = run_eval(filtered, kb, backends.scorer.get(), mode, backends.inflector);
    std::cout << format_report(report, filtered);
    if (!options.json_path.empty()) {
        std::ofstream json_out(options.json_path);
        if (!json_out) throw IngestError("cannot write report file: " + options.json_path);
        json_out << report_jsonl(report, filtered);
    }
    return kExitOk;
}

int cmd_train_scorer(const Options& options, const std::string& out_path) {
    if (options.embeddings_path.empty()) throw ConfigError("train-scorer needs --embeddings");
    if (options.kb_path.empty()) throw ConfigError("train-scorer needs --kb");
    auto store = load_embeddings_file(options.embeddings_path);
    auto kb = load_kb(options.kb_path);
    auto models = train_relation_models(store, kb.store, options.min_support);

    std::ofstream out(out_path);
    if (!out) throw IngestError("cannot write model file: " + out_path);
    save_relation_models(out, models);
    std::cout << "trained " << models.size() << " relation models (min_support="
              << options.min_support << "):\n";
    for (const auto& model : models) {
        std::cout << "  " << model.relation << "  support=" << model.support
                  << "  mean_weight=" << format_number(model.mean_weight) << "\n";
    }
    return kExitOk;
}

// ---- demo ------------------------------------------------------------

struct DemoConsultation {
    std::string request_text;  // the consultation message as the parser sends it
    std::string quantity;      // the PP's numeric determiner
};

struct DemoSentence {
    int number;
    std::string text;
    std::vector<Triple> base;
    std::vector<DemoConsultation> consultations;  // emission order
    std::vector<std::size_t> quantity_order;      // indices, sentence order
};

std::vector<DemoSentence> demo_sentences() {
    DemoSentence one;
    one.number = 1;
    one.text = "John is playing the guitar with one finger.";
    one.base = {{"John", "play", "guitar"}};
    one.consultations = {{R"((:ambig-PP
    (PP :prep "with" :det "one" :noun "finger")
 :possible-attachments
    ((V :verb "play")
     (NP :det "the" :noun "guitar"))))",
                          "1"}};
    one.quantity_order = {0};

    DemoSentence two;
    two.number = 2;
    two.text = "John is playing the guitar with one string.";
    two.base = {{"John", "play", "guitar"}};
    two.consultations = {{R"((:ambig-PP
    (PP :prep "with" :det "one" :noun "string")
 :possible-attachments
    ((V :verb "play")
     (NP :det "the" :noun "guitar"))))",
                          "1"}};
    two.quantity_order = {0};

    DemoSentence three;
    three.number = 3;
    three.text = "John is playing the guitar with one string with one finger.";
    three.base = {{"John", "play", "guitar"}};
    // the parser asks about the later PP first; the second consultation is
    // exactly the sentence-2 scenario
    three.consultations = {{R"((:ambig-PP
    (PP :prep "with" :det "one" :noun "finger")
 :possible-attachments
    ((V :verb "play")
     (NP :det "the" :noun "guitar")
     (PP :prep "with" :det "one" :noun "string"))))",
                            "1"},
                           {R"((:ambig-PP
    (PP :prep "with" :det "one" :noun "string")
 :possible-attachments
    ((V :verb "play")
     (NP :det "the" :noun "guitar"))))",
                            "1"}};
    three.quantity_order = {1, 0};  // string's quantity line precedes finger's
    return {one, two, three};
}

AttachmentDecision defaulted_decision(const AmbiguityRequest& request) {
    AttachmentDecision decision;
    decision.chosen_index = 0;
    decision.defaulted = true;
    decision.scores.resize(request.candidates.size());
    for (std::size_t i = 0; i < decision.scores.size(); ++i) {
        decision.scores[i].candidate_index = i;
    }
    return decision;
}

int cmd_demo(std::optional<int> only_sentence, bool default_only) {
    std::istringstream fixture(R"({"rel": "AtLocation", "start": "string", "end": "guitar", "weight": 2.0}
{"rel": "HasA", "start": "guitar", "end": "strings", "weight": 2.8284}
{"rel": "RelatedTo", "start": "finger", "end": "play", "weight": 1.0}
)");
    KbStore kb = ingest_dump(fixture, "<demo fixture>").store;

    for (const auto& sentence : demo_sentences()) {
        if (only_sentence && *only_sentence != sentence.number) continue;
        std::cout << "Sentence (" << sentence.number << "): \"" << sentence.text << "\"\n";

        std::vector<AttachmentLine> attachments;
        std::vector<QuantityLine> quantities(sentence.consultations.size());
        for (std::size_t i = 0; i < sentence.consultations.size(); ++i) {
            const auto& consultation = sentence.consultations[i];
            AmbiguityRequest request = parse_request(consultation.request_text);
            AttachmentDecision decision =
                default_only ? defaulted_decision(request)
                             : decide(request, &kb, nullptr, BackendMode::kb_only);
            std::cout << "\nconsultation:\n" << consultation.request_text << "\n";
            std::cout << "decision:\n" << serialize_decision(decision, request) << "\n";
            attachments.push_back({request.candidates[decision.chosen_index].head,
                                   request.preposition, request.pp_noun});
            quantities[i] = {request.pp_noun, consultation.quantity};
        }

        std::vector<QuantityLine> ordered_quantities;
        for (std::size_t index : sentence.quantity_order) {
            ordered_quantities.push_back(quantities[index]);
        }
        std::cout << "\nparse:\n"
                  << render_triples(sentence.base, attachments, ordered_quantities) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PP-attachment resolver backed by commonsense assertions"};
    app.require_subcommand(1);

    Options options;
    app.set_config("--config", "", "TOML-style key=value config file; flags win");
    app.add_option("--mode", options.mode, "kb-only, fallback-only or hybrid")
        ->check(CLI::IsMember({"kb-only", "fallback-only", "hybrid"}))
        ->capture_default_str();
    app.add_option("--kb", options.kb_path, "KB dump, fixture or serialized store");
    app.add_option("--embeddings", options.embeddings_path, "word embedding text file");
    app.add_option("--models", options.models_path, "trained relation-model file");
    app.add_option("--exceptions", options.exceptions_path,
                   "noun inflection exception table (singular TAB plural)");
    app.add_option("--k-neighbors", options.k_neighbors, "neighborhood size minus one")
        ->capture_default_str();
    app.add_option("--trim", options.trim, "weights trimmed from each end")
        ->capture_default_str();
    app.add_option("--min-support", options.min_support, "assertions needed per relation model")
        ->capture_default_str();
    app.add_flag("--explain", options.explain, "print the per-candidate score table to stderr");
    app.add_option("--json", options.json_path, "also write the eval report as JSON lines");

    auto* ingest = app.add_subcommand("ingest", "parse a KB dump into the fixture format");
    std::string dump_path, out_path;
    ingest->add_option("dump", dump_path, "input dump or fixture file")->required();
    ingest->add_option("-o,--out", out_path, "output path")->required();

    auto* resolve = app.add_subcommand("resolve", "decide attachments for requests");
    std::string input_path;
    resolve->add_option("--input", input_path, "request file (default: stdin)");

    auto* eval = app.add_subcommand("eval", "run the dataset harness");
    std::string data_dir, prep = "with", file_prefix = kDefaultDatasetPrefix;
    std::size_t max_heads = 3;
    eval->add_option("--data", data_dir, "dataset directory")->required();
    eval->add_option("--prep", prep, "preposition filter")->capture_default_str();
    eval->add_option("--max-heads", max_heads, "max candidate heads")->capture_default_str();
    eval->add_option("--file-prefix", file_prefix, "dataset file name prefix")
        ->capture_default_str();

    auto* demo = app.add_subcommand("demo", "print the worked sentences");
    int sentence_number = 0;
    bool default_only = false;
    demo->add_option("--sentence", sentence_number, "print only this sentence (1-3)")
        ->check(CLI::Range(1, 3));
    demo->add_flag("--default-only", default_only, "skip the KB, take the parser default");

    auto* train = app.add_subcommand("train-scorer", "train fallback relation models");
    std::string train_out;
    train->add_option("-o,--out", train_out, "model file to write")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(dump_path, out_path);
        if (resolve->parsed()) return cmd_resolve(options, input_path);
        if (eval->parsed()) return cmd_eval(options, data_dir, prep, max_heads, file_prefix);
        if (demo->parsed()) {
            return cmd_demo(sentence_number > 0 ? std::optional<int>(sentence_number)
                                                : std::nullopt,
                            default_only);
        }
        if (train->parsed()) return cmd_train_scorer(options, train_out);
    } catch (const MalformedRequest& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitProtocol;
    } catch (const DatasetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataset;
    } catch (const EmptyDataset& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataset;
    } catch (const EmptyModelSet& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTraining;
    } catch (const IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
