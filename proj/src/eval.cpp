#include "patchcomm/eval.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "patchcomm/errors.hpp"

namespace patchcomm {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open dataset file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::size_t parse_count(const std::string& text, const std::string& file, std::size_t lineno) {
    std::size_t value = 0;
    auto begin = text.data();
    auto end = text.data() + text.size();
    while (begin < end && *begin == ' ') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw DatasetError(file + " line " + std::to_string(lineno) + ": expected an integer, got \"" +
                           text + "\"");
    }
    return value;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string token;
    while (ss >> token) out.push_back(std::move(token));
    return out;
}

std::string trimmed(const std::string& text) {
    auto begin = text.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    auto end = text.find_last_not_of(" \t");
    return text.substr(begin, end - begin + 1);
}

}  // namespace

DatasetFiles DatasetFiles::with_prefix(const std::string& prefix) {
    return DatasetFiles{prefix + ".preps.words", prefix + ".children.words",
                        prefix + ".heads.words", prefix + ".nheads", prefix + ".labels"};
}

std::vector<EvalRecord> load_dataset(const std::string& dir, const DatasetFiles& files) {
    auto path = [&dir](const std::string& name) { return dir + "/" + name; };
    auto preps = read_lines(path(files.preps));
    auto children = read_lines(path(files.children));
    auto heads = read_lines(path(files.heads));
    auto nheads = read_lines(path(files.nheads));
    auto labels = read_lines(path(files.labels));

    if (preps.size() != children.size() || preps.size() != heads.size() ||
        preps.size() != nheads.size() || preps.size() != labels.size()) {
        throw DatasetError("dataset files disagree on record count: " + std::to_string(preps.size()) +
                           "/" + std::to_string(children.size()) + "/" + std::to_string(heads.size()) +
                           "/" + std::to_string(nheads.size()) + "/" + std::to_string(labels.size()));
    }

    std::vector<EvalRecord> records;
    records.reserve(preps.size());
    for (std::size_t i = 0; i < preps.size(); ++i) {
        std::size_t lineno = i + 1;
        EvalRecord record;
        record.preposition = trimmed(preps[i]);
        try {
            record.child = normalize_concept(children[i]);
            for (const auto& head : split_ws(heads[i])) {
                record.heads.push_back(normalize_concept(head));
            }
        } catch (const InvalidConcept& e) {
            throw DatasetError("line " + std::to_string(lineno) + ": " + e.what());
        }
        record.n_heads = parse_count(nheads[i], files.nheads, lineno);
        if (record.n_heads != record.heads.size()) {
            throw DatasetError(files.nheads + " line " + std::to_string(lineno) + ": count " +
                               std::to_string(record.n_heads) + " != " +
                               std::to_string(record.heads.size()) + " listed heads");
        }
        record.gold_index = parse_count(labels[i], files.labels, lineno);
        if (record.gold_index < 1 || record.gold_index > record.n_heads) {
            throw DatasetError(files.labels + " line " + std::to_string(lineno) +
                               ": gold index " + std::to_string(record.gold_index) +
                               " out of range 1.." + std::to_string(record.n_heads));
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<EvalRecord> filter_records(std::span<const EvalRecord> records,
                                       const std::string& preposition, std::size_t max_heads) {
    std::vector<EvalRecord> kept;
    for (const auto& record : records) {
        if (record.preposition == preposition && record.n_heads <= max_heads) {
            kept.push_back(record);
        }
    }
    return kept;
}

double baseline(std::span<const EvalRecord> records) {
    if (records.empty()) throw EmptyDataset("baseline over an empty record set");
    double sum = 0.0;
    for (const auto& record : records) sum += 1.0 / static_cast<double>(record.n_heads);
    return sum / static_cast<double>(records.size());
}

EvalReport run_eval(std::span<const EvalRecord> records, const KbStore* kb,
                    const RelationScorer* scorer, BackendMode mode, const Inflector& inflector) {
    EvalReport report;
    report.total = records.size();
    report.baseline = baseline(records);

    bool any_wstar = false;
    std::size_t within = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const EvalRecord& record = records[i];
        AmbiguityRequest request;
        request.preposition = record.preposition;
        request.pp_noun = record.child;
        for (const auto& head : record.heads) {
            // heads are untagged; NP candidates query the union of noun and
            // verb variants (the verb lemma is the noun base form)
            request.candidates.push_back(Candidate{CandidateKind::noun_phrase, head, {}, {}});
        }

        RecordResult result;
        result.record_index = i;
        result.decision = decide(request, kb, scorer, mode, inflector);
        result.correct = record.heads[result.decision.chosen_index] == record.heads[record.gold_index - 1];
        if (result.correct) ++report.correct;

        const auto& scores = result.decision.scores;
        const auto& picked = scores[result.decision.chosen_index];
        const auto& gold = scores[record.gold_index - 1];
        if (picked.source == ScoreSource::fallback) any_wstar = true;
        if (picked.source == ScoreSource::fallback && gold.source == ScoreSource::fallback) {
            result.wstar_diff = std::abs(*picked.weight - *gold.weight);
            if (!result.correct && *result.wstar_diff <= 0.1) ++within;
        }
        report.per_record.push_back(std::move(result));
    }
    report.accuracy = report.total == 0 ? 0.0
                                        : static_cast<double>(report.correct) /
                                              static_cast<double>(report.total);
    if (any_wstar) {
        report.within_tenth = static_cast<double>(within) / static_cast<double>(report.total);
    }
    return report;
}

std::string format_report(const EvalReport& report, std::span<const EvalRecord> records) {
    std::ostringstream out;
    out << "records:   " << report.total << "\n";
    out << "correct:   " << report.correct << "\n";
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.1f%%", report.baseline * 100.0);
    out << "baseline:  " << buffer << "\n";
    std::snprintf(buffer, sizeof(buffer), "%.1f%%", report.accuracy * 100.0);
    out << "accuracy:  " << buffer << "\n";
    if (report.within_tenth) {
        std::snprintf(buffer, sizeof(buffer), "%.1f%%", *report.within_tenth * 100.0);
        out << "w* within 0.1: " << buffer << "\n";
    } else {
        out << "w* within 0.1: n/a\n";
    }
    out << "\nper-record (index, child, heads, gold, chosen, verdict):\n";
    for (const auto& result : report.per_record) {
        const EvalRecord& record = records[result.record_index];
        out << "  " << result.record_index << "  " << record.child << "  [";
        for (std::size_t i = 0; i < record.heads.size(); ++i) {
            if (i > 0) out << " ";
            out << record.heads[i];
        }
        out << "]  gold=" << record.gold_index - 1 << "  chosen=" << result.decision.chosen_index
            << "  " << (result.correct ? "ok" : "wrong");
        if (result.wstar_diff) {
            std::snprintf(buffer, sizeof(buffer), "%.5f", *result.wstar_diff);
            out << "  |dw*|=" << buffer;
        }
        out << "\n";
    }
    return out.str();
}

std::string report_jsonl(const EvalReport& report, std::span<const EvalRecord> records) {
    std::ostringstream out;
    for (const auto& result : report.per_record) {
        const EvalRecord& record = records[result.record_index];
        nlohmann::json doc{{"index", result.record_index},
                           {"prep", record.preposition},
                           {"child", record.child},
                           {"heads", record.heads},
                           {"gold", record.gold_index - 1},
                           {"chosen", result.decision.chosen_index},
                           {"correct", result.correct},
                           {"defaulted", result.decision.defaulted}};
        if (result.wstar_diff) doc["wstar_diff"] = *result.wstar_diff;
        out << doc.dump() << '\n';
    }
    nlohmann::json summary{{"total", report.total},
                           {"correct", report.correct},
                           {"accuracy", report.accuracy},
                           {"baseline", report.baseline}};
    if (report.within_tenth) summary["within_tenth"] = *report.within_tenth;
    out << summary.dump() << '\n';
    return out.str();
}

}  // namespace patchcomm
