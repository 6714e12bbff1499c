#include "patchcomm/kb.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "patchcomm/errors.hpp"

namespace patchcomm {

namespace {

constexpr std::size_t kMaxSkipDetails = 100;

// Unordered pair key; '\t' cannot occur inside a normalized concept.
std::string pair_key(const ConceptKey& a, const ConceptKey& b) {
    return a <= b ? a + '\t' + b : b + '\t' + a;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        auto next = line.find(sep, pos);
        if (next == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return fields;
}

// "/c/en/string/n" -> (en, string); sense suffixes are dropped.
std::optional<std::pair<std::string, std::string>> parse_concept_uri(std::string_view uri) {
    auto segments = split(uri, '/');
    // leading '/' yields an empty first segment
    if (segments.size() < 4 || !segments[0].empty() || segments[1] != "c") return std::nullopt;
    if (segments[2].empty() || segments[3].empty()) return std::nullopt;
    return std::make_pair(std::string(segments[2]), std::string(segments[3]));
}

std::optional<std::string> parse_relation_uri(std::string_view uri) {
    auto segments = split(uri, '/');
    if (segments.size() < 3 || !segments[0].empty() || segments[1] != "r") return std::nullopt;
    if (segments.back().empty()) return std::nullopt;
    return std::string(segments.back());
}

struct LineOutcome {
    std::optional<Assertion> assertion;
    std::string skip_reason;  // set when assertion is absent
};

LineOutcome parse_fixture_line(const std::string& line) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        return {std::nullopt, std::string("invalid JSON: ") + e.what()};
    }
    if (!doc.is_object() || !doc.contains("rel") || !doc.contains("start") ||
        !doc.contains("end") || !doc.contains("weight")) {
        return {std::nullopt, "fixture object must have rel/start/end/weight"};
    }
    if (!doc["rel"].is_string() || !doc["start"].is_string() || !doc["end"].is_string() ||
        !doc["weight"].is_number()) {
        return {std::nullopt, "fixture field has wrong type"};
    }
    double weight = doc["weight"].get<double>();
    if (weight < 0.0) return {std::nullopt, "negative weight"};
    try {
        return {Assertion{doc["rel"].get<std::string>(),
                          normalize_concept(doc["start"].get<std::string>()),
                          normalize_concept(doc["end"].get<std::string>()), weight},
                {}};
    } catch (const InvalidConcept& e) {
        return {std::nullopt, e.what()};
    }
}

LineOutcome parse_dump_line(const std::string& line) {
    auto fields = split(line, '\t');
    if (fields.size() < 5) return {std::nullopt, "expected 5 tab-separated fields"};

    auto relation = parse_relation_uri(fields[1]);
    if (!relation) return {std::nullopt, "bad relation URI"};
    auto start = parse_concept_uri(fields[2]);
    auto end = parse_concept_uri(fields[3]);
    if (!start || !end) return {std::nullopt, "bad concept URI"};
    if (start->first != "en" || end->first != "en") return {std::nullopt, "non-English concept"};

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(fields[4]);
    } catch (const nlohmann::json::exception& e) {
        return {std::nullopt, std::string("invalid metadata JSON: ") + e.what()};
    }
    if (!meta.is_object() || !meta.contains("weight") || !meta["weight"].is_number()) {
        return {std::nullopt, "metadata has no numeric weight"};
    }
    double weight = meta["weight"].get<double>();
    if (weight < 0.0) return {std::nullopt, "negative weight"};

    try {
        return {Assertion{*relation, normalize_concept(start->second),
                          normalize_concept(end->second), weight},
                {}};
    } catch (const InvalidConcept& e) {
        return {std::nullopt, e.what()};
    }
}

}  // namespace

std::string SkipReport::summary() const {
    std::string out = std::to_string(lines_read) + " read, " + std::to_string(kept) + " kept";
    if (skipped > 0) out += ", " + std::to_string(skipped) + " skipped";
    return out;
}

void KbStore::add(Assertion assertion) {
    auto index = static_cast<std::uint32_t>(assertions_.size());
    by_pair_[pair_key(assertion.start, assertion.end)].push_back(index);
    assertions_.push_back(std::move(assertion));
}

std::optional<Assertion> KbStore::best_assertion(const ConceptKey& a, const ConceptKey& b) const {
    auto it = by_pair_.find(pair_key(a, b));
    if (it == by_pair_.end()) return std::nullopt;
    const Assertion* best = nullptr;
    for (auto index : it->second) {
        const Assertion& cur = assertions_[index];
        if (best == nullptr || cur.weight > best->weight ||
            (cur.weight == best->weight &&
             std::tie(cur.relation, cur.start, cur.end) <
                 std::tie(best->relation, best->start, best->end))) {
            best = &cur;
        }
    }
    if (best == nullptr) return std::nullopt;
    return *best;
}

void KbStore::save_fixture(std::ostream& out) const {
    for (const auto& a : assertions_) {
        nlohmann::json doc{{"rel", a.relation}, {"start", a.start}, {"end", a.end}, {"weight", a.weight}};
        out << doc.dump() << '\n';
    }
}

IngestResult ingest_dump(std::istream& in, const std::string& source) {
    IngestResult result;
    result.store.source_ = source;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        ++result.report.lines_read;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;  // blank line

        LineOutcome outcome = line[first] == '{' ? parse_fixture_line(line) : parse_dump_line(line);
        if (outcome.assertion) {
            result.store.add(std::move(*outcome.assertion));
            ++result.report.kept;
        } else {
            ++result.report.skipped;
            if (result.report.details.size() < kMaxSkipDetails) {
                result.report.details.emplace_back(lineno, outcome.skip_reason);
            }
        }
    }
    return result;
}

IngestResult load_kb(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open KB file: " + path);
    return ingest_dump(in, path);
}

}  // namespace patchcomm
