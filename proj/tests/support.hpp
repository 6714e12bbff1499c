#pragma once
// Shared helpers for the test suites.

#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "patchcomm/errors.hpp"
#include "patchcomm/kb.hpp"
#include "patchcomm/resolver.hpp"
#include "patchcomm/scorer.hpp"

namespace patchcomm::test {

inline KbStore kb_from_jsonl(const std::string& jsonl) {
    std::istringstream in(jsonl);
    return ingest_dump(in, "<test>").store;
}

// The worked-example store: the three assertions behind the two resolved
// sentences (string/guitar and finger/play).
inline const char* kPaperFixtureJsonl =
    R"({"rel": "AtLocation", "start": "string", "end": "guitar", "weight": 2.0}
{"rel": "HasA", "start": "guitar", "end": "strings", "weight": 2.8284}
{"rel": "RelatedTo", "start": "finger", "end": "play", "weight": 1.0}
)";

inline KbStore paper_fixture_kb() {
    return kb_from_jsonl(kPaperFixtureJsonl);
}

// Deterministic store: `count` terms named t0..t{count-1}, unit-scale values.
inline EmbeddingStore random_embeddings(std::size_t count, std::size_t dim, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    EmbeddingStore store;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> vec(dim);
        for (double& x : vec) x = dist(rng);
        store.insert("t" + std::to_string(i), std::move(vec));
    }
    return store;
}

inline std::string data_path(const std::string& relative) {
    return std::string(PATCHCOMM_DATA_DIR) + "/" + relative;
}

// Canned (relation, w*) answers keyed by unordered concept pair; unknown
// pairs throw like an out-of-vocabulary lookup would.
class TableScorer : public RelationScorer {
  public:
    void set(const ConceptKey& a, const ConceptKey& b, std::string relation, double w_star) {
        table_[key(a, b)] = {std::move(relation), w_star};
    }

    AggregationTrace score(const ConceptKey& a, const ConceptKey& b) const override {
        auto it = table_.find(key(a, b));
        if (it == table_.end()) throw UnknownConcept("no table entry for " + a + "/" + b);
        AggregationTrace trace;
        trace.best_relation = it->second.first;
        trace.w_star = it->second.second;
        return trace;
    }

  private:
    static std::pair<ConceptKey, ConceptKey> key(const ConceptKey& a, const ConceptKey& b) {
        return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
    }

    std::map<std::pair<ConceptKey, ConceptKey>, std::pair<std::string, double>> table_;
};

struct OracleOutcome {
    std::size_t chosen = 0;
    bool defaulted = false;
    std::vector<std::optional<double>> weights;
    std::vector<std::optional<std::string>> relations;
};

// Independent kb-only decision procedure: enumerate every variant pair and
// scan the raw assertion list directly, no store index, no compress().
inline OracleOutcome oracle_decide_kb(const AmbiguityRequest& request,
                                      const std::vector<Assertion>& all,
                                      const Inflector& inflector = Inflector::builtin()) {
    OracleOutcome outcome;
    auto pp_set = noun_variants(request.pp_noun, inflector);
    for (const auto& candidate : request.candidates) {
        auto cand_set = candidate.kind == CandidateKind::verb
                            ? verb_variants(candidate.head)
                            : noun_variants(candidate.head, inflector);
        std::optional<double> best_weight;
        std::optional<std::string> best_relation;
        for (const auto& pp_variant : pp_set.variants) {
            for (const auto& cand_variant : cand_set.variants) {
                const Assertion* pair_best = nullptr;
                for (const auto& x : all) {
                    bool connects = (x.start == pp_variant && x.end == cand_variant) ||
                                    (x.start == cand_variant && x.end == pp_variant);
                    if (!connects) continue;
                    if (pair_best == nullptr || x.weight > pair_best->weight ||
                        (x.weight == pair_best->weight &&
                         std::tie(x.relation, x.start, x.end) <
                             std::tie(pair_best->relation, pair_best->start, pair_best->end))) {
                        pair_best = &x;
                    }
                }
                if (pair_best != nullptr &&
                    (!best_weight || pair_best->weight > *best_weight)) {
                    best_weight = pair_best->weight;
                    best_relation = pair_best->relation;
                }
            }
        }
        outcome.weights.push_back(best_weight);
        outcome.relations.push_back(best_relation);
    }

    bool any = false;
    for (std::size_t i = 0; i < outcome.weights.size(); ++i) {
        if (!outcome.weights[i]) continue;
        if (!any || *outcome.weights[i] > *outcome.weights[outcome.chosen]) {
            outcome.chosen = i;
            any = true;
        }
    }
    outcome.defaulted = !any;
    if (!any) outcome.chosen = 0;
    return outcome;
}

// Random fixture + request pair for the oracle-equivalence property. Small
// vocabulary so that hits are common; coarse weights so that ties happen.
struct RandomKbCase {
    std::vector<Assertion> assertions;
    KbStore store;
    AmbiguityRequest request;
};

inline RandomKbCase random_kb_case(std::mt19937& rng, std::size_t max_assertions) {
    static const std::vector<std::string> nouns = {
        "string", "guitar",  "finger", "fork",  "knife", "telescope", "roof",  "house",
        "tree",   "branch",  "door",   "sheep", "child", "box",       "city",  "wolf",
        "person", "hammer",  "nail",   "wall",  "spoon", "soup",      "piano", "window"};
    static const std::vector<std::string> verbs = {"play", "eat", "see", "cut", "open", "fix"};
    static const std::vector<std::string> relations = {"HasA", "IsA", "AtLocation", "UsedFor",
                                                       "RelatedTo"};

    std::uniform_int_distribution<std::size_t> n_assertions(0, max_assertions);
    std::uniform_int_distribution<std::size_t> noun(0, nouns.size() - 1);
    std::uniform_int_distribution<std::size_t> verb(0, verbs.size() - 1);
    std::uniform_int_distribution<std::size_t> rel(0, relations.size() - 1);
    std::uniform_int_distribution<int> coarse(0, 12);
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_int_distribution<int> n_candidates(1, 4);
    std::uniform_int_distribution<int> inflect(0, 2);

    auto surface = [&](const std::string& base) {
        const auto& inflector = Inflector::builtin();
        int roll = inflect(rng);
        if (roll == 1) return inflector.pluralize(base);
        if (roll == 2) return inflector.singularize(base);
        return base;
    };

    RandomKbCase out;
    std::size_t n = n_assertions(rng);
    std::ostringstream jsonl;
    for (std::size_t i = 0; i < n; ++i) {
        std::string start = surface(nouns[noun(rng)]);
        std::string end = rng() % 4 == 0 ? verbs[verb(rng)] : surface(nouns[noun(rng)]);
        if (rng() % 2 == 0) std::swap(start, end);
        Assertion a{relations[rel(rng)], start, end, coarse(rng) * 0.25};
        out.assertions.push_back(a);
        jsonl << "{\"rel\": \"" << a.relation << "\", \"start\": \"" << a.start
              << "\", \"end\": \"" << a.end << "\", \"weight\": " << a.weight << "}\n";
    }
    out.store = kb_from_jsonl(jsonl.str());

    out.request.preposition = "with";
    out.request.pp_noun = surface(nouns[noun(rng)]);
    int candidates = n_candidates(rng);
    for (int i = 0; i < candidates; ++i) {
        Candidate candidate;
        switch (kind(rng)) {
            case 0:
                candidate.kind = CandidateKind::verb;
                candidate.head = verbs[verb(rng)];
                break;
            case 1:
                candidate.kind = CandidateKind::noun_phrase;
                candidate.head = surface(nouns[noun(rng)]);
                break;
            default:
                candidate.kind = CandidateKind::prep_phrase;
                candidate.head = surface(nouns[noun(rng)]);
                candidate.preposition = "with";
                break;
        }
        out.request.candidates.push_back(std::move(candidate));
    }
    return out;
}

}  // namespace patchcomm::test
