#pragma once
// The attachment decision procedure. An ambiguous PP arrives with an ordered
// list of candidate attachment sites (the parser's default preference
// first). Each candidate is scored against the PP noun: by the
// highest-weighted KB assertion over all noun-variant pairs, by the fallback
// scorer's w*, or by both (hybrid: KB first, fallback only when the KB is
// silent for every candidate — the two weight scales are not comparable).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patchcomm/concept.hpp"
#include "patchcomm/kb.hpp"
#include "patchcomm/morph.hpp"
#include "patchcomm/scorer.hpp"

namespace patchcomm {

enum class CandidateKind { verb, noun_phrase, prep_phrase };

enum class ScoreSource { kb, fallback, none };

// Which side of the query pair the winning assertion's start concept was on.
enum class StartSide { pp_noun, candidate };

enum class BackendMode { kb_only, fallback_only, hybrid };

struct Candidate {
    CandidateKind kind = CandidateKind::noun_phrase;
    ConceptKey head;  // verb lemma, NP noun, or inner PP noun
    std::optional<std::string> determiner;
    std::optional<std::string> preposition;  // prep-phrase candidates only
};

struct AmbiguityRequest {
    std::string preposition;
    ConceptKey pp_noun;
    std::optional<std::string> pp_determiner;
    std::vector<Candidate> candidates;  // parser-default preference order
};

struct CandidateScore {
    std::size_t candidate_index = 0;
    std::optional<std::string> relation;
    std::optional<double> weight;  // KB assertion weight, or w* from the fallback
    std::optional<StartSide> start_side;  // KB source only
    ScoreSource source = ScoreSource::none;
};

struct AttachmentDecision {
    std::size_t chosen_index = 0;
    std::vector<CandidateScore> scores;  // one per candidate
    BackendMode backend_mode = BackendMode::kb_only;
    bool defaulted = false;  // true when no knowledge informed the choice
};

struct VariantPair {
    std::size_t candidate_index = 0;
    ConceptKey pp_variant;
    ConceptKey candidate_variant;
};

// Cross the PP noun's variants with each candidate's variants (verbs stay
// lemmatized). Order: candidates as requested, PP variant major, candidate
// variant minor.
std::vector<VariantPair> generate_pairs(const AmbiguityRequest& request,
                                        const Inflector& inflector = Inflector::builtin());

struct PairOutcome {
    VariantPair pair;
    std::optional<Assertion> hit;
};

// One score per candidate: the maximum-weight hit over that candidate's
// variant pairs (earlier pair wins ties), source none when nothing hit.
std::vector<CandidateScore> compress(const AmbiguityRequest& request,
                                     std::span<const PairOutcome> outcomes);

AttachmentDecision decide(const AmbiguityRequest& request, const KbStore* kb,
                          const RelationScorer* scorer, BackendMode mode,
                          const Inflector& inflector = Inflector::builtin());

// Requests are independent; decisions come back in emission order.
std::vector<AttachmentDecision> resolve_sequence(std::span<const AmbiguityRequest> requests,
                                                 const KbStore* kb, const RelationScorer* scorer,
                                                 BackendMode mode,
                                                 const Inflector& inflector = Inflector::builtin());

std::string to_string(CandidateKind kind);
std::string to_string(ScoreSource source);
std::string to_string(BackendMode mode);
BackendMode backend_mode_from_string(const std::string& text);

}  // namespace patchcomm
