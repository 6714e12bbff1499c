#include "patchcomm/resolver.hpp"

#include <algorithm>

#include "patchcomm/errors.hpp"

namespace patchcomm {

namespace {

VariantSet candidate_variants(const Candidate& candidate, const Inflector& inflector) {
    return candidate.kind == CandidateKind::verb ? verb_variants(candidate.head)
                                                 : noun_variants(candidate.head, inflector);
}

// Earliest candidate wins ties; a scoreless candidate never wins while any
// candidate has a score.
std::size_t argmax_candidate(const std::vector<CandidateScore>& scores, bool& any_scored) {
    std::size_t best = 0;
    any_scored = false;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].source == ScoreSource::none) continue;
        if (!any_scored || *scores[i].weight > *scores[best].weight) {
            best = i;
            any_scored = true;
        }
    }
    return best;
}

std::vector<CandidateScore> kb_scores(const AmbiguityRequest& request, const KbStore& kb,
                                      const Inflector& inflector) {
    auto pairs = generate_pairs(request, inflector);
    std::vector<PairOutcome> outcomes;
    outcomes.reserve(pairs.size());
    for (const auto& pair : pairs) {
        outcomes.push_back({pair, kb.best_assertion(pair.pp_variant, pair.candidate_variant)});
    }
    return compress(request, outcomes);
}

std::vector<CandidateScore> fallback_scores(const AmbiguityRequest& request,
                                            const RelationScorer& scorer) {
    std::vector<CandidateScore> scores;
    scores.reserve(request.candidates.size());
    for (std::size_t i = 0; i < request.candidates.size(); ++i) {
        CandidateScore score;
        score.candidate_index = i;
        try {
            AggregationTrace trace = scorer.score(request.candidates[i].head, request.pp_noun);
            score.relation = trace.best_relation;
            score.weight = trace.w_star;
            score.source = ScoreSource::fallback;
        } catch (const UnknownConcept&) {
            score.source = ScoreSource::none;  // out of vocabulary even after backoff
        }
        scores.push_back(std::move(score));
    }
    return scores;
}

}  // namespace

std::vector<VariantPair> generate_pairs(const AmbiguityRequest& request,
                                        const Inflector& inflector) {
    VariantSet pp_variants = noun_variants(request.pp_noun, inflector);
    std::vector<VariantPair> pairs;
    for (std::size_t i = 0; i < request.candidates.size(); ++i) {
        VariantSet cand = candidate_variants(request.candidates[i], inflector);
        for (const auto& pp_variant : pp_variants.variants) {
            for (const auto& cand_variant : cand.variants) {
                pairs.push_back({i, pp_variant, cand_variant});
            }
        }
    }
    return pairs;
}

std::vector<CandidateScore> compress(const AmbiguityRequest& request,
                                     std::span<const PairOutcome> outcomes) {
    std::vector<CandidateScore> scores(request.candidates.size());
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i].candidate_index = i;

    for (const auto& outcome : outcomes) {
        if (!outcome.hit) continue;
        CandidateScore& score = scores.at(outcome.pair.candidate_index);
        if (score.source != ScoreSource::none && *score.weight >= outcome.hit->weight) continue;
        score.relation = outcome.hit->relation;
        score.weight = outcome.hit->weight;
        score.start_side = outcome.hit->start == outcome.pair.pp_variant ? StartSide::pp_noun
                                                                         : StartSide::candidate;
        score.source = ScoreSource::kb;
    }
    return scores;
}

AttachmentDecision decide(const AmbiguityRequest& request, const KbStore* kb,
                          const RelationScorer* scorer, BackendMode mode,
                          const Inflector& inflector) {
    if (request.candidates.empty()) {
        throw EmptyCandidates("ambiguity request has no candidate attachments");
    }
    if ((mode == BackendMode::kb_only || mode == BackendMode::hybrid) && kb == nullptr) {
        throw ConfigError("mode " + to_string(mode) + " requires a KB store");
    }
    if ((mode == BackendMode::fallback_only || mode == BackendMode::hybrid) && scorer == nullptr) {
        throw ConfigError("mode " + to_string(mode) + " requires a fallback scorer");
    }

    AttachmentDecision decision;
    decision.backend_mode = mode;

    if (mode == BackendMode::kb_only || mode == BackendMode::hybrid) {
        decision.scores = kb_scores(request, *kb, inflector);
        bool any = false;
        std::size_t best = argmax_candidate(decision.scores, any);
        if (any) {
            decision.chosen_index = best;
            return decision;
        }
        if (mode == BackendMode::kb_only) {
            decision.chosen_index = 0;
            decision.defaulted = true;
            return decision;
        }
        // hybrid: the KB answered nothing for any candidate
    }

    decision.scores = fallback_scores(request, *scorer);
    bool any = false;
    std::size_t best = argmax_candidate(decision.scores, any);
    decision.chosen_index = any ? best : 0;
    decision.defaulted = !any;
    return decision;
}

std::vector<AttachmentDecision> resolve_sequence(std::span<const AmbiguityRequest> requests,
                                                 const KbStore* kb, const RelationScorer* scorer,
                                                 BackendMode mode, const Inflector& inflector) {
    std::vector<AttachmentDecision> decisions;
    decisions.reserve(requests.size());
    for (const auto& request : requests) {
        decisions.push_back(decide(request, kb, scorer, mode, inflector));
    }
    return decisions;
}

std::string to_string(CandidateKind kind) {
    switch (kind) {
        case CandidateKind::verb: return "V";
        case CandidateKind::noun_phrase: return "NP";
        case CandidateKind::prep_phrase: return "PP";
    }
    return "?";
}

std::string to_string(ScoreSource source) {
    switch (source) {
        case ScoreSource::kb: return "kb";
        case ScoreSource::fallback: return "fallback";
        case ScoreSource::none: return "none";
    }
    return "?";
}

std::string to_string(BackendMode mode) {
    switch (mode) {
        case BackendMode::kb_only: return "kb-only";
        case BackendMode::fallback_only: return "fallback-only";
        case BackendMode::hybrid: return "hybrid";
    }
    return "?";
}

BackendMode backend_mode_from_string(const std::string& text) {
    if (text == "kb-only") return BackendMode::kb_only;
    if (text == "fallback-only") return BackendMode::fallback_only;
    if (text == "hybrid") return BackendMode::hybrid;
    throw ConfigError("unknown backend mode: " + text + " (expected kb-only, fallback-only or hybrid)");
}

}  // namespace patchcomm
