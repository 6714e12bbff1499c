#pragma once
// Fallback relation scorer: predicts a (relation, weight) for any concept
// pair the embedding store can resolve, so the resolver always has an answer
// when the KB comes up empty.
//
// Pipeline: embeddings + KB assertions -> per-relation prototype models
// (weighted mean of end-start offsets) -> score_pair -> neighborhood
// aggregation with outlier trimming and the w* score.
//
// For a pair (a, b): take each concept's k nearest neighbors (neighborhood of
// k+1), score all (k+1)^2 cross pairs, drop the `trim` highest and lowest
// weights, and aggregate the rest as
//     w* = log max_i softmax(exp(w))_i
// evaluated in the stable form  -log sum_j exp(exp(w_j) - exp(w_max)).
// w* always lies in [-ln n, 0] for n retained weights, hitting -ln n only
// when all weights are equal.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "patchcomm/concept.hpp"
#include "patchcomm/kb.hpp"

namespace patchcomm {

class EmbeddingStore {
  public:
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return terms_.size(); }
    const std::vector<std::string>& terms() const { return terms_; }

    bool contains(const std::string& term) const { return index_.count(term) != 0; }
    std::span<const double> find(const std::string& term) const;  // exact lookup; empty if absent

    // Exact lookup, then underscore-split backoff averaging the constituent
    // vectors that are in vocabulary. nullopt when nothing resolves.
    std::optional<std::vector<double>> resolve(const std::string& term) const;

    void insert(const std::string& term, std::vector<double> vector);

  private:
    std::size_t dim_ = 0;
    std::vector<std::string> terms_;
    std::vector<double> data_;  // row-major, size() * dim_
    std::unordered_map<std::string, std::size_t> index_;
};

// Text format: one "term v1 ... vd" line per term, optional "count dim"
// header. Dimension is fixed by the first data line; IngestError names the
// offending line on any mismatch.
EmbeddingStore load_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingStore load_embeddings_file(const std::string& path);

struct Neighborhood {
    ConceptKey center;
    std::vector<ConceptKey> members;  // center first, then k nearest neighbors
};

// k distinct in-vocabulary terms with maximal cosine similarity to `term`
// (resolved with backoff), excluding the term itself; ties break toward the
// lexicographically smaller term. Throws UnknownConcept when `term` cannot be
// resolved, ConfigError when the vocabulary cannot supply k neighbors.
Neighborhood nearest_neighbors(const EmbeddingStore& store, const ConceptKey& term, std::size_t k);

struct RelationModel {
    std::string relation;
    std::vector<double> prototype;  // weight-weighted mean of end - start offsets
    double mean_weight = 0.0;
    std::size_t support = 0;
};

// One model per relation with at least min_support resolvable assertions,
// sorted by relation label. Throws EmptyModelSet when nothing qualifies.
std::vector<RelationModel> train_relation_models(const EmbeddingStore& store, const KbStore& kb,
                                                 std::size_t min_support);

void save_relation_models(std::ostream& out, std::span<const RelationModel> models);
std::vector<RelationModel> load_relation_models(std::istream& in);
std::vector<RelationModel> load_relation_models_file(const std::string& path);

struct PairScore {
    std::string relation;
    double weight = 0.0;
};

// max over relations and both argument orders of
//   mean_weight_r * max(0, cos(vec(second) - vec(first), prototype_r));
// ties go to the lexicographically first relation label.
PairScore score_pair(std::span<const RelationModel> models, const EmbeddingStore& store,
                     const ConceptKey& a, const ConceptKey& b);

struct ScoredPair {
    ConceptKey a;
    ConceptKey b;
    std::string relation;
    double weight = 0.0;
};

struct AggregationTrace {
    std::vector<ScoredPair> pair_scores;  // (k+1)^2 entries, generation order
    std::vector<double> retained;         // ascending, (k+1)^2 - 2*trim weights
    std::vector<double> trimmed_low;      // ascending
    std::vector<double> trimmed_high;     // ascending
    double w_star = 0.0;
    std::string best_relation;  // relation of the maximal retained weight
};

// Stable evaluation of log(max softmax(exp(w))). Throws ConfigError on empty input.
double wstar_from_weights(std::span<const double> weights);

// Trim + aggregate an existing score list. The derived fields depend only on
// the multiset of entries, never on their order.
AggregationTrace aggregate_from_scores(std::vector<ScoredPair> scores, std::size_t trim);

AggregationTrace aggregate_wstar(std::span<const RelationModel> models, const EmbeddingStore& store,
                                 const ConceptKey& a, const ConceptKey& b, std::size_t k = 5,
                                 std::size_t trim = 3);

// What the resolver needs from any fallback backend.
class RelationScorer {
  public:
    virtual ~RelationScorer() = default;
    virtual AggregationTrace score(const ConceptKey& a, const ConceptKey& b) const = 0;
};

class PrototypeScorer : public RelationScorer {
  public:
    PrototypeScorer(EmbeddingStore store, std::vector<RelationModel> models, std::size_t k = 5,
                    std::size_t trim = 3);

    AggregationTrace score(const ConceptKey& a, const ConceptKey& b) const override;

    const EmbeddingStore& store() const { return store_; }
    std::span<const RelationModel> models() const { return models_; }

  private:
    EmbeddingStore store_;
    std::vector<RelationModel> models_;
    std::size_t k_;
    std::size_t trim_;
};

}  // namespace patchcomm
