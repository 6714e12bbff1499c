#include "patchcomm/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "patchcomm/errors.hpp"

namespace patchcomm {

namespace {

constexpr int kModelFileVersion = 1;

double dot(std::span<const double> u, std::span<const double> v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
    return acc;
}

double norm(std::span<const double> u) {
    return std::sqrt(dot(u, u));
}

// Cosine similarity; 0 when either vector has zero norm.
double cosine(std::span<const double> u, std::span<const double> v) {
    double nu = norm(u);
    double nv = norm(v);
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot(u, v) / (nu * nv);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string token;
    while (ss >> token) out.push_back(std::move(token));
    return out;
}

}  // namespace

std::span<const double> EmbeddingStore::find(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return {};
    return std::span<const double>(data_.data() + it->second * dim_, dim_);
}

std::optional<std::vector<double>> EmbeddingStore::resolve(const std::string& term) const {
    auto exact = find(term);
    if (!exact.empty()) return std::vector<double>(exact.begin(), exact.end());

    std::vector<double> acc(dim_, 0.0);
    std::size_t found = 0;
    std::size_t pos = 0;
    while (pos <= term.size()) {
        auto next = term.find('_', pos);
        auto part = term.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        if (!part.empty()) {
            auto vec = find(part);
            if (!vec.empty()) {
                for (std::size_t i = 0; i < dim_; ++i) acc[i] += vec[i];
                ++found;
            }
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (found == 0) return std::nullopt;
    for (double& x : acc) x /= static_cast<double>(found);
    return acc;
}

void EmbeddingStore::insert(const std::string& term, std::vector<double> vector) {
    if (dim_ == 0) dim_ = vector.size();
    if (vector.size() != dim_) throw IngestError("embedding dimension mismatch for term: " + term);
    if (index_.count(term) != 0) return;  // first occurrence wins
    index_[term] = terms_.size();
    terms_.push_back(term);
    data_.insert(data_.end(), vector.begin(), vector.end());
}

EmbeddingStore load_embeddings(std::istream& in, const std::string& source) {
    EmbeddingStore store;
    std::string line;
    std::size_t lineno = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (first_content_line && tokens.size() == 2) {
            // "count dim" header
            first_content_line = false;
            continue;
        }
        first_content_line = false;
        if (tokens.size() < 2) {
            throw IngestError(source + " line " + std::to_string(lineno) +
                              ": expected \"term v1 ... vd\"");
        }
        std::vector<double> values;
        values.reserve(tokens.size() - 1);
        for (std::size_t i = 1; i < tokens.size(); ++i) {
            try {
                values.push_back(std::stod(tokens[i]));
            } catch (const std::exception&) {
                throw IngestError(source + " line " + std::to_string(lineno) +
                                  ": bad vector component \"" + tokens[i] + "\"");
            }
        }
        if (store.dim() != 0 && values.size() != store.dim()) {
            throw IngestError(source + " line " + std::to_string(lineno) + ": dimension " +
                              std::to_string(values.size()) + " != " + std::to_string(store.dim()));
        }
        store.insert(tokens[0], std::move(values));
    }
    if (store.size() == 0) throw IngestError(source + ": no embedding vectors found");
    return store;
}

EmbeddingStore load_embeddings_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open embedding file: " + path);
    return load_embeddings(in, path);
}

Neighborhood nearest_neighbors(const EmbeddingStore& store, const ConceptKey& term, std::size_t k) {
    auto center = store.resolve(term);
    if (!center) throw UnknownConcept("no embedding for concept: " + term);

    struct Scored {
        double similarity;
        const std::string* term;
    };
    std::vector<Scored> scored;
    scored.reserve(store.size());
    for (const auto& candidate : store.terms()) {
        if (candidate == term) continue;
        scored.push_back({cosine(*center, store.find(candidate)), &candidate});
    }
    if (scored.size() < k) {
        throw ConfigError("vocabulary of " + std::to_string(store.size()) +
                          " cannot supply " + std::to_string(k) + " neighbors");
    }
    auto better = [](const Scored& x, const Scored& y) {
        if (x.similarity != y.similarity) return x.similarity > y.similarity;
        return *x.term < *y.term;
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                      scored.end(), better);

    Neighborhood hood{term, {term}};
    for (std::size_t i = 0; i < k; ++i) hood.members.push_back(*scored[i].term);
    return hood;
}

std::vector<RelationModel> train_relation_models(const EmbeddingStore& store, const KbStore& kb,
                                                 std::size_t min_support) {
    struct Accumulator {
        std::vector<double> weighted_offset_sum;
        std::vector<double> offset_sum;
        double weight_sum = 0.0;
        std::size_t count = 0;
    };
    std::map<std::string, Accumulator> by_relation;  // ordered: output sorted by label

    for (const auto& assertion : kb.assertions()) {
        auto start_vec = store.resolve(assertion.start);
        if (!start_vec) continue;
        auto end_vec = store.resolve(assertion.end);
        if (!end_vec) continue;
        auto& acc = by_relation[assertion.relation];
        if (acc.count == 0) {
            acc.weighted_offset_sum.assign(store.dim(), 0.0);
            acc.offset_sum.assign(store.dim(), 0.0);
        }
        for (std::size_t i = 0; i < store.dim(); ++i) {
            double offset = (*end_vec)[i] - (*start_vec)[i];
            acc.weighted_offset_sum[i] += assertion.weight * offset;
            acc.offset_sum[i] += offset;
        }
        acc.weight_sum += assertion.weight;
        ++acc.count;
    }

    std::vector<RelationModel> models;
    for (auto& [relation, acc] : by_relation) {
        if (acc.count < min_support) continue;
        RelationModel model;
        model.relation = relation;
        model.support = acc.count;
        model.mean_weight = acc.weight_sum / static_cast<double>(acc.count);
        model.prototype.resize(store.dim());
        for (std::size_t i = 0; i < store.dim(); ++i) {
            // all-zero weights degrade to the unweighted mean
            model.prototype[i] = acc.weight_sum > 0.0
                                     ? acc.weighted_offset_sum[i] / acc.weight_sum
                                     : acc.offset_sum[i] / static_cast<double>(acc.count);
        }
        models.push_back(std::move(model));
    }
    if (models.empty()) {
        throw EmptyModelSet("no relation reaches min_support=" + std::to_string(min_support));
    }
    return models;
}

void save_relation_models(std::ostream& out, std::span<const RelationModel> models) {
    nlohmann::json doc;
    doc["format"] = "patchcomm-relation-models";
    doc["version"] = kModelFileVersion;
    doc["dim"] = models.empty() ? 0 : models.front().prototype.size();
    auto& list = doc["models"] = nlohmann::json::array();
    for (const auto& model : models) {
        list.push_back({{"relation", model.relation},
                        {"prototype", model.prototype},
                        {"mean_weight", model.mean_weight},
                        {"support", model.support}});
    }
    out << doc.dump(2) << '\n';
}

std::vector<RelationModel> load_relation_models(std::istream& in) {
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IngestError(std::string("invalid model file: ") + e.what());
    }
    if (doc.value("format", "") != "patchcomm-relation-models") {
        throw IngestError("not a relation-model file");
    }
    if (doc.value("version", 0) != kModelFileVersion) {
        throw IngestError("unsupported model file version");
    }
    std::size_t dim = doc.value("dim", std::size_t{0});
    std::vector<RelationModel> models;
    for (const auto& entry : doc.at("models")) {
        RelationModel model;
        model.relation = entry.at("relation").get<std::string>();
        model.prototype = entry.at("prototype").get<std::vector<double>>();
        model.mean_weight = entry.at("mean_weight").get<double>();
        model.support = entry.at("support").get<std::size_t>();
        if (model.prototype.size() != dim) {
            throw IngestError("prototype dimension mismatch for relation " + model.relation);
        }
        models.push_back(std::move(model));
    }
    return models;
}

std::vector<RelationModel> load_relation_models_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open model file: " + path);
    return load_relation_models(in);
}

PairScore score_pair(std::span<const RelationModel> models, const EmbeddingStore& store,
                     const ConceptKey& a, const ConceptKey& b) {
    auto vec_a = store.resolve(a);
    if (!vec_a) throw UnknownConcept("no embedding for concept: " + a);
    auto vec_b = store.resolve(b);
    if (!vec_b) throw UnknownConcept("no embedding for concept: " + b);

    std::vector<double> forward(store.dim());
    std::vector<double> backward(store.dim());
    for (std::size_t i = 0; i < store.dim(); ++i) {
        forward[i] = (*vec_b)[i] - (*vec_a)[i];
        backward[i] = -forward[i];
    }

    const RelationModel* best = nullptr;
    double best_weight = 0.0;
    for (const auto& model : models) {
        double similarity = std::max(cosine(forward, model.prototype),
                                     cosine(backward, model.prototype));
        double weight = model.mean_weight * std::max(0.0, similarity);
        if (best == nullptr || weight > best_weight ||
            (weight == best_weight && model.relation < best->relation)) {
            best = &model;
            best_weight = weight;
        }
    }
    if (best == nullptr) throw EmptyModelSet("score_pair called with no relation models");
    return PairScore{best->relation, best_weight};
}

double wstar_from_weights(std::span<const double> weights) {
    if (weights.empty()) throw ConfigError("w* needs at least one weight");
    std::vector<double> exps(weights.size());
    double exp_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        exps[i] = std::exp(weights[i]);
        exp_max = std::max(exp_max, exps[i]);
    }
    double sum = 0.0;
    for (double e : exps) {
        // e == exp_max covers the infinite case without producing inf - inf
        sum += e == exp_max ? 1.0 : std::exp(e - exp_max);
    }
    return -std::log(sum);
}

AggregationTrace aggregate_from_scores(std::vector<ScoredPair> scores, std::size_t trim) {
    if (scores.size() <= 2 * trim) {
        throw ConfigError("cannot trim " + std::to_string(trim) + " from each end of " +
                          std::to_string(scores.size()) + " pair scores");
    }
    std::vector<double> weights;
    weights.reserve(scores.size());
    for (const auto& s : scores) weights.push_back(s.weight);
    std::sort(weights.begin(), weights.end());

    AggregationTrace trace;
    trace.trimmed_low.assign(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(trim));
    trace.trimmed_high.assign(weights.end() - static_cast<std::ptrdiff_t>(trim), weights.end());
    trace.retained.assign(weights.begin() + static_cast<std::ptrdiff_t>(trim),
                          weights.end() - static_cast<std::ptrdiff_t>(trim));
    trace.w_star = wstar_from_weights(trace.retained);

    // The relation of the maximal retained weight; among equal weights take
    // the lexicographically smallest (relation, a, b) so the result does not
    // depend on the order the pairs were scored in.
    double max_retained = trace.retained.back();
    const ScoredPair* best = nullptr;
    for (const auto& s : scores) {
        if (s.weight != max_retained) continue;
        if (best == nullptr ||
            std::tie(s.relation, s.a, s.b) < std::tie(best->relation, best->a, best->b)) {
            best = &s;
        }
    }
    trace.best_relation = best->relation;
    trace.pair_scores = std::move(scores);
    return trace;
}

AggregationTrace aggregate_wstar(std::span<const RelationModel> models, const EmbeddingStore& store,
                                 const ConceptKey& a, const ConceptKey& b, std::size_t k,
                                 std::size_t trim) {
    std::size_t total = (k + 1) * (k + 1);
    if (total <= 2 * trim) {
        throw ConfigError("neighborhood of " + std::to_string(k + 1) + " gives " +
                          std::to_string(total) + " pairs, too few to trim 2*" +
                          std::to_string(trim));
    }
    Neighborhood hood_a = nearest_neighbors(store, a, k);
    Neighborhood hood_b = nearest_neighbors(store, b, k);

    std::vector<ScoredPair> scores;
    scores.reserve(total);
    for (const auto& member_a : hood_a.members) {
        for (const auto& member_b : hood_b.members) {
            PairScore score = score_pair(models, store, member_a, member_b);
            scores.push_back({member_a, member_b, score.relation, score.weight});
        }
    }
    return aggregate_from_scores(std::move(scores), trim);
}

PrototypeScorer::PrototypeScorer(EmbeddingStore store, std::vector<RelationModel> models,
                                 std::size_t k, std::size_t trim)
    : store_(std::move(store)), models_(std::move(models)), k_(k), trim_(trim) {}

AggregationTrace PrototypeScorer::score(const ConceptKey& a, const ConceptKey& b) const {
    return aggregate_wstar(models_, store_, a, b, k_, trim_);
}

}  // namespace patchcomm
