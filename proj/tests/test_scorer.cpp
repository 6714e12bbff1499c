#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "patchcomm/errors.hpp"
#include "patchcomm/scorer.hpp"
#include "support.hpp"

using namespace patchcomm;

namespace {

const double kLn30 = std::log(30.0);

// Literal double-exponential evaluation of log(max softmax(exp(w))), usable
// whenever exp(exp(w)) stays finite. Long double keeps headroom.
long double naive_wstar(const std::vector<double>& weights) {
    std::vector<long double> inner;
    long double denom = 0.0L;
    long double numer = 0.0L;
    for (double w : weights) {
        long double e = std::exp(static_cast<long double>(w));
        long double ee = std::exp(e);
        denom += ee;
        numer = std::max(numer, ee);
    }
    return std::log(numer / denom);
}

std::vector<ScoredPair> synthetic_scores(std::mt19937& rng, std::size_t count) {
    const char* relations[] = {"HasA", "IsA", "UsedFor", "AtLocation", "RelatedTo"};
    std::uniform_int_distribution<int> rel(0, 4);
    std::uniform_int_distribution<int> discrete(0, 1);
    std::uniform_real_distribution<double> weight(0.0, 4.0);
    std::uniform_int_distribution<int> coarse(0, 8);
    std::vector<ScoredPair> scores;
    for (std::size_t i = 0; i < count; ++i) {
        // both continuous and tie-heavy discrete weights
        double w = discrete(rng) ? weight(rng) : coarse(rng) * 0.5;
        scores.push_back({"a" + std::to_string(i % 6), "b" + std::to_string(i / 6),
                          relations[rel(rng)], w});
    }
    return scores;
}

bool traces_equivalent(const AggregationTrace& x, const AggregationTrace& y) {
    return x.retained == y.retained && x.trimmed_low == y.trimmed_low &&
           x.trimmed_high == y.trimmed_high && x.w_star == y.w_star &&
           x.best_relation == y.best_relation;
}

}  // namespace

TEST_CASE("load_embeddings parses the plain text format") {
    std::istringstream in(
        "alpha 1 0 0 0\n"
        "beta 0 1 0 0\n"
        "gamma 0.5 -0.25 0 1e-1\n");
    auto store = load_embeddings(in);
    CHECK(store.size() == 3);
    CHECK(store.dim() == 4);
    auto gamma = store.find("gamma");
    REQUIRE(gamma.size() == 4);
    CHECK(gamma[1] == -0.25);
    CHECK(store.find("delta").empty());
}

TEST_CASE("load_embeddings accepts a count/dim header") {
    std::ostringstream text;
    text << "2 300\n";
    for (const char* term : {"alpha", "beta"}) {
        text << term;
        for (int i = 0; i < 300; ++i) text << " " << (i % 7) * 0.125;
        text << "\n";
    }
    std::istringstream in(text.str());
    auto store = load_embeddings(in);
    CHECK(store.size() == 2);
    CHECK(store.dim() == 300);
}

TEST_CASE("load_embeddings reports dimension mismatches by line") {
    std::istringstream in(
        "alpha 1 0 0 0\n"
        "beta 0 1 0\n");
    try {
        load_embeddings(in, "vectors.txt");
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("resolve backs off to underscore constituents") {
    std::istringstream in(
        "string 1 0\n"
        "instrument 0 1\n");
    auto store = load_embeddings(in);
    auto composite = store.resolve("string_instrument");
    REQUIRE(composite.has_value());
    CHECK((*composite)[0] == 0.5);
    CHECK((*composite)[1] == 0.5);
    CHECK_FALSE(store.resolve("piano").has_value());
}

TEST_CASE("nearest_neighbors basics") {
    EmbeddingStore store;
    store.insert("a", {1.0, 0.0});
    store.insert("b", {1.0, 0.0});  // exactly a's vector
    store.insert("c", {0.0, 1.0});
    store.insert("d", {-1.0, 0.0});

    auto k0 = nearest_neighbors(store, "a", 0);
    CHECK(k0.members == std::vector<ConceptKey>{"a"});

    auto k1 = nearest_neighbors(store, "a", 1);
    CHECK(k1.members == std::vector<ConceptKey>{"a", "b"});

    auto k3 = nearest_neighbors(store, "a", 3);
    CHECK(k3.members == std::vector<ConceptKey>{"a", "b", "c", "d"});

    CHECK_THROWS_AS(nearest_neighbors(store, "zzz", 1), UnknownConcept);
    CHECK_THROWS_AS(nearest_neighbors(store, "a", 4), ConfigError);
}

TEST_CASE("nearest_neighbors matches a full-scan oracle") {
    auto store = test::random_embeddings(100, 8, 31337);
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> pick(0, 99);

    auto cosine = [&store](const std::string& x, const std::string& y) {
        auto u = store.find(x);
        auto v = store.find(y);
        double dot = 0, nu = 0, nv = 0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            dot += u[i] * v[i];
            nu += u[i] * u[i];
            nv += v[i] * v[i];
        }
        return dot / std::sqrt(nu * nv);
    };

    for (int trial = 0; trial < 20; ++trial) {
        std::string center = "t" + std::to_string(pick(rng));
        auto hood = nearest_neighbors(store, center, 5);
        REQUIRE(hood.members.size() == 6);
        CHECK(hood.members[0] == center);

        std::vector<std::pair<double, std::string>> scored;
        for (const auto& term : store.terms()) {
            if (term == center) continue;
            scored.emplace_back(cosine(center, term), term);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first > y.first;
            return x.second < y.second;
        });
        for (int i = 0; i < 5; ++i) CHECK(hood.members[i + 1] == scored[i].second);
    }
}

TEST_CASE("train_relation_models singleton assertion") {
    EmbeddingStore store;
    store.insert("a", {1.0, 2.0, 3.0});
    store.insert("b", {2.0, 1.0, 5.0});
    auto kb = test::kb_from_jsonl(R"({"rel": "HasA", "start": "a", "end": "b", "weight": 2.0}
)");
    auto models = train_relation_models(store, kb, 1);
    REQUIRE(models.size() == 1);
    CHECK(models[0].relation == "HasA");
    CHECK(models[0].prototype == std::vector<double>{1.0, -1.0, 2.0});
    CHECK(models[0].mean_weight == 2.0);
    CHECK(models[0].support == 1);
}

TEST_CASE("train_relation_models weighted mean over two assertions") {
    EmbeddingStore store;
    store.insert("a", {0.0, 0.0});
    store.insert("b", {1.0, 0.0});
    store.insert("c", {0.0, 0.0});
    store.insert("d", {0.0, 2.0});
    auto kb = test::kb_from_jsonl(
        R"({"rel": "IsA", "start": "a", "end": "b", "weight": 1.0}
{"rel": "IsA", "start": "c", "end": "d", "weight": 3.0}
)");
    auto models = train_relation_models(store, kb, 1);
    REQUIRE(models.size() == 1);
    // (1*(1,0) + 3*(0,2)) / 4 = (0.25, 1.5), worked by hand
    CHECK(models[0].prototype == std::vector<double>{0.25, 1.5});
    CHECK(models[0].mean_weight == 2.0);
    CHECK(models[0].support == 2);
}

TEST_CASE("train_relation_models applies min_support and vocabulary filters") {
    EmbeddingStore store;
    store.insert("a", {1.0, 0.0});
    store.insert("b", {0.0, 1.0});
    auto kb = test::kb_from_jsonl(
        R"({"rel": "IsA", "start": "a", "end": "b", "weight": 1.0}
{"rel": "HasA", "start": "a", "end": "zzz", "weight": 5.0}
)");
    auto models = train_relation_models(store, kb, 1);
    REQUIRE(models.size() == 1);  // HasA's only assertion is out of vocabulary
    CHECK(models[0].relation == "IsA");

    CHECK_THROWS_AS(train_relation_models(store, kb, 2), EmptyModelSet);
}

TEST_CASE("relation models round-trip through the JSON file format") {
    auto store = load_embeddings_file(test::data_path("toy_embeddings.txt"));
    auto kb = load_kb(test::data_path("eval_kb.jsonl")).store;
    auto models = train_relation_models(store, kb, 1);
    REQUIRE(models.size() == 5);

    std::ostringstream out;
    save_relation_models(out, models);
    std::istringstream in(out.str());
    auto reloaded = load_relation_models(in);
    REQUIRE(reloaded.size() == models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        CHECK(reloaded[i].relation == models[i].relation);
        CHECK(reloaded[i].prototype == models[i].prototype);
        CHECK(reloaded[i].mean_weight == models[i].mean_weight);
        CHECK(reloaded[i].support == models[i].support);
    }

    std::istringstream garbage("{\"format\": \"something-else\"}");
    CHECK_THROWS_AS(load_relation_models(garbage), IngestError);
}

TEST_CASE("score_pair perfect prototype alignment") {
    EmbeddingStore store;
    store.insert("a", {0.0, 0.0});
    store.insert("b", {1.0, 1.0});
    std::vector<RelationModel> models = {{"Rel", {1.0, 1.0}, 2.0, 1}};
    auto score = score_pair(models, store, "a", "b");
    CHECK(score.relation == "Rel");
    CHECK(score.weight == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("score_pair orthogonal pair clamps to zero with lex-first relation") {
    EmbeddingStore store;
    store.insert("a", {0.0, 0.0});
    store.insert("b", {1.0, 0.0});
    std::vector<RelationModel> models = {{"Zeta", {0.0, 1.0}, 3.0, 1},
                                         {"Alpha", {0.0, -1.0}, 1.0, 1}};
    auto score = score_pair(models, store, "a", "b");
    CHECK(score.weight == 0.0);
    CHECK(score.relation == "Alpha");
}

TEST_CASE("score_pair is symmetric and matches brute force") {
    auto store = test::random_embeddings(20, 6, 777);
    std::vector<RelationModel> models;
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::uniform_real_distribution<double> mw(0.5, 3.0);
    for (const char* rel : {"HasA", "IsA", "UsedFor"}) {
        RelationModel model;
        model.relation = rel;
        for (int i = 0; i < 6; ++i) model.prototype.push_back(val(rng));
        model.mean_weight = mw(rng);
        model.support = 1;
        models.push_back(std::move(model));
    }

    auto cosine = [](const std::vector<double>& u, const std::vector<double>& v) {
        double dot = 0, nu = 0, nv = 0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            dot += u[i] * v[i];
            nu += u[i] * u[i];
            nv += v[i] * v[i];
        }
        if (nu == 0 || nv == 0) return 0.0;
        return dot / std::sqrt(nu * nv);
    };

    std::uniform_int_distribution<int> pick(0, 19);
    for (int trial = 0; trial < 50; ++trial) {
        std::string a = "t" + std::to_string(pick(rng));
        std::string b = "t" + std::to_string(pick(rng));
        auto forward = score_pair(models, store, a, b);
        auto backward = score_pair(models, store, b, a);
        CHECK(forward.relation == backward.relation);
        CHECK(forward.weight == backward.weight);

        // brute force over relations x argument orders
        auto va = *store.resolve(a);
        auto vb = *store.resolve(b);
        std::vector<double> ab(6), ba(6);
        for (int i = 0; i < 6; ++i) {
            ab[i] = vb[i] - va[i];
            ba[i] = -ab[i];
        }
        std::string best_rel;
        double best = -1.0;
        for (const auto& model : models) {
            for (const auto& offset : {ab, ba}) {
                double w = model.mean_weight * std::max(0.0, cosine(offset, model.prototype));
                if (w > best || (w == best && model.relation < best_rel)) {
                    best = w;
                    best_rel = model.relation;
                }
            }
        }
        CHECK(forward.relation == best_rel);
        CHECK(forward.weight == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("w* of a constant vector is -ln n") {
    std::vector<double> thirty(30, 1.7);
    CHECK(wstar_from_weights(thirty) == doctest::Approx(-kLn30).epsilon(1e-12));
    std::vector<double> zeros(30, 0.0);
    CHECK(wstar_from_weights(zeros) == doctest::Approx(-kLn30).epsilon(1e-12));
}

TEST_CASE("w* frozen value for [1.0 x 29, 3.0 x 1]") {
    std::vector<double> weights(29, 1.0);
    weights.push_back(3.0);
    // -log(29 * exp(e - e^3) + 1), evaluated at 40 digits
    const double expected = -8.315622465822833e-07;
    double stable = wstar_from_weights(weights);
    CHECK(stable == doctest::Approx(expected).epsilon(1e-9));
    CHECK(static_cast<double>(naive_wstar(weights)) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("w* stays in (-ln n, 0] on random vectors and matches the naive form") {
    std::mt19937 rng(20260809);
    std::uniform_real_distribution<double> weight(0.0, 4.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> weights(30);
        for (double& w : weights) w = weight(rng);
        double stable = wstar_from_weights(weights);
        CHECK(stable > -kLn30);
        CHECK(stable <= 0.0);
        CHECK(std::abs(stable - static_cast<double>(naive_wstar(weights))) < 1e-9);
    }
}

TEST_CASE("w* strictly increases in the unique maximum") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> weight(0.0, 3.0);
    std::uniform_real_distribution<double> bump(0.05, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> weights(30);
        for (double& w : weights) w = weight(rng);
        auto max_it = std::max_element(weights.begin(), weights.end());
        *max_it += 0.01;  // make the maximum unique
        double before = wstar_from_weights(weights);
        *max_it += bump(rng);
        double after = wstar_from_weights(weights);
        CHECK(after > before);
    }
}

TEST_CASE("w* is not shift-invariant") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> weight(0.0, 2.0);
    std::vector<double> weights(30);
    for (double& w : weights) w = weight(rng);
    CHECK(wstar_from_weights(weights) !=
          wstar_from_weights([&] {
              auto shifted = weights;
              for (double& w : shifted) w += 0.5;
              return shifted;
          }()));
}

TEST_CASE("aggregate_from_scores trims three from each end") {
    std::mt19937 rng(2024);
    auto scores = synthetic_scores(rng, 36);
    auto trace = aggregate_from_scores(scores, 3);
    CHECK(trace.pair_scores.size() == 36);
    CHECK(trace.retained.size() == 30);
    CHECK(trace.trimmed_low.size() == 3);
    CHECK(trace.trimmed_high.size() == 3);
    CHECK(std::is_sorted(trace.retained.begin(), trace.retained.end()));
    // trimmed_low <= retained <= trimmed_high elementwise across boundaries
    CHECK(trace.trimmed_low.back() <= trace.retained.front());
    CHECK(trace.retained.back() <= trace.trimmed_high.front());

    CHECK_THROWS_AS(aggregate_from_scores(std::vector<ScoredPair>(6), 3), ConfigError);
}

TEST_CASE("aggregation is invariant under permutation of pair scores") {
    std::mt19937 rng(20260809);
    for (int trial = 0; trial < 200; ++trial) {
        auto scores = synthetic_scores(rng, 36);
        auto reference = aggregate_from_scores(scores, 3);
        for (int shuffle = 0; shuffle < 3; ++shuffle) {
            std::shuffle(scores.begin(), scores.end(), rng);
            auto permuted = aggregate_from_scores(scores, 3);
            CHECK(traces_equivalent(reference, permuted));
        }
    }
}

TEST_CASE("aggregate_wstar produces the full 6x6 trace on the toy fixture") {
    auto store = load_embeddings_file(test::data_path("toy_embeddings.txt"));
    auto kb = load_kb(test::data_path("eval_kb.jsonl")).store;
    auto models = train_relation_models(store, kb, 1);

    auto trace = aggregate_wstar(models, store, "string", "guitar");
    CHECK(trace.pair_scores.size() == 36);
    CHECK(trace.retained.size() == 30);
    CHECK(trace.w_star > -kLn30);
    CHECK(trace.w_star <= 0.0);
    CHECK(!trace.best_relation.empty());
    CHECK(trace.pair_scores.front().a == "string");
    CHECK(trace.pair_scores.front().b == "guitar");

    // the relation attached to the maximal retained weight
    double max_retained = trace.retained.back();
    bool found = false;
    for (const auto& pair : trace.pair_scores) {
        if (pair.weight == max_retained && pair.relation == trace.best_relation) found = true;
    }
    CHECK(found);

    CHECK_THROWS_AS(aggregate_wstar(models, store, "string", "guitar", 1, 3), ConfigError);
    CHECK_THROWS_AS(aggregate_wstar(models, store, "xyzzy", "guitar"), UnknownConcept);
}

TEST_CASE("PrototypeScorer scores deterministically") {
    auto store = load_embeddings_file(test::data_path("toy_embeddings.txt"));
    auto kb = load_kb(test::data_path("eval_kb.jsonl")).store;
    auto models = train_relation_models(store, kb, 1);
    PrototypeScorer scorer(store, models);

    auto first = scorer.score("fork", "eat");
    auto second = scorer.score("fork", "eat");
    CHECK(first.w_star == second.w_star);
    CHECK(first.best_relation == second.best_relation);
    CHECK(traces_equivalent(first, second));
}
