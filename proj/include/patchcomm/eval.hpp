#pragma once
// Evaluation harness over the standard PP-attachment dataset layout: five
// parallel line-aligned files (preposition, PP child noun, space-separated
// candidate heads, head count, 1-based gold head index). Every record is run
// through the resolver as an ambiguity request whose candidates are the heads
// in dataset order; heads carry no POS tag, so each gets the union of its
// noun and verb variant sets.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patchcomm/resolver.hpp"

namespace patchcomm {

struct EvalRecord {
    std::string preposition;
    ConceptKey child;
    std::vector<ConceptKey> heads;
    std::size_t n_heads = 0;
    std::size_t gold_index = 0;  // 1-based into heads
};

struct DatasetFiles {
    std::string preps;
    std::string children;
    std::string heads;
    std::string nheads;
    std::string labels;

    // The published layout: <prefix>.preps.words, <prefix>.children.words,
    // <prefix>.heads.words, <prefix>.nheads, <prefix>.labels
    static DatasetFiles with_prefix(const std::string& prefix);
};

inline const std::string kDefaultDatasetPrefix = "wsj.23.txt.dep.pp";

std::vector<EvalRecord> load_dataset(const std::string& dir,
                                     const DatasetFiles& files =
                                         DatasetFiles::with_prefix(kDefaultDatasetPrefix));

std::vector<EvalRecord> filter_records(std::span<const EvalRecord> records,
                                       const std::string& preposition, std::size_t max_heads);

// Expected accuracy of a uniform random head choice: mean of 1/n_heads.
double baseline(std::span<const EvalRecord> records);

struct RecordResult {
    std::size_t record_index = 0;
    AttachmentDecision decision;
    bool correct = false;
    // |w*(picked) - w*(gold)|, when both candidates carry fallback scores
    std::optional<double> wstar_diff;
};

struct EvalReport {
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    double baseline = 0.0;
    // fraction of all records answered wrongly with picked w* within 0.1 of
    // gold w*; absent in modes that never produce w*
    std::optional<double> within_tenth;
    std::vector<RecordResult> per_record;
};

EvalReport run_eval(std::span<const EvalRecord> records, const KbStore* kb,
                    const RelationScorer* scorer, BackendMode mode,
                    const Inflector& inflector = Inflector::builtin());

std::string format_report(const EvalReport& report, std::span<const EvalRecord> records);
std::string report_jsonl(const EvalReport& report, std::span<const EvalRecord> records);

}  // namespace patchcomm
