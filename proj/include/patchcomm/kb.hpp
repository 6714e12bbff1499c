#pragma once
// Assertion store over ConceptNet-style dumps.
//
// Two line formats are accepted, detected per line:
//   - tab-separated 5.x dump records:
//       <edge URI> TAB /r/<Relation> TAB /c/<lang>/<term>[/...] TAB /c/<lang>/<term>[/...] TAB <JSON metadata>
//     where the metadata carries a numeric "weight"; only records whose start
//     and end are both English concepts are kept, and sense suffixes on the
//     concept URIs are dropped.
//   - JSON fixture lines: {"rel": str, "start": str, "end": str, "weight": number}
//
// After ingestion the store is immutable and indexed by unordered concept
// pair, so queries in either argument order see the same assertions.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "patchcomm/concept.hpp"

namespace patchcomm {

struct Assertion {
    std::string relation;
    ConceptKey start;
    ConceptKey end;
    double weight = 0.0;  // >= 0; 1.0 means the assertion merely exists

    friend bool operator==(const Assertion&, const Assertion&) = default;
};

struct SkipReport {
    std::size_t lines_read = 0;
    std::size_t kept = 0;
    std::size_t skipped = 0;
    // (line number, reason); capped so huge dumps cannot bloat the report
    std::vector<std::pair<std::size_t, std::string>> details;

    std::string summary() const;  // e.g. "10 read, 9 kept, 1 skipped"
};

class KbStore;
struct IngestResult;
IngestResult ingest_dump(std::istream& in, const std::string& source = "<stream>");

class KbStore {
  public:
    std::size_t size() const { return assertions_.size(); }
    const std::string& source() const { return source_; }
    std::span<const Assertion> assertions() const { return assertions_; }

    // Highest-weighted assertion connecting {a, b} in either direction.
    // Ties resolve by relation label, then start, then end, lexicographically.
    std::optional<Assertion> best_assertion(const ConceptKey& a, const ConceptKey& b) const;

    // Canonical serialization: the JSON fixture format, one line per assertion.
    void save_fixture(std::ostream& out) const;

  private:
    friend IngestResult ingest_dump(std::istream& in, const std::string& source);

    void add(Assertion assertion);

    std::string source_;
    std::vector<Assertion> assertions_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> by_pair_;
};

struct IngestResult {
    KbStore store;
    SkipReport report;
};

// Opens and ingests a file; throws IngestError when it cannot be read.
IngestResult load_kb(const std::string& path);

}  // namespace patchcomm
