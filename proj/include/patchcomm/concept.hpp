#pragma once
// Concept labels. A ConceptKey is a normalized English concept term:
// lowercase, no whitespace (internal runs become single underscores), no
// surrounding punctuation, never empty. Normalization is idempotent.

#include <string>
#include <string_view>

namespace patchcomm {

using ConceptKey = std::string;

// Throws InvalidConcept when nothing is left after stripping.
ConceptKey normalize_concept(std::string_view raw);

// True iff normalize_concept(text) == text.
bool is_normalized(std::string_view text);

}  // namespace patchcomm
