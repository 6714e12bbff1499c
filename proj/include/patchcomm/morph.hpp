#pragma once
// English noun inflection used to widen KB queries. Verbs arrive lemmatized
// from the parser and stay that way; nouns get their plural and singular
// surface forms. Rules are deliberately small and deterministic: an unknown
// irregular just yields a non-word variant, which finds no assertion.

#include <string>
#include <unordered_map>
#include <vector>

#include "patchcomm/concept.hpp"

namespace patchcomm {

class Inflector {
  public:
    // Built-in irregular table (child/children, sheep/sheep, ...).
    Inflector();

    static const Inflector& builtin();

    // Built-in table extended by "singular TAB plural" rows; later rows win.
    static Inflector from_file(const std::string& path);

    void add_exception(const std::string& singular, const std::string& plural);

    // Words already recognized as plural come back unchanged.
    std::string pluralize(const std::string& noun) const;
    std::string singularize(const std::string& noun) const;

  private:
    bool known_plural(const std::string& word) const;

    std::unordered_map<std::string, std::string> to_plural_;
    std::unordered_map<std::string, std::string> to_singular_;
    // -f/-fe nouns taking -ves, kept apart from the irregular table.
    std::unordered_map<std::string, std::string> f_to_ves_;
    std::unordered_map<std::string, std::string> ves_to_f_;
};

// Ordered, deduplicated; base always first.
struct VariantSet {
    ConceptKey base;
    std::vector<ConceptKey> variants;
};

VariantSet noun_variants(const ConceptKey& noun, const Inflector& inflector = Inflector::builtin());
VariantSet verb_variants(const ConceptKey& verb);

}  // namespace patchcomm
