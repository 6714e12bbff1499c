#include "patchcomm/morph.hpp"

#include <algorithm>
#include <fstream>
#include <string_view>

#include "patchcomm/errors.hpp"

namespace patchcomm {

namespace {

constexpr std::pair<const char*, const char*> kIrregulars[] = {
    {"child", "children"}, {"foot", "feet"},   {"sheep", "sheep"}, {"person", "people"},
    {"tooth", "teeth"},    {"mouse", "mice"},  {"man", "men"},     {"woman", "women"},
};

constexpr const char* kVesNouns[] = {
    "calf", "elf", "half", "knife", "leaf", "life", "loaf",
    "scarf", "self", "shelf", "thief", "wife", "wolf",
};

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() &&
           std::string_view(s).substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

}  // namespace

Inflector::Inflector() {
    for (const auto& [sing, plur] : kIrregulars) add_exception(sing, plur);
    for (const char* f : kVesNouns) {
        std::string word(f);
        std::string plural = ends_with(word, "fe") ? word.substr(0, word.size() - 2) + "ves"
                                                   : word.substr(0, word.size() - 1) + "ves";
        f_to_ves_[word] = plural;
        ves_to_f_[plural] = word;
    }
}

const Inflector& Inflector::builtin() {
    static const Inflector instance;
    return instance;
}

Inflector Inflector::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open exception table: " + path);
    Inflector inflector;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw IngestError("exception table " + path + " line " + std::to_string(lineno) +
                              ": expected \"singular TAB plural\"");
        }
        inflector.add_exception(normalize_concept(line.substr(0, tab)),
                                normalize_concept(line.substr(tab + 1)));
    }
    return inflector;
}

void Inflector::add_exception(const std::string& singular, const std::string& plural) {
    to_plural_[singular] = plural;
    to_singular_[plural] = singular;
}

bool Inflector::known_plural(const std::string& word) const {
    return to_singular_.count(word) != 0 || ves_to_f_.count(word) != 0;
}

std::string Inflector::singularize(const std::string& noun) const {
    if (auto it = to_singular_.find(noun); it != to_singular_.end()) return it->second;
    if (to_plural_.count(noun) != 0) return noun;  // known singular
    if (auto it = ves_to_f_.find(noun); it != ves_to_f_.end()) return it->second;
    if (ends_with(noun, "ies") && noun.size() >= 5) {
        return noun.substr(0, noun.size() - 3) + "y";
    }
    if (ends_with(noun, "xes") || ends_with(noun, "zes") || ends_with(noun, "ches") ||
        ends_with(noun, "shes") || ends_with(noun, "sses")) {
        return noun.substr(0, noun.size() - 2);
    }
    if (ends_with(noun, "s") && !ends_with(noun, "ss") && noun.size() >= 4) {
        return noun.substr(0, noun.size() - 1);
    }
    return noun;
}

std::string Inflector::pluralize(const std::string& noun) const {
    if (auto it = to_plural_.find(noun); it != to_plural_.end()) return it->second;
    if (known_plural(noun) || singularize(noun) != noun) return noun;  // already plural
    if (auto it = f_to_ves_.find(noun); it != f_to_ves_.end()) return it->second;
    if (ends_with(noun, "s") || ends_with(noun, "x") || ends_with(noun, "z") ||
        ends_with(noun, "ch") || ends_with(noun, "sh")) {
        return noun + "es";
    }
    if (ends_with(noun, "y") && noun.size() >= 2 && !is_vowel(noun[noun.size() - 2])) {
        return noun.substr(0, noun.size() - 1) + "ies";
    }
    return noun + "s";
}

VariantSet noun_variants(const ConceptKey& noun, const Inflector& inflector) {
    VariantSet set{noun, {noun}};
    auto add = [&set](const std::string& variant) {
        if (std::find(set.variants.begin(), set.variants.end(), variant) == set.variants.end()) {
            set.variants.push_back(variant);
        }
    };
    add(inflector.pluralize(noun));
    add(inflector.singularize(noun));
    return set;
}

VariantSet verb_variants(const ConceptKey& verb) {
    return VariantSet{verb, {verb}};
}

}  // namespace patchcomm
