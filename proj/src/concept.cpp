#include "patchcomm/concept.hpp"

#include <cctype>

#include "patchcomm/errors.hpp"

namespace patchcomm {

namespace {

bool strippable(unsigned char c) {
    return std::isspace(c) != 0 || std::ispunct(c) != 0;
}

}  // namespace

ConceptKey normalize_concept(std::string_view raw) {
    std::size_t begin = 0;
    std::size_t end = raw.size();
    while (begin < end && strippable(static_cast<unsigned char>(raw[begin]))) ++begin;
    while (end > begin && strippable(static_cast<unsigned char>(raw[end - 1]))) --end;

    std::string out;
    out.reserve(end - begin);
    bool pending_gap = false;
    for (std::size_t i = begin; i < end; ++i) {
        unsigned char c = static_cast<unsigned char>(raw[i]);
        if (std::isspace(c) != 0) {
            pending_gap = true;
            continue;
        }
        if (pending_gap) {
            out.push_back('_');
            pending_gap = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    if (out.empty()) {
        throw InvalidConcept("concept label is empty after normalization: \"" + std::string(raw) + "\"");
    }
    return out;
}

bool is_normalized(std::string_view text) {
    if (text.empty()) return false;
    try {
        return normalize_concept(text) == text;
    } catch (const InvalidConcept&) {
        return false;
    }
}

}  // namespace patchcomm
