#pragma once
// Parser-consultation wire format. Requests arrive as one s-expression per
// message:
//
//   (:ambig-PP
//       (PP :prep "with" :det "one" :noun "string")
//    :possible-attachments
//       ((V :verb "play")
//        (NP :det "the" :noun "guitar")))
//
// Replies go back as
//
//   (:attach-to 1 :kind NP :head "guitar" :relation "HasA" :weight 2.8284 :source kb)
//
// with :relation/:weight omitted for defaulted decisions. Tags and keywords
// match case-insensitively; unrecognized keyword/value pairs are ignored so
// richer parser emissions still parse.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patchcomm/resolver.hpp"

namespace patchcomm {

struct SExprNode {
    enum class Kind { symbol, keyword, string, list };

    Kind kind = Kind::list;
    std::string text;              // atoms only
    std::vector<SExprNode> items;  // lists only
    std::size_t line = 0;
    std::size_t col = 0;

    static SExprNode symbol(std::string text);
    static SExprNode keyword(std::string text);
    static SExprNode string(std::string text);
    static SExprNode list(std::vector<SExprNode> items);

    // Structural equality; source positions are ignored.
    friend bool operator==(const SExprNode& a, const SExprNode& b);
};

// Exactly one expression (trailing whitespace allowed). Throws MalformedRequest.
SExprNode parse_sexpr(std::string_view text);

// Zero or more expressions, in order.
std::vector<SExprNode> parse_sexprs(std::string_view text);

std::string print_sexpr(const SExprNode& node);

AmbiguityRequest parse_request(std::string_view text);
AmbiguityRequest request_from_sexpr(const SExprNode& node);

// Needs the request for the chosen candidate's kind and head.
std::string serialize_decision(const AttachmentDecision& decision,
                               const AmbiguityRequest& request);

struct Triple {
    std::string subject;
    std::string relation;
    std::string object;
};

struct AttachmentLine {
    std::string head;
    std::string prep;
    std::string noun;
};

struct QuantityLine {
    std::string noun;
    std::string quantity;
};

// One bracketed, column-aligned triple per line: the base skeleton, then
// [chosen-head prep noun] per attachment, then [noun has_quantity n] lines.
std::string render_triples(std::span<const Triple> base,
                           std::span<const AttachmentLine> attachments,
                           std::span<const QuantityLine> quantities);

// Shortest round-trip decimal form, always with a '.' or exponent.
std::string format_number(double value);

}  // namespace patchcomm
