#include "patchcomm/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "patchcomm/errors.hpp"

namespace patchcomm {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

class Lexer {
  public:
    explicit Lexer(std::string_view text) : text_(text) {}

    struct Token {
        enum class Type { lparen, rparen, atom, string, end };
        Type type = Type::end;
        std::string text;
        std::size_t line = 1;
        std::size_t col = 1;
    };

    Token next() {
        skip_space();
        Token token;
        token.line = line_;
        token.col = col_;
        if (pos_ >= text_.size()) {
            token.type = Token::Type::end;
            return token;
        }
        char c = text_[pos_];
        if (c == '(') {
            advance();
            token.type = Token::Type::lparen;
            return token;
        }
        if (c == ')') {
            advance();
            token.type = Token::Type::rparen;
            return token;
        }
        if (c == '"') {
            advance();
            token.type = Token::Type::string;
            while (pos_ < text_.size() && text_[pos_] != '"') {
                char d = text_[pos_];
                if (d == '\\' && pos_ + 1 < text_.size()) {
                    advance();
                    d = text_[pos_];
                }
                token.text.push_back(d);
                advance();
            }
            if (pos_ >= text_.size()) {
                throw MalformedRequest("unterminated string literal", token.line, token.col);
            }
            advance();  // closing quote
            return token;
        }
        token.type = Token::Type::atom;
        while (pos_ < text_.size() && !is_delimiter(text_[pos_])) {
            token.text.push_back(text_[pos_]);
            advance();
        }
        return token;
    }

  private:
    static bool is_delimiter(char c) {
        return c == '(' || c == ')' || c == '"' || std::isspace(static_cast<unsigned char>(c)) != 0;
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) {
            advance();
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

class Parser {
  public:
    explicit Parser(std::string_view text) : lexer_(text) { shift(); }

    bool at_end() const { return lookahead_.type == Lexer::Token::Type::end; }

    SExprNode parse_node() {
        Lexer::Token token = lookahead_;
        switch (token.type) {
            case Lexer::Token::Type::end:
                throw MalformedRequest("unexpected end of input", token.line, token.col);
            case Lexer::Token::Type::rparen:
                throw MalformedRequest("unbalanced ')'", token.line, token.col);
            case Lexer::Token::Type::string: {
                shift();
                SExprNode node = SExprNode::string(std::move(token.text));
                node.line = token.line;
                node.col = token.col;
                return node;
            }
            case Lexer::Token::Type::atom: {
                shift();
                SExprNode node = token.text.front() == ':' ? SExprNode::keyword(std::move(token.text))
                                                           : SExprNode::symbol(std::move(token.text));
                node.line = token.line;
                node.col = token.col;
                return node;
            }
            case Lexer::Token::Type::lparen: {
                shift();
                SExprNode node = SExprNode::list({});
                node.line = token.line;
                node.col = token.col;
                while (lookahead_.type != Lexer::Token::Type::rparen) {
                    if (lookahead_.type == Lexer::Token::Type::end) {
                        throw MalformedRequest("unbalanced '(': missing ')'", token.line, token.col);
                    }
                    node.items.push_back(parse_node());
                }
                shift();  // consume ')'
                return node;
            }
        }
        throw MalformedRequest("unrecognized token", token.line, token.col);
    }

    void expect_end() {
        if (!at_end()) {
            throw MalformedRequest("trailing content after expression", lookahead_.line,
                                   lookahead_.col);
        }
    }

  private:
    void shift() { lookahead_ = lexer_.next(); }

    Lexer lexer_;
    Lexer::Token lookahead_;
};

void print_node(const SExprNode& node, std::string& out) {
    switch (node.kind) {
        case SExprNode::Kind::symbol:
        case SExprNode::Kind::keyword:
            out += node.text;
            return;
        case SExprNode::Kind::string:
            out.push_back('"');
            for (char c : node.text) {
                if (c == '"' || c == '\\') out.push_back('\\');
                out.push_back(c);
            }
            out.push_back('"');
            return;
        case SExprNode::Kind::list:
            out.push_back('(');
            for (std::size_t i = 0; i < node.items.size(); ++i) {
                if (i > 0) out.push_back(' ');
                print_node(node.items[i], out);
            }
            out.push_back(')');
            return;
    }
}

bool is_keyword(const SExprNode& node, std::string_view name) {
    return node.kind == SExprNode::Kind::keyword && iequals(node.text, name);
}

bool is_tagged_list(const SExprNode& node, std::string_view tag) {
    return node.kind == SExprNode::Kind::list && !node.items.empty() &&
           node.items.front().kind == SExprNode::Kind::symbol &&
           iequals(node.items.front().text, tag);
}

std::string atom_value(const SExprNode& node, std::string_view field) {
    if (node.kind == SExprNode::Kind::string || node.kind == SExprNode::Kind::symbol) {
        return node.text;
    }
    throw MalformedRequest("value of " + std::string(field) + " must be an atom", node.line,
                           node.col);
}

// Keyword/value pairs after the node tag; unknown keywords are skipped.
struct Plist {
    std::vector<std::pair<std::string, std::string>> entries;  // keyword (lowercased) -> value
    std::optional<std::string> get(std::string_view key) const {
        for (const auto& [k, v] : entries) {
            if (k == key) return v;
        }
        return std::nullopt;
    }
};

Plist read_plist(const SExprNode& list, std::size_t first_item) {
    Plist plist;
    std::size_t i = first_item;
    while (i < list.items.size()) {
        const SExprNode& key = list.items[i];
        if (key.kind != SExprNode::Kind::keyword) {
            throw MalformedRequest("expected a :keyword", key.line, key.col);
        }
        if (i + 1 >= list.items.size()) {
            throw MalformedRequest("keyword " + key.text + " has no value", key.line, key.col);
        }
        std::string lowered;
        for (char c : key.text) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        plist.entries.emplace_back(lowered, atom_value(list.items[i + 1], key.text));
        i += 2;
    }
    return plist;
}

ConceptKey normalized_field(const std::string& value, const SExprNode& where,
                            std::string_view field) {
    try {
        return normalize_concept(value);
    } catch (const InvalidConcept&) {
        throw MalformedRequest("empty " + std::string(field) + " value", where.line, where.col);
    }
}

Candidate parse_candidate(const SExprNode& node) {
    if (node.kind != SExprNode::Kind::list || node.items.empty() ||
        node.items.front().kind != SExprNode::Kind::symbol) {
        throw MalformedRequest("candidate attachment must be a tagged list", node.line, node.col);
    }
    const std::string& tag = node.items.front().text;
    Plist plist = read_plist(node, 1);
    Candidate candidate;
    if (iequals(tag, "V")) {
        candidate.kind = CandidateKind::verb;
        auto verb = plist.get(":verb");
        if (!verb) throw MalformedRequest("V node is missing :verb", node.line, node.col);
        candidate.head = normalized_field(*verb, node, ":verb");
    } else if (iequals(tag, "NP")) {
        candidate.kind = CandidateKind::noun_phrase;
        auto noun = plist.get(":noun");
        if (!noun) throw MalformedRequest("NP node is missing :noun", node.line, node.col);
        candidate.head = normalized_field(*noun, node, ":noun");
        candidate.determiner = plist.get(":det");
    } else if (iequals(tag, "PP")) {
        candidate.kind = CandidateKind::prep_phrase;
        auto noun = plist.get(":noun");
        auto prep = plist.get(":prep");
        if (!prep) throw MalformedRequest("PP node is missing :prep", node.line, node.col);
        if (!noun) throw MalformedRequest("PP node is missing :noun", node.line, node.col);
        candidate.head = normalized_field(*noun, node, ":noun");
        candidate.preposition = *prep;
        candidate.determiner = plist.get(":det");
    } else {
        throw MalformedRequest("unknown node tag '" + tag + "'", node.line, node.col);
    }
    return candidate;
}

}  // namespace

SExprNode SExprNode::symbol(std::string text) {
    SExprNode node;
    node.kind = Kind::symbol;
    node.text = std::move(text);
    return node;
}

SExprNode SExprNode::keyword(std::string text) {
    SExprNode node;
    node.kind = Kind::keyword;
    node.text = std::move(text);
    return node;
}

SExprNode SExprNode::string(std::string text) {
    SExprNode node;
    node.kind = Kind::string;
    node.text = std::move(text);
    return node;
}

SExprNode SExprNode::list(std::vector<SExprNode> items) {
    SExprNode node;
    node.kind = Kind::list;
    node.items = std::move(items);
    return node;
}

bool operator==(const SExprNode& a, const SExprNode& b) {
    return a.kind == b.kind && a.text == b.text && a.items == b.items;
}

SExprNode parse_sexpr(std::string_view text) {
    Parser parser(text);
    SExprNode node = parser.parse_node();
    parser.expect_end();
    return node;
}

std::vector<SExprNode> parse_sexprs(std::string_view text) {
    Parser parser(text);
    std::vector<SExprNode> nodes;
    while (!parser.at_end()) nodes.push_back(parser.parse_node());
    return nodes;
}

std::string print_sexpr(const SExprNode& node) {
    std::string out;
    print_node(node, out);
    return out;
}

AmbiguityRequest request_from_sexpr(const SExprNode& node) {
    if (node.kind != SExprNode::Kind::list || node.items.empty() ||
        !is_keyword(node.items.front(), ":ambig-pp")) {
        throw MalformedRequest("expected an (:ambig-PP ...) message", node.line, node.col);
    }

    const SExprNode* pp_node = nullptr;
    const SExprNode* attachments_node = nullptr;
    std::size_t i = 1;
    while (i < node.items.size()) {
        const SExprNode& item = node.items[i];
        if (is_tagged_list(item, "PP") && pp_node == nullptr) {
            pp_node = &item;
            ++i;
        } else if (is_keyword(item, ":possible-attachments")) {
            if (i + 1 >= node.items.size()) {
                throw MalformedRequest(":possible-attachments has no value", item.line, item.col);
            }
            attachments_node = &node.items[i + 1];
            i += 2;
        } else if (item.kind == SExprNode::Kind::keyword) {
            if (i + 1 >= node.items.size()) {
                throw MalformedRequest("keyword " + item.text + " has no value", item.line,
                                       item.col);
            }
            i += 2;  // unrecognized keyword/value pair: ignore
        } else {
            throw MalformedRequest("unexpected element in :ambig-PP message", item.line, item.col);
        }
    }
    if (pp_node == nullptr) {
        throw MalformedRequest("missing (PP :prep ... :noun ...) node", node.line, node.col);
    }
    if (attachments_node == nullptr) {
        throw MalformedRequest("missing :possible-attachments", node.line, node.col);
    }
    if (attachments_node->kind != SExprNode::Kind::list) {
        throw MalformedRequest(":possible-attachments must be a list", attachments_node->line,
                               attachments_node->col);
    }
    if (attachments_node->items.empty()) {
        throw MalformedRequest(":possible-attachments is empty", attachments_node->line,
                               attachments_node->col);
    }

    AmbiguityRequest request;
    Plist pp = read_plist(*pp_node, 1);
    auto prep = pp.get(":prep");
    auto noun = pp.get(":noun");
    if (!prep) throw MalformedRequest("PP node is missing :prep", pp_node->line, pp_node->col);
    if (!noun) throw MalformedRequest("PP node is missing :noun", pp_node->line, pp_node->col);
    request.preposition = *prep;
    request.pp_noun = normalized_field(*noun, *pp_node, ":noun");
    request.pp_determiner = pp.get(":det");
    for (const auto& item : attachments_node->items) {
        request.candidates.push_back(parse_candidate(item));
    }
    return request;
}

AmbiguityRequest parse_request(std::string_view text) {
    return request_from_sexpr(parse_sexpr(text));
}

std::string serialize_decision(const AttachmentDecision& decision,
                               const AmbiguityRequest& request) {
    const Candidate& chosen = request.candidates.at(decision.chosen_index);
    const CandidateScore& score = decision.scores.at(decision.chosen_index);

    std::string out = "(:attach-to " + std::to_string(decision.chosen_index);
    out += " :kind " + to_string(chosen.kind);
    out += " :head ";
    SExprNode head = SExprNode::string(chosen.head);
    out += print_sexpr(head);
    if (score.source != ScoreSource::none && score.relation && score.weight) {
        out += " :relation " + print_sexpr(SExprNode::string(*score.relation));
        out += " :weight " + format_number(*score.weight);
    }
    out += " :source " + to_string(score.source) + ")";
    return out;
}

std::string render_triples(std::span<const Triple> base,
                           std::span<const AttachmentLine> attachments,
                           std::span<const QuantityLine> quantities) {
    std::vector<Triple> lines(base.begin(), base.end());
    for (const auto& attachment : attachments) {
        lines.push_back({attachment.head, attachment.prep, attachment.noun});
    }
    for (const auto& quantity : quantities) {
        lines.push_back({quantity.noun, "has_quantity", quantity.quantity});
    }

    std::size_t w1 = 0, w2 = 0, w3 = 0;
    for (const auto& line : lines) {
        w1 = std::max(w1, line.subject.size());
        w2 = std::max(w2, line.relation.size());
        w3 = std::max(w3, line.object.size());
    }
    auto centered = [](const std::string& text, std::size_t width) {
        std::size_t pad = width - text.size();
        std::size_t left = pad / 2;
        return std::string(left, ' ') + text + std::string(pad - left, ' ');
    };
    std::string out;
    for (const auto& line : lines) {
        out += "[" + line.subject + std::string(w1 - line.subject.size(), ' ') + "   " +
               centered(line.relation, w2) + "   " + centered(line.object, w3) + "]";
        out += '\n';
    }
    return out;
}

std::string format_number(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    std::string out(buffer, ptr);
    if (out.find('.') == std::string::npos && out.find('e') == std::string::npos &&
        out.find("inf") == std::string::npos && out.find("nan") == std::string::npos) {
        out += ".0";
    }
    return out;
}

}  // namespace patchcomm
