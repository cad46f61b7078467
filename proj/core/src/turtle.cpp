#include "tabtax/turtle.hpp"

#include <cctype>
#include <cstdint>

#include "tabtax/error.hpp"

namespace tabtax::turtle {
namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

bool is_name_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '-' || c >= 0x80; }

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Document run() {
        if (text_.starts_with("\xEF\xBB\xBF")) advance(3);
        skip_ws();
        while (!eof()) {
            statement();
            skip_ws();
        }
        return std::move(doc_);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
    std::size_t blank_counter_ = 0;
    Document doc_;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, col_); }

    bool eof() const { return pos_ >= text_.size(); }
    char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }

    void advance(std::size_t n = 1) {
        for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
            if (text_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    char get() {
        if (eof()) fail("unexpected end of input");
        const char c = text_[pos_];
        advance();
        return c;
    }

    void skip_ws() {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '#') {
                while (!eof() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        advance();
    }

    bool keyword_ci(std::string_view kw) const {
        if (pos_ + kw.size() > text_.size()) return false;
        for (std::size_t i = 0; i < kw.size(); ++i) {
            if (std::toupper(static_cast<unsigned char>(text_[pos_ + i])) != kw[i]) return false;
        }
        const char next = peek(kw.size());
        return !is_name_char(static_cast<unsigned char>(next)) && next != ':';
    }

    void statement() {
        if (peek() == '@') {
            advance();
            if (text_.substr(pos_).starts_with("prefix")) {
                advance(6);
                prefix_decl();
            } else if (text_.substr(pos_).starts_with("base")) {
                advance(4);
                base_decl();
            } else {
                fail("unknown directive");
            }
            expect('.');
            return;
        }
        if (keyword_ci("PREFIX")) {
            advance(6);
            prefix_decl();
            return;
        }
        if (keyword_ci("BASE")) {
            advance(4);
            base_decl();
            return;
        }
        triples();
        expect('.');
    }

    void prefix_decl() {
        skip_ws();
        std::string name;
        while (!eof() && peek() != ':') {
            const char c = get();
            if (!is_name_char(static_cast<unsigned char>(c)) && c != '.') fail("bad prefix name");
            name += c;
        }
        expect(':');
        skip_ws();
        doc_.prefixes[name] = iri_ref();
    }

    void base_decl() {
        skip_ws();
        doc_.base = iri_ref();
    }

    std::string resolve(const std::string& iri) const {
        if (doc_.base.empty()) return iri;
        const auto colon = iri.find(':');
        const auto slash = iri.find('/');
        if (colon != std::string::npos && (slash == std::string::npos || colon < slash)) return iri;
        if (iri.empty()) return doc_.base;
        if (iri.front() == '#') return doc_.base.substr(0, doc_.base.find('#')) + iri;
        const auto last = doc_.base.find_last_of("/#");
        return (last == std::string::npos ? doc_.base : doc_.base.substr(0, last + 1)) + iri;
    }

    std::uint32_t hex(std::size_t digits) {
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < digits; ++i) {
            const char c = get();
            v <<= 4;
            if (c >= '0' && c <= '9') {
                v |= static_cast<std::uint32_t>(c - '0');
            } else if (c >= 'a' && c <= 'f') {
                v |= static_cast<std::uint32_t>(c - 'a' + 10);
            } else if (c >= 'A' && c <= 'F') {
                v |= static_cast<std::uint32_t>(c - 'A' + 10);
            } else {
                fail("bad hex escape");
            }
        }
        return v;
    }

    std::string iri_ref() {
        if (peek() != '<') fail("expected IRI");
        advance();
        std::string out;
        for (;;) {
            const char c = get();
            if (c == '>') break;
            if (c == '\\') {
                const char e = get();
                if (e == 'u') {
                    append_utf8(out, hex(4));
                } else if (e == 'U') {
                    append_utf8(out, hex(8));
                } else {
                    fail("bad escape in IRI");
                }
            } else if (c == ' ' || c == '\n' || c == '<' || c == '"') {
                fail("bad character in IRI");
            } else {
                out += c;
            }
        }
        return resolve(out);
    }

    Term prefixed_name() {
        std::string prefix;
        while (!eof() && peek() != ':') {
            const char c = peek();
            if (!is_name_char(static_cast<unsigned char>(c)) && c != '.') fail("bad prefixed name");
            prefix += c;
            advance();
        }
        if (eof()) fail("unexpected end of input");
        advance();  // ':'
        std::string local;
        for (;;) {
            const char c = peek();
            if (is_name_char(static_cast<unsigned char>(c)) || c == ':' ||
                (c == '.' && (is_name_char(static_cast<unsigned char>(peek(1))) || peek(1) == ':'))) {
                local += c;
                advance();
            } else if (c == '%') {
                local += c;
                advance();
                local += get();
                local += get();
            } else if (c == '\\') {
                advance();
                local += get();
            } else {
                break;
            }
        }
        const auto it = doc_.prefixes.find(prefix);
        if (it == doc_.prefixes.end()) fail("undeclared prefix '" + prefix + "'");
        return Term{Term::Kind::iri, it->second + local, {}, {}};
    }

    Term fresh_blank() { return Term{Term::Kind::blank, "b" + std::to_string(blank_counter_++), {}, {}}; }

    Term iri_term() {
        skip_ws();
        if (peek() == '<') return Term{Term::Kind::iri, iri_ref(), {}, {}};
        return prefixed_name();
    }

    void triples() {
        skip_ws();
        Term subject;
        if (peek() == '[') {
            subject = blank_property_list();
            skip_ws();
            if (peek() == '.') return;
        } else {
            subject = subject_term();
        }
        predicate_object_list(subject);
    }

    Term subject_term() {
        skip_ws();
        if (peek() == '_' && peek(1) == ':') return blank_label();
        if (peek() == '(') return collection();
        return iri_term();
    }

    Term blank_label() {
        advance(2);
        std::string name;
        while (!eof() && (is_name_char(static_cast<unsigned char>(peek())) ||
                          (peek() == '.' && is_name_char(static_cast<unsigned char>(peek(1)))))) {
            name += peek();
            advance();
        }
        if (name.empty()) fail("empty blank node label");
        return Term{Term::Kind::blank, "l_" + name, {}, {}};
    }

    Term predicate() {
        skip_ws();
        if (peek() == 'a' && !is_name_char(static_cast<unsigned char>(peek(1))) && peek(1) != ':') {
            advance();
            return Term{Term::Kind::iri, std::string(rdf_ns) + "type", {}, {}};
        }
        return iri_term();
    }

    void predicate_object_list(const Term& subject) {
        for (;;) {
            const Term pred = predicate();
            for (;;) {
                const Term obj = object();
                doc_.triples.push_back({subject, pred, obj});
                skip_ws();
                if (peek() != ',') break;
                advance();
            }
            skip_ws();
            if (peek() != ';') return;
            while (peek() == ';') {
                advance();
                skip_ws();
            }
            const char c = peek();
            if (c == '.' || c == ']' || eof()) return;
        }
    }

    Term blank_property_list() {
        advance();  // '['
        Term node = fresh_blank();
        skip_ws();
        if (peek() != ']') predicate_object_list(node);
        expect(']');
        return node;
    }

    Term collection() {
        advance();  // '('
        std::vector<Term> items;
        for (;;) {
            skip_ws();
            if (peek() == ')') {
                advance();
                break;
            }
            if (eof()) fail("unterminated collection");
            items.push_back(object());
        }
        const Term nil{Term::Kind::iri, std::string(rdf_ns) + "nil", {}, {}};
        if (items.empty()) return nil;
        const Term first{Term::Kind::iri, std::string(rdf_ns) + "first", {}, {}};
        const Term rest{Term::Kind::iri, std::string(rdf_ns) + "rest", {}, {}};
        std::vector<Term> nodes;
        for (std::size_t i = 0; i < items.size(); ++i) nodes.push_back(fresh_blank());
        for (std::size_t i = 0; i < items.size(); ++i) {
            doc_.triples.push_back({nodes[i], first, items[i]});
            doc_.triples.push_back({nodes[i], rest, i + 1 < items.size() ? nodes[i + 1] : nil});
        }
        return nodes.front();
    }

    Term object() {
        skip_ws();
        const char c = peek();
        if (c == '[') return blank_property_list();
        if (c == '(') return collection();
        if (c == '_' && peek(1) == ':') return blank_label();
        if (c == '"' || c == '\'') return string_literal();
        if (c == '+' || c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) return numeric_literal();
        if (keyword_ci("TRUE") && text_.substr(pos_, 4) == "true") {
            advance(4);
            return Term{Term::Kind::literal, "true", std::string(xsd_ns) + "boolean", {}};
        }
        if (keyword_ci("FALSE") && text_.substr(pos_, 5) == "false") {
            advance(5);
            return Term{Term::Kind::literal, "false", std::string(xsd_ns) + "boolean", {}};
        }
        return iri_term();
    }

    Term numeric_literal() {
        std::string lex;
        if (peek() == '+' || peek() == '-') lex += get();
        bool dot = false;
        bool exp = false;
        while (!eof()) {
            const char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                lex += get();
            } else if (c == '.' && !dot && !exp && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                dot = true;
                lex += get();
            } else if ((c == 'e' || c == 'E') && !exp) {
                exp = true;
                lex += get();
                if (peek() == '+' || peek() == '-') lex += get();
            } else {
                break;
            }
        }
        if (lex.empty() || lex == "+" || lex == "-") fail("bad numeric literal");
        const char* type = exp ? "double" : dot ? "decimal" : "integer";
        return Term{Term::Kind::literal, lex, std::string(xsd_ns) + type, {}};
    }

    Term string_literal() {
        const char q = get();
        const bool long_form = peek() == q && peek(1) == q;
        if (long_form) advance(2);
        std::string out;
        for (;;) {
            if (eof()) fail("unterminated string");
            const char c = peek();
            if (long_form) {
                if (c == q && peek(1) == q && peek(2) == q) {
                    advance(3);
                    break;
                }
            } else if (c == q) {
                advance();
                break;
            } else if (c == '\n' || c == '\r') {
                fail("newline in string");
            }
            advance();
            if (c != '\\') {
                out += c;
                continue;
            }
            const char e = get();
            switch (e) {
                case 't': out += '\t'; break;
                case 'b': out += '\b'; break;
                case 'n': out += '\n'; break;
                case 'r': out += '\r'; break;
                case 'f': out += '\f'; break;
                case '"': out += '"'; break;
                case '\'': out += '\''; break;
                case '\\': out += '\\'; break;
                case 'u': append_utf8(out, hex(4)); break;
                case 'U': append_utf8(out, hex(8)); break;
                default: fail("bad string escape");
            }
        }
        Term t{Term::Kind::literal, std::move(out), {}, {}};
        if (peek() == '@') {
            advance();
            while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) t.lang += get();
            if (t.lang.empty()) fail("empty language tag");
        } else if (peek() == '^' && peek(1) == '^') {
            advance(2);
            t.datatype = iri_term().value;
        }
        return t;
    }
};

}  // namespace

Document parse(std::string_view text) { return Parser(text).run(); }

std::string escape_string(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace tabtax::turtle
