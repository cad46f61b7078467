#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tabtax::turtle {

inline constexpr std::string_view rdf_ns = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view rdfs_ns = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view owl_ns = "http://www.w3.org/2002/07/owl#";
inline constexpr std::string_view xsd_ns = "http://www.w3.org/2001/XMLSchema#";

struct Term {
    enum class Kind { iri, blank, literal };
    Kind kind = Kind::iri;
    std::string value;     // IRI, blank label, or literal lexical form
    std::string datatype;  // literals only; empty means xsd:string
    std::string lang;

    bool is_iri() const noexcept { return kind == Kind::iri; }
    bool is_blank() const noexcept { return kind == Kind::blank; }
    bool is_literal() const noexcept { return kind == Kind::literal; }
    bool is(std::string_view iri) const { return kind == Kind::iri && value == iri; }

    friend bool operator==(const Term&, const Term&) = default;
    friend auto operator<=>(const Term&, const Term&) = default;
};

struct Triple {
    Term subject;
    Term predicate;
    Term object;
    friend bool operator==(const Triple&, const Triple&) = default;
};

struct Document {
    std::map<std::string, std::string> prefixes;
    std::string base;
    std::vector<Triple> triples;
};

/// Parses Turtle 1.1. Throws ParseError with line and column.
Document parse(std::string_view text);

/// Escapes a string for use inside a double-quoted Turtle literal.
std::string escape_string(std::string_view text);

}  // namespace tabtax::turtle
