#include "doctest.h"
#include "tabtax/error.hpp"
#include "tabtax/turtle.hpp"

using namespace tabtax;
using namespace tabtax::turtle;

TEST_CASE("prefixes, a, and object lists") {
    const auto doc = parse(R"(
        @prefix ex: <http://ex.org/> .
        PREFIX owl: <http://www.w3.org/2002/07/owl#>
        ex:A a owl:Class ; ex:p ex:B , ex:C .
    )");
    REQUIRE(doc.triples.size() == 3);
    CHECK(doc.triples[0].subject.is("http://ex.org/A"));
    CHECK(doc.triples[0].predicate.is(std::string(rdf_ns) + "type"));
    CHECK(doc.triples[0].object.is("http://www.w3.org/2002/07/owl#Class"));
    CHECK(doc.triples[2].object.is("http://ex.org/C"));
    CHECK(doc.prefixes.at("ex") == "http://ex.org/");
}

TEST_CASE("literals") {
    const auto doc = parse(R"(
        @prefix : <http://ex.org/> .
        @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
        :s :p "a\"b\n" , 'single' , "chat"@fr , "4.4"^^xsd:decimal , 12 , -1.5 , 2e3 , true ,
              """long
"quoted" text""" .
    )");
    REQUIRE(doc.triples.size() == 9);
    const auto& o = [&](int i) -> const Term& { return doc.triples[i].object; };
    CHECK(o(0).value == "a\"b\n");
    CHECK(o(0).datatype.empty());
    CHECK(o(1).value == "single");
    CHECK(o(2).lang == "fr");
    CHECK(o(3).value == "4.4");
    CHECK(o(3).datatype == std::string(xsd_ns) + "decimal");
    CHECK(o(4).datatype == std::string(xsd_ns) + "integer");
    CHECK(o(5).datatype == std::string(xsd_ns) + "decimal");
    CHECK(o(6).datatype == std::string(xsd_ns) + "double");
    CHECK(o(7).datatype == std::string(xsd_ns) + "boolean");
    CHECK(o(8).value == "long\n\"quoted\" text");
}

TEST_CASE("blank nodes and collections") {
    const auto doc = parse(R"(
        @prefix : <http://ex.org/> .
        :s :p [ :q 1 ] ; :list ( :a :b ) ; :empty () .
        _:x :r :s .
    )");
    // [ :q 1 ], s p b, two cells with first/rest each, s list head, s empty nil, _:x r s
    CHECK(doc.triples.size() == 1 + 1 + 4 + 1 + 1 + 1);
    int firsts = 0;
    bool nil_object = false;
    for (const auto& t : doc.triples) {
        firsts += t.predicate.is(std::string(rdf_ns) + "first") ? 1 : 0;
        if (t.predicate.is("http://ex.org/empty")) nil_object = t.object.is(std::string(rdf_ns) + "nil");
    }
    CHECK(firsts == 2);
    CHECK(nil_object);
    CHECK(doc.triples.back().subject.is_blank());
}

TEST_CASE("base and relative IRIs") {
    const auto doc = parse("@base <http://ex.org/dir/> . <a> <p> <#frag> .");
    REQUIRE(doc.triples.size() == 1);
    CHECK(doc.triples[0].subject.value == "http://ex.org/dir/a");
    CHECK(doc.triples[0].object.value == "http://ex.org/dir/#frag");
}

TEST_CASE("syntax errors carry a position") {
    try {
        parse("@prefix : <http://ex.org/> .\n:s :p .");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse("undeclared:x <p> <o> ."), ParseError);
    CHECK_THROWS_AS(parse("<s> <p> \"open"), ParseError);
    CHECK_THROWS_AS(parse("<s> <p> <o>"), ParseError);
}

TEST_CASE("escape_string round-trips through the parser") {
    const std::string text = "tab\there \"q\" back\\slash\nline";
    const auto doc = parse("<s> <p> \"" + escape_string(text) + "\" .");
    REQUIRE(doc.triples.size() == 1);
    CHECK(doc.triples[0].object.value == text);
}
