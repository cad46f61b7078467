#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tabtax/error.hpp"
#include "tabtax/taxonomy.hpp"

using namespace tabtax;

namespace {

std::size_t count_rows(const Table& t, const std::string& column, auto pred) {
    const std::size_t col = t.index_of(column);
    std::size_t n = 0;
    for (RowId r = 0; r < t.row_count(); ++r) {
        if (!t.is_missing(col, r) && pred(r, col)) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("root covers every row") {
    const auto t = test_support::iris();
    Taxonomy tax(t);
    CHECK(tax.size() == 1);
    CHECK(tax.extension(tax.root()).size() == 150);
    CHECK(tax.get(tax.root()).label == "iris");
    tax.relabel(tax.root(), "Iris");
    CHECK(tax.get(tax.root()).label == "Iris");
}

TEST_CASE("empty table root") {
    auto t = std::make_shared<Table>(load_table("a,b\n", TableFormat::csv, {}, "empty"));
    Taxonomy tax(t);
    CHECK(tax.extension(tax.root()).empty());
}

TEST_CASE("iris restriction subconcepts match a brute-force filter") {
    const auto t = test_support::iris();
    Taxonomy tax(t, "Iris");
    const auto shortp = tax.add_restriction_subconcept(tax.root(), {{"PetalLength", RestrictionOp::lt, 4.4}}, "Short");
    const auto expected = count_rows(*t, "PetalLength", [&](RowId r, std::size_t c) { return t->number(c, r) < 4.4; });
    CHECK(tax.extension(shortp).size() == expected);
    const auto virg = tax.add_restriction_subconcept(tax.root(), {{"Species", RestrictionOp::eq, std::string("virginica")}},
                                                     "Virginica");
    CHECK(tax.extension(virg).size() == 50);
    CHECK(tax.get(virg).parents == std::vector<ConceptId>{tax.root()});
    CHECK(tax.get(tax.root()).children == std::vector<ConceptId>{shortp, virg});
}

TEST_CASE("empty extension sets the warning flag") {
    const auto t = test_support::iris();
    Taxonomy tax(t);
    const auto id = tax.add_restriction_subconcept(tax.root(), {{"PetalLength", RestrictionOp::gt, 100.0}}, "Huge");
    CHECK(tax.extension(id).empty());
    CHECK(tax.get(id).empty_warning);
}

TEST_CASE("bad restrictions and unknown parents are rejected") {
    const auto t = test_support::iris();
    Taxonomy tax(t);
    CHECK_THROWS_AS(tax.add_restriction_subconcept(tax.root(), {{"Species", RestrictionOp::lt, 1.0}}, "x"),
                    InvalidArgument);
    CHECK_THROWS_AS(tax.add_restriction_subconcept(99, {{"PetalLength", RestrictionOp::lt, 1.0}}, "x"), NotFound);
    CHECK_THROWS_AS(tax.add_restriction_subconcept(tax.root(), {}, "x"), InvalidArgument);
    CHECK(tax.size() == 1);
}

TEST_CASE("union, intersection and complement") {
    const auto t = test_support::iris();
    Taxonomy tax(t, "Iris");
    const auto a = tax.add_restriction_subconcept(tax.root(), {{"PetalLength", RestrictionOp::lt, 4.4}}, "A");
    const auto b = tax.add_restriction_subconcept(tax.root(), {{"SepalWidth", RestrictionOp::ge, 3.0}}, "B");
    const std::vector<ConceptId> ab{a, b};
    const auto u = tax.combine(ab, CombineKind::union_of, "AorB");
    const auto i = tax.combine(ab, CombineKind::intersection, "AandB");
    CHECK(tax.extension(u) == set_union(tax.extension(a), tax.extension(b)));
    CHECK(tax.extension(i) == set_intersection(tax.extension(a), tax.extension(b)));
    CHECK(tax.get(u).parents == ab);

    const std::vector<ConceptId> only_a{a};
    const auto not_a = tax.combine(only_a, CombineKind::complement, "notA");
    CHECK(tax.get(not_a).parents == std::vector<ConceptId>{tax.root()});
    const std::vector<ConceptId> pair{a, not_a};
    const auto whole = tax.combine(pair, CombineKind::union_of, "all");
    CHECK(tax.extension(whole) == tax.extension(tax.root()));
    CHECK_FALSE(intersects(tax.extension(not_a), tax.extension(a)));

    const auto c = tax.add_restriction_subconcept(tax.root(), {{"PetalLength", RestrictionOp::gt, 100.0}}, "C");
    const auto d = tax.add_restriction_subconcept(tax.root(), {{"PetalLength", RestrictionOp::lt, 0.0}}, "D");
    const std::vector<ConceptId> cd{c, d};
    CHECK(tax.extension(tax.combine(cd, CombineKind::intersection, "none")).empty());

    const auto not_ab = tax.combine(ab, CombineKind::complement, "notAB");
    CHECK(tax.extension(not_ab) == set_difference(tax.extension(tax.root()), tax.extension(u)));
    CHECK(tax.check_invariants());

    CHECK_THROWS_AS(tax.combine(only_a, CombineKind::union_of, "x"), InvalidArgument);
    const std::vector<ConceptId> root_only{tax.root()};
    CHECK_THROWS_AS(tax.combine(root_only, CombineKind::complement, "x"), InvalidArgument);
}

TEST_CASE("complement needs a designated parent when ancestors are ambiguous") {
    const auto t = test_support::iris();
    Taxonomy tax(t, "Iris");
    const auto a = tax.add_restriction_subconcept(tax.root(), {{"PetalLength", RestrictionOp::lt, 5.0}}, "A");
    const auto b = tax.add_restriction_subconcept(tax.root(), {{"SepalWidth", RestrictionOp::ge, 3.0}}, "B");
    const std::vector<ConceptId> ab{a, b};
    const auto i = tax.combine(ab, CombineKind::intersection, "AB");
    const std::vector<ConceptId> only_i{i};
    CHECK_THROWS_AS(tax.combine(only_i, CombineKind::complement, "x"), InvalidArgument);
    const auto k = tax.combine(only_i, CombineKind::complement, "A_not_B", a);
    CHECK(tax.extension(k) == set_difference(tax.extension(a), tax.extension(i)));
    const auto other = tax.add_restriction_subconcept(tax.root(), {{"PetalWidth", RestrictionOp::lt, 1.0}}, "O");
    CHECK_THROWS_AS(tax.combine(only_i, CombineKind::complement, "x", other), InvalidArgument);
}

TEST_CASE("merge builds the interval hull and value union") {
    auto t = std::make_shared<Table>(
        load_table("x,c\n0.5,a\n1,a\n2,b\n3,b\n4,c\n5,c\n6,c\n", TableFormat::csv, {}, "m"));
    Taxonomy tax(t);
    const auto a = tax.add_restriction_subconcept(
        tax.root(), {{"x", RestrictionOp::ge, 1.0}, {"x", RestrictionOp::le, 2.0}}, "A");
    const auto b = tax.add_restriction_subconcept(
        tax.root(), {{"x", RestrictionOp::ge, 3.0}, {"x", RestrictionOp::le, 5.0}}, "B");
    const auto child = tax.add_restriction_subconcept(a, {{"c", RestrictionOp::eq, std::string("a")}}, "Achild");
    const std::vector<ConceptId> ab{a, b};
    const auto m = tax.merge_concepts(ab, "AB");
    CHECK_FALSE(tax.contains(a));
    CHECK_FALSE(tax.contains(b));
    const auto& expr = std::get<RestrictExpr>(tax.get(m).expr);
    CHECK(expr.restrictions ==
          std::vector<Restriction>{{"x", RestrictionOp::ge, 1.0}, {"x", RestrictionOp::le, 5.0}});
    CHECK(tax.extension(m) == RowSet{1, 2, 3, 4, 5});
    CHECK(tax.get(child).parents == std::vector<ConceptId>{m});
    CHECK(tax.check_invariants());

    const auto ca = tax.add_restriction_subconcept(tax.root(), {{"c", RestrictionOp::eq, std::string("a")}}, "ca");
    const auto cb = tax.add_restriction_subconcept(tax.root(), {{"c", RestrictionOp::eq, std::string("b")}}, "cb");
    const std::vector<ConceptId> cab{ca, cb};
    const auto mc = tax.merge_concepts(cab, "cab");
    CHECK(std::get<RestrictExpr>(tax.get(mc).expr).restrictions ==
          std::vector<Restriction>{{"c", RestrictionOp::in, std::vector<std::string>{"a", "b"}}});

    const std::vector<ConceptId> single{mc};
    const auto same = tax.merge_concepts(single, "renamed");
    CHECK(tax.get(same).label == "renamed");
    CHECK(tax.extension(same) == RowSet{0, 1, 2, 3});
}

TEST_CASE("merge keeps the looser bound on ties") {
    auto t = std::make_shared<Table>(load_table("x\n1\n2\n3\n", TableFormat::csv, {}, "m"));
    Taxonomy tax(t);
    const auto a = tax.add_restriction_subconcept(tax.root(), {{"x", RestrictionOp::lt, 2.0}}, "A");
    const auto b = tax.add_restriction_subconcept(tax.root(), {{"x", RestrictionOp::le, 2.0}}, "B");
    const std::vector<ConceptId> ab{a, b};
    const auto m = tax.merge_concepts(ab, "M");
    CHECK(std::get<RestrictExpr>(tax.get(m).expr).restrictions ==
          std::vector<Restriction>{{"x", RestrictionOp::le, 2.0}});
}

TEST_CASE("merge preconditions") {
    const auto t = test_support::iris();
    Taxonomy tax(t);
    const auto a = tax.add_restriction_subconcept(tax.root(), {{"PetalLength", RestrictionOp::lt, 4.4}}, "A");
    const auto b = tax.add_restriction_subconcept(tax.root(), {{"SepalWidth", RestrictionOp::lt, 3.0}}, "B");
    const auto c = tax.add_restriction_subconcept(a, {{"PetalLength", RestrictionOp::lt, 2.0}}, "C");
    const std::vector<ConceptId> ab{a, b};
    CHECK_THROWS_AS(tax.merge_concepts(ab, "x"), InvalidArgument);
    const std::vector<ConceptId> ac{a, c};
    CHECK_THROWS_AS(tax.merge_concepts(ac, "x"), InvalidArgument);
    const std::vector<ConceptId> root_only{tax.root()};
    CHECK_THROWS_AS(tax.merge_concepts(root_only, "x"), InvalidArgument);
}

TEST_CASE("find intersections") {
    auto t = std::make_shared<Table>(load_table("x\n1\n2\n3\n4\n5\n6\n", TableFormat::csv, {}, "f"));
    Taxonomy tax(t);
    const auto a = tax.add_restriction_subconcept(tax.root(), {{"x", RestrictionOp::le, 3.0}}, "A");
    const auto b = tax.add_restriction_subconcept(tax.root(), {{"x", RestrictionOp::ge, 3.0}}, "B");
    const auto c = tax.add_restriction_subconcept(tax.root(), {{"x", RestrictionOp::ge, 6.0}}, "C");
    const std::vector<ConceptId> abc{a, b, c};
    const auto one = tax.find_intersections(abc);
    REQUIRE(one.size() == 2);  // A&B, B&C
    CHECK(tax.get(one[0]).label == "A_and_B");
    CHECK(tax.extension(one[0]) == RowSet{2});

    const auto d = tax.add_restriction_subconcept(tax.root(), {{"x", RestrictionOp::le, 1.0}}, "D");
    const std::vector<ConceptId> disjoint{c, d};
    CHECK(tax.find_intersections(disjoint).empty());

    const auto p = tax.add_restriction_subconcept(tax.root(), {{"x", RestrictionOp::ge, 2.0}}, "P");
    const auto q = tax.add_restriction_subconcept(tax.root(), {{"x", RestrictionOp::le, 5.0}}, "Q");
    const auto r = tax.add_restriction_subconcept(tax.root(), {{"x", RestrictionOp::ge, 1.0}}, "R");
    const std::vector<ConceptId> pqr{p, q, r};
    CHECK(tax.find_intersections(pqr).size() == 3);
}

TEST_CASE("delete rules") {
    const auto t = test_support::iris();
    Taxonomy tax(t);
    const auto a = tax.add_restriction_subconcept(tax.root(), {{"PetalLength", RestrictionOp::lt, 4.4}}, "A");
    const auto b = tax.add_restriction_subconcept(a, {{"PetalLength", RestrictionOp::lt, 2.0}}, "B");
    CHECK_THROWS_AS(tax.delete_concept(tax.root()), InvalidArgument);
    CHECK_THROWS(tax.delete_concept(a));
    tax.delete_concept(b);
    tax.delete_concept(a);
    CHECK(tax.size() == 1);
    CHECK(tax.get(tax.root()).children.empty());
    CHECK_THROWS_AS(tax.delete_concept(a), NotFound);
}

TEST_CASE("labels") {
    const auto t = test_support::iris();
    Taxonomy tax(t, "Iris");
    const auto a = tax.add_restriction_subconcept(tax.root(), {{"PetalLength", RestrictionOp::lt, 4.4}}, "A");
    CHECK(tax.find_by_label("A") == a);
    CHECK_THROWS_AS(tax.find_by_label("Z"), NotFound);
    tax.add_restriction_subconcept(tax.root(), {{"PetalLength", RestrictionOp::lt, 3.0}}, "A");
    CHECK_THROWS_AS(tax.find_by_label("A"), InvalidArgument);
    CHECK(describe_intension(tax, a) == "Iris and PetalLength < 4.4");
}

TEST_CASE("json round-trip keeps ids and extensions") {
    const auto t = test_support::synthetic_table(300, 3, 9);
    Taxonomy tax(t);
    std::mt19937_64 rng(3);
    test_support::grow_random_taxonomy(tax, rng, 25);
    const auto doc = tax.to_json();
    const Taxonomy back = Taxonomy::from_json(t, doc);
    CHECK(back.ids() == tax.ids());
    for (auto id : tax.ids()) {
        CHECK(back.get(id).label == tax.get(id).label);
        CHECK(back.extension(id) == tax.extension(id));
        CHECK(back.get(id).parents == tax.get(id).parents);
    }
    CHECK(back.next_id() == tax.next_id());
    CHECK(back.to_json() == doc);
}

TEST_CASE("rebind re-evaluates and rejects broken restrictions") {
    auto t = test_support::iris();
    Taxonomy tax(t);
    const auto a = tax.add_restriction_subconcept(tax.root(), {{"PetalLength", RestrictionOp::lt, 4.4}}, "A");
    auto retyped = std::make_shared<Table>(*t);
    retyped->set_kind(retyped->index_of("PetalLength"), ColumnKind::categorical);
    CHECK_THROWS_AS(tax.rebind(retyped), InvalidArgument);
    CHECK(tax.extension(a).size() > 0);
    auto other = std::make_shared<Table>(*t);
    other->set_included(other->index_of("Species"), false);
    tax.rebind(other);
    CHECK(&tax.table() == other.get());
}

TEST_CASE("randomized taxonomies agree with the oracle") {
    const auto t = test_support::synthetic_table(200, 3, 1);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Taxonomy tax(t);
        std::mt19937_64 rng(seed);
        test_support::grow_random_taxonomy(tax, rng, 20);
        CHECK(tax.check_invariants());
        test_support::Oracle oracle(tax);
        CHECK(oracle.mismatches() == 0);
        for (auto id : tax.ids()) {
            const auto& c = tax.get(id);
            if (const auto* r = std::get_if<RestrictExpr>(&c.expr)) {
                CHECK(is_subset(c.extension, tax.extension(r->parent)));
            }
            if (const auto* k = std::get_if<ComplementExpr>(&c.expr)) {
                for (auto s : k->excluded) CHECK_FALSE(intersects(c.extension, tax.extension(s)));
            }
        }
    }
}
