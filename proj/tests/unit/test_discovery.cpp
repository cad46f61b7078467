#include "doctest.h"
#include "support.hpp"
#include "tabtax/discovery.hpp"
#include "tabtax/error.hpp"

using namespace tabtax;

TEST_CASE("top weighted column sums one-hot features") {
    const Table t = load_table("x,c\n1,a\n2,b\n", TableFormat::csv);
    const auto m = encode_for_clustering(t, all_rows(2));
    REQUIRE(m.dims == 3);
    CHECK(top_weighted_column(t, FeatureWeights{{1.2, 0.9, 0.9}}, m.features) == "c");
    CHECK(top_weighted_column(t, FeatureWeights{{1.8, 0.6, 0.6}}, m.features) == "x");
    CHECK(top_weighted_column(t, FeatureWeights{{1.2, 0.6, 0.6}}, m.features) == "x");  // tie: earlier column
    CHECK(top_weighted_column(t, FeatureWeights{{2.0, 0.5, 0.5}}, m.features, {"x"}) == "c");
}

TEST_CASE("unit restrictions") {
    const Table t = load_table("x,c\n1,b\n5,a\n3,b\nNA,a\n", TableFormat::csv);
    const RowSet rows{0, 1, 2, 3};
    CHECK(unit_restriction(t, "x", rows) ==
          std::vector<Restriction>{{"x", RestrictionOp::ge, 1.0}, {"x", RestrictionOp::le, 5.0}});
    CHECK(unit_restriction(t, "c", rows) == std::vector<Restriction>{{"c", RestrictionOp::eq, std::string("a")}});
    const RowSet none{3};
    CHECK_THROWS_AS(unit_restriction(t, "x", none), InvalidArgument);
}

TEST_CASE("reassignment covers overlaps and drops empty proposals") {
    const Table t = load_table("x\n1\n2\n3\n4\n", TableFormat::csv);
    const RowSet parent{0, 1, 2, 3};
    std::vector<UnitRestrictions> units{
        {0, {0, 0}, {{"x", RestrictionOp::ge, 1.0}, {"x", RestrictionOp::le, 3.0}}},
        {1, {0, 1}, {{"x", RestrictionOp::ge, 2.0}, {"x", RestrictionOp::le, 4.0}}},
        {2, {1, 0}, {{"x", RestrictionOp::ge, 9.0}, {"x", RestrictionOp::le, 9.0}}},
    };
    const auto ps = reassign_and_prune(t, parent, units);
    REQUIRE(ps.size() == 2);
    CHECK(ps[0].extension == RowSet{0, 1, 2});
    CHECK(ps[1].extension == RowSet{1, 2, 3});
}

TEST_CASE("containment merge") {
    auto make = [](std::size_t unit, RowSet ext, double lo, double hi) {
        ConceptProposal p;
        p.source_unit = unit;
        p.extension = std::move(ext);
        p.restrictions = {{"x", RestrictionOp::ge, lo}, {"x", RestrictionOp::le, hi}};
        return p;
    };
    std::vector<ConceptProposal> ps{make(0, {1, 2}, 1, 2), make(1, {1, 2, 3}, 1, 3), make(2, {4, 5}, 4, 5),
                                    make(3, {4, 5}, 3.5, 5), make(4, {3, 4}, 3, 4)};
    const auto out = merge_by_containment(ps);
    REQUIRE(out.size() == 3);
    CHECK(out[0].source_unit == 1);
    CHECK(out[1].source_unit == 3);  // same extension as unit 2, wider span
    CHECK(out[2].source_unit == 4);
    for (const auto& a : out) {
        for (const auto& b : out) {
            if (&a != &b) CHECK_FALSE(is_subset(a.extension, b.extension));
        }
    }
}

TEST_CASE("iris discovery") {
    const auto t = test_support::iris();
    Taxonomy tax(t, "Iris");
    DiscoveryConfig cfg;
    cfg.ignore_columns = {"Species"};
    cfg.train.seed = 3;
    const auto result = discover(*t, tax.extension(tax.root()), cfg);
    CHECK(result.proposals.size() >= 2);
    CHECK(result.proposals.size() <= 16);
    for (const auto& p : result.proposals) CHECK(p.column == result.column);
    RowSet covered;
    for (const auto& p : result.pre_merge) covered = set_union(covered, p.extension);
    CHECK(covered.size() == 150);
    const auto again = discover(*t, tax.extension(tax.root()), cfg);
    CHECK(again.column == result.column);
    REQUIRE(again.proposals.size() == result.proposals.size());
    for (std::size_t i = 0; i < again.proposals.size(); ++i) {
        CHECK(again.proposals[i].restrictions == result.proposals[i].restrictions);
    }
}

TEST_CASE("resolving proposals") {
    const auto t = test_support::iris();
    Taxonomy tax(t, "Iris");
    DiscoveryConfig cfg;
    cfg.ignore_columns = {"Species"};
    auto ps = propose_subconcepts(tax, tax.root(), cfg);
    REQUIRE(ps.size() >= 2);
    const auto id = resolve_proposal(tax, ps[0], true);
    REQUIRE(id);
    CHECK(tax.get(*id).parents == std::vector<ConceptId>{tax.root()});
    CHECK(tax.get(*id).label.starts_with("Iris_" + ps[0].column + "["));
    CHECK_THROWS_AS(resolve_proposal(tax, ps[0], true), Conflict);
    CHECK_FALSE(resolve_proposal(tax, ps[1], false));
    CHECK(ps[1].status == ProposalStatus::rejected);
    CHECK_THROWS_AS(resolve_proposal(tax, ps[1], true), Conflict);
}

TEST_CASE("discovery needs enough rows") {
    const auto t = test_support::iris();
    Taxonomy tax(t);
    const auto tiny = tax.add_restriction_subconcept(tax.root(), {{"PetalLength", RestrictionOp::lt, 1.05}}, "tiny");
    REQUIRE(tax.extension(tiny).size() < 2);
    CHECK_THROWS_AS(propose_subconcepts(tax, tiny, {}), InvalidArgument);
    DiscoveryConfig bad;
    bad.max_proposals = 1;
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
}

TEST_CASE("proposal json round-trip") {
    const auto t = test_support::iris();
    ConceptProposal p;
    p.id = 4;
    p.parent = 0;
    p.column = "PetalLength";
    p.restrictions = {{"PetalLength", RestrictionOp::ge, 1.0}, {"PetalLength", RestrictionOp::le, 2.0}};
    p.source_unit = 3;
    p.source_cell = {0, 3};
    const auto back = proposal_from_json(to_json(p, *t), *t);
    CHECK(back.restrictions == p.restrictions);
    CHECK(back.source_cell == p.source_cell);
    CHECK(back.status == ProposalStatus::pending);
}
