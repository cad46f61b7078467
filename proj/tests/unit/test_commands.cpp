#include <filesystem>

#include "doctest.h"
#include "support.hpp"
#include "tabtax/commands.hpp"
#include "tabtax/error.hpp"
#include "tabtax/owl.hpp"
#include "tabtax/script.hpp"
#include "tabtax/stats.hpp"

using namespace tabtax;
using nlohmann::json;

namespace {

Workspace iris_workspace() { return Workspace(test_support::iris(), "Iris"); }

json lt(const std::string& column, double v) {
    return json::array({{{"column", column}, {"op", "<"}, {"value", v}}});
}

}  // namespace

TEST_CASE("commands resolve labels and log ids") {
    auto ws = iris_workspace();
    const auto r = ws.apply({{"op", "add_restriction"}, {"parent", "Iris"}, {"restrictions", lt("PetalLength", 2.5)}});
    const auto id = r.at("concept").get<ConceptId>();
    CHECK(ws.taxonomy().get(id).label == "Iris_PetalLength<2.5");
    REQUIRE(ws.log().size() == 1);
    CHECK(ws.log()[0].at("parent") == 0);
    CHECK(ws.log()[0].at("label") == "Iris_PetalLength<2.5");
    ws.apply({{"op", "relabel"}, {"concept", id}, {"label", "Setosa-ish"}});
    CHECK(ws.resolve_ref("Setosa-ish") == id);
    CHECK(ws.resolve_ref(json(id)) == id);
}

TEST_CASE("failed commands leave no trace") {
    auto ws = iris_workspace();
    CHECK_THROWS_AS(ws.apply({{"op", "add_restriction"}, {"parent", "Nope"}, {"restrictions", lt("PetalLength", 1)}}),
                    NotFound);
    CHECK_THROWS_AS(ws.apply({{"op", "add_restriction"}, {"parent", 0}, {"restrictions", lt("Species", 1)}}),
                    InvalidArgument);
    CHECK_THROWS_AS(ws.apply({{"op", "frobnicate"}}), InvalidArgument);
    CHECK_THROWS_AS(ws.apply(json::array()), InvalidArgument);
    CHECK_THROWS_AS(ws.apply({{"op", "relabel"}, {"concept", 0}}), InvalidArgument);
    CHECK(ws.log().empty());
    CHECK(ws.taxonomy().size() == 1);
}

TEST_CASE("create_root only on a bare taxonomy") {
    auto ws = iris_workspace();
    ws.apply({{"op", "create_root"}, {"label", "Flowers"}});
    CHECK(ws.taxonomy().get(0).label == "Flowers");
    ws.apply({{"op", "add_restriction"}, {"parent", 0}, {"restrictions", lt("PetalLength", 2.5)}});
    CHECK_THROWS_AS(ws.apply({{"op", "create_root"}, {"label", "Again"}}), Conflict);
}

TEST_CASE("combine default labels") {
    auto ws = iris_workspace();
    ws.apply({{"op", "add_restriction"}, {"parent", 0}, {"label", "A"}, {"restrictions", lt("PetalLength", 2.5)}});
    ws.apply({{"op", "add_restriction"}, {"parent", 0}, {"label", "B"}, {"restrictions", lt("PetalWidth", 1.0)}});
    const auto u = ws.apply({{"op", "combine"}, {"kind", "union"}, {"concepts", {"A", "B"}}});
    const auto i = ws.apply({{"op", "combine"}, {"kind", "intersection"}, {"concepts", {"A", "B"}}});
    const auto c = ws.apply({{"op", "combine"}, {"kind", "complement"}, {"concepts", {"A"}}});
    CHECK(ws.taxonomy().get(u.at("concept")).label == "A_or_B");
    CHECK(ws.taxonomy().get(i.at("concept")).label == "A_and_B");
    CHECK(ws.taxonomy().get(c.at("concept")).label == "not_A");
    CHECK(ws.log().back().at("reference_parent") == 0);
}

TEST_CASE("set_column re-types and rebinds") {
    auto ws = iris_workspace();
    ws.apply({{"op", "set_column"}, {"column", "Species"}, {"included", false}});
    CHECK_FALSE(ws.table().column(ws.table().index_of("Species")).included);
    CHECK(ws.initial_table()->column(ws.initial_table()->index_of("Species")).included);
    ws.apply({{"op", "add_restriction"}, {"parent", 0}, {"restrictions", lt("SepalLength", 5.0)}});
    // A restricted numerical column cannot become categorical under the restriction.
    CHECK_THROWS(ws.apply({{"op", "set_column"}, {"column", "SepalLength"}, {"kind", "categorical"}}));
    CHECK(ws.table().column(ws.table().index_of("SepalLength")).kind == ColumnKind::numerical);
    CHECK_THROWS_AS(ws.apply({{"op", "set_column"}, {"column", "Nope"}, {"included", true}}), NotFound);
}

TEST_CASE("property: replaying the log rebuilds the taxonomy") {
    const auto t = test_support::synthetic_table(150, 3, 21);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CAPTURE(seed);
        std::mt19937_64 rng(seed);
        Workspace ws(t);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int step = 0; step < 15; ++step) {
            const auto ids = ws.taxonomy().ids();
            std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
            json cmd;
            const double roll = u(rng);
            if (roll < 0.5 || ids.size() < 3) {
                const auto r = test_support::random_restriction(ws.table(), rng);
                cmd = {{"op", "add_restriction"}, {"parent", ids[pick(rng)]},
                       {"restrictions", json::array({to_json(r, ws.table())})}};
            } else if (roll < 0.7) {
                cmd = {{"op", "combine"}, {"kind", u(rng) < 0.5 ? "union" : "intersection"},
                       {"concepts", {ids[pick(rng)], ids[pick(rng)]}}};
            } else if (roll < 0.8) {
                cmd = {{"op", "relabel"}, {"concept", ids[pick(rng)]}, {"label", "L" + std::to_string(step)}};
            } else if (roll < 0.9) {
                cmd = {{"op", "delete"}, {"concept", ids[pick(rng)]}};
            } else {
                cmd = {{"op", "set_column"}, {"column", "x" + std::to_string(step % 3)}, {"included", u(rng) < 0.5}};
            }
            try {
                ws.apply(cmd);
            } catch (const Error&) {
            }
        }
        const auto again = Workspace::replay(t, ws.log());
        CHECK(again.taxonomy().to_json() == ws.taxonomy().to_json());
        CHECK(export_turtle(again.taxonomy()) == export_turtle(ws.taxonomy()));
        CHECK(again.log() == ws.log());
    }
}

TEST_CASE("scripts") {
    const auto dir = std::filesystem::temp_directory_path() / "tabtax_script_test";
    std::filesystem::create_directories(dir);
    const auto owl = (dir / "out.ttl").string();
    const auto csv = (dir / "stats.csv").string();
    const auto script = parse_script(json::parse(R"({
        "seed": 3,
        "root_label": "Iris",
        "commands": [
            {"op": "add_restriction", "parent": "Iris", "label": "ShortPetal",
             "restrictions": [{"column": "PetalLength", "op": "<", "value": 4.4}]},
            {"op": "discover", "concept": "ShortPetal", "policy": "accept_top_k", "k": 2,
             "config": {"epochs": 5}},
            {"op": "export", "path": ")" + owl + R"("},
            {"op": "stats", "path": ")" + csv + R"("}
        ]})"));
    CHECK(script.seed == 3u);
    Workspace ws(test_support::iris(), *script.root_label);
    std::vector<json> results;
    run_script(ws, script.commands, {}, [&](std::size_t, const json&, const json& r) { results.push_back(r); });
    REQUIRE(results.size() == 4);
    CHECK(results[1].at("accepted").size() <= 2);
    CHECK(results[1].at("proposals").size() >= results[1].at("accepted").size());
    const auto sk = import_turtle_file(owl);
    CHECK(compute_stats(sk) == compute_stats(ws.taxonomy()));
    CHECK(test_support::read_file(csv) == stats_csv(compute_stats(ws.taxonomy())));

    Workspace bad(test_support::iris());
    try {
        run_script(bad, json::parse(R"([{"op": "relabel", "concept": 0, "label": "X"}, {"op": "delete", "concept": 9}])"),
                   {});
        FAIL("expected ScriptError");
    } catch (const ScriptError& e) {
        CHECK(e.index() == 1);
        CHECK(std::string(e.what()).rfind("command 1:", 0) == 0);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("script documents") {
    CHECK(parse_script(json::array()).commands.empty());
    CHECK_THROWS_AS(parse_script(json{{"commands", 3}}), InvalidArgument);
    CHECK_THROWS_AS(parse_script(json(5)), InvalidArgument);
}
