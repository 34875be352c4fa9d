#include <doctest.h>

#include "hq/danger.hpp"
#include "hq/logic_group.hpp"
#include "support/fixtures.hpp"

namespace {

hq::LogicGroup make_lg(const std::string& name, std::vector<std::string> entries,
                       std::set<std::string> core) {
    hq::LogicGroup lg;
    lg.name = name;
    lg.entries = std::move(entries);
    lg.core = std::move(core);
    return lg;
}

}  // namespace

TEST_CASE("logic group documents round-trip and reject bad shapes") {
    hq::LogicGroup lg = make_lg("tokenizing", {"yaml_scan"}, {"scan_token", "buf_grow"});
    lg.description = "token loop";
    lg.entry_mode = hq::EntryMode::INTERNAL_FALLBACK;

    const nlohmann::json doc = hq::lg_to_json(lg, 3.5, 2);
    CHECK(doc["name"] == "tokenizing");
    CHECK(doc["score"] == 3.5);
    CHECK(doc["rank"] == 2);
    CHECK(doc["entry_mode"] == "internal_fallback");

    const hq::LogicGroup parsed = hq::lg_from_json(doc);
    CHECK(parsed.name == lg.name);
    CHECK(parsed.entries == lg.entries);
    CHECK(parsed.core == lg.core);
    CHECK(parsed.description == lg.description);
    CHECK(parsed.entry_mode == hq::EntryMode::INTERNAL_FALLBACK);

    CHECK_THROWS_AS(hq::lg_from_json(nlohmann::json::array()), hq::SchemaError);
    CHECK_THROWS_AS(hq::lg_from_json({{"core", {"x"}}}), hq::SchemaError);
    CHECK_THROWS_AS(hq::lg_from_json({{"name", "x"}}), hq::SchemaError);
    CHECK_THROWS_AS(hq::lg_from_json({{"name", "x"}, {"core", nlohmann::json::array()}}),
                    hq::SchemaError);
    CHECK_THROWS_AS(hq::lg_from_json({{"name", "x"}, {"core", {1, 2}}}), hq::SchemaError);
}

TEST_CASE("entry selection prefers the nearest public ancestor") {
    const hq::CallGraph g = fixtures::load_graph("toy_callgraph.json");
    const hq::UnsafeProfile profile;

    SUBCASE("single public ancestor") {
        const hq::EntryVerdict v = hq::select_entry(g, {"parse_document"}, 20, profile);
        CHECK(v.p3 == hq::P3Status::PASS);
        CHECK(v.chosen_entry == "yaml_load");
        CHECK(v.distance_to_core == 1);
        CHECK(v.p4_pass);
    }

    SUBCASE("distance tie broken by name") {
        /* buf_grow sits two hops below both yaml_scan and yaml_emit. */
        const hq::EntryVerdict v = hq::select_entry(g, {"buf_grow"}, 20, profile);
        CHECK(v.p3 == hq::P3Status::PASS);
        CHECK(v.chosen_entry == "yaml_emit");
        CHECK(v.distance_to_core == 2);
        CHECK(v.p4_pass);
    }

    SUBCASE("multi-member core uses the minimum distance per ancestor") {
        const hq::EntryVerdict v = hq::select_entry(g, {"buf_grow", "scan_token"}, 20, profile);
        CHECK(v.p3 == hq::P3Status::PASS);
        CHECK(v.chosen_entry == "yaml_scan");
        CHECK(v.distance_to_core == 1);
    }

    SUBCASE("empty core is an error") {
        CHECK_THROWS_AS(hq::select_entry(g, {}, 20, profile), hq::EmptyEntrySetError);
    }
}

TEST_CASE("entry selection falls back to internal ancestors, then fails") {
    nlohmann::json doc = {
        {"version", 1},
        {"nodes",
         {{{"id", "wrapper"},
           {"name", "wrapper"},
           {"file", "src/w.c"},
           {"line", 1},
           {"external", false},
           {"unsafe_count", 1}},
          {{"id", "deep"},
           {"name", "deep"},
           {"file", "src/d.c"},
           {"line", 1},
           {"external", false},
           {"unsafe_count", 5}},
          {{"id", "orphan"},
           {"name", "orphan"},
           {"file", "src/o.c"},
           {"line", 1},
           {"external", false},
           {"unsafe_count", 0}}}},
        {"edges", {{{"caller", "wrapper"}, {"callee", "deep"}}}},
    };
    const hq::CallGraph g = hq::CallGraph::from_json(doc);
    const hq::UnsafeProfile profile;

    SUBCASE("internal wrapper becomes a fallback entry") {
        const hq::EntryVerdict v = hq::select_entry(g, {"deep"}, 20, profile);
        CHECK(v.p3 == hq::P3Status::FALLBACK);
        CHECK(v.chosen_entry == "wrapper");
        CHECK(v.distance_to_core == 1);
        CHECK(v.p4_pass);
    }

    SUBCASE("a judge can overrule the nearest candidate") {
        struct FarthestJudge : hq::LgJudge {
            std::string choose_fallback_entry(
                const hq::CallGraph&,
                const std::vector<hq::FallbackCandidate>& candidates) const override {
                return candidates.back().id;
            }
        } judge;
        nlohmann::json chain = doc;
        chain["nodes"].push_back({{"id", "outer"},
                                  {"name", "outer"},
                                  {"file", "src/x.c"},
                                  {"line", 1},
                                  {"external", false},
                                  {"unsafe_count", 0}});
        chain["edges"].push_back({{"caller", "outer"}, {"callee", "wrapper"}});
        const hq::CallGraph g2 = hq::CallGraph::from_json(chain);
        const hq::EntryVerdict v = hq::select_entry(g2, {"deep"}, 20, profile, &judge);
        CHECK(v.p3 == hq::P3Status::FALLBACK);
        CHECK(v.chosen_entry == "outer");
        CHECK(v.distance_to_core == 2);
    }

    SUBCASE("no ancestors at all is a failure with no entry") {
        const hq::EntryVerdict v = hq::select_entry(g, {"orphan"}, 20, profile);
        CHECK(v.p3 == hq::P3Status::FAIL);
        CHECK_FALSE(v.p4_pass);
        CHECK(v.chosen_entry.empty());
    }

    SUBCASE("an entry reaching zero unsafe mass fails adequacy") {
        nlohmann::json clean = doc;
        clean["nodes"][0]["unsafe_count"] = 0;
        clean["nodes"][1]["unsafe_count"] = 0;
        const hq::CallGraph g2 = hq::CallGraph::from_json(clean);
        const hq::EntryVerdict v = hq::select_entry(g2, {"deep"}, 20, profile);
        CHECK(v.p3 == hq::P3Status::FALLBACK);
        CHECK_FALSE(v.p4_pass);
    }

    const nlohmann::json verdict_doc =
        hq::to_json(hq::select_entry(g, {"deep"}, 20, profile));
    CHECK(verdict_doc["p3"] == "FALLBACK");
    CHECK(verdict_doc["p4"] == "PASS");
    CHECK(verdict_doc["chosen_entry"] == "wrapper");
}

TEST_CASE("dedup drops shape matches against existing groups and earlier candidates") {
    const std::vector<hq::LogicGroup> existing = {
        make_lg("already-covered", {"yaml_scan"}, {"scan_token"}),
    };
    const std::vector<hq::LogicGroup> candidates = {
        make_lg("fresh", {"yaml_load"}, {"parse_document"}),
        make_lg("covered-again", {"yaml_scan"}, {"scan_token"}),
        make_lg("fresh-dup", {"yaml_load"}, {"parse_document"}),
        make_lg("entries-reordered", {"b", "a"}, {"core"}),
        make_lg("same-sets", {"a", "b"}, {"core"}),
        make_lg("entries-narrow", {"a"}, {"core"}),
    };

    const auto kept = hq::dedup(candidates, existing);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0].name == "fresh");
    CHECK(kept[1].name == "entries-reordered");
    CHECK(kept[2].name == "entries-narrow");

    SUBCASE("a semantic judge can drop more") {
        struct NamePrefixJudge : hq::LgJudge {
            bool is_semantic_duplicate(const hq::LogicGroup& a,
                                       const hq::LogicGroup& b) const override {
                return a.name.substr(0, 5) == b.name.substr(0, 5);
            }
        } judge;
        const auto stricter = hq::dedup(candidates, existing, &judge);
        REQUIRE(stricter.size() == 2);
        CHECK(stricter[0].name == "fresh");
        CHECK(stricter[1].name == "entries-reordered");
    }
}

TEST_CASE("rank and select orders by score, breaks ties by name, truncates to k") {
    const hq::CallGraph g = fixtures::load_graph("toy_callgraph.json");
    const auto lgs = fixtures::load_lgs("toy_lgs.json");
    const hq::UnsafeProfile profile;

    const auto ranked = hq::rank_and_select(lgs, g, 20, profile, 5);
    REQUIRE(ranked.size() == 5);
    CHECK(ranked[0].lg.name == "token-scanning");
    CHECK(ranked[1].lg.name == "anchor-resolution");
    CHECK(ranked[2].lg.name == "document-parsing");
    CHECK(ranked[3].lg.name == "buffer-growth");
    CHECK(ranked[4].lg.name == "emitting");
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        CHECK(ranked[i].rank == static_cast<int>(i) + 1);
        CHECK(ranked[i].verdict.p3 == hq::P3Status::PASS);
        CHECK(ranked[i].verdict.p4_pass);
    }

    const auto top2 = hq::rank_and_select(lgs, g, 20, profile, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].lg.name == "token-scanning");
    CHECK(top2[1].lg.name == "anchor-resolution");
    CHECK(top2[1].rank == 2);

    std::vector<hq::LogicGroup> broken = {make_lg("no-entries", {}, {"buf_grow"})};
    CHECK_THROWS_AS(hq::rank_and_select(broken, g, 20, profile, 5), hq::EmptyEntrySetError);
}

TEST_CASE("rank and select silently drops groups whose entry fails adequacy") {
    nlohmann::json doc = {
        {"version", 1},
        {"nodes",
         {{{"id", "api_hot"}, {"name", "api_hot"}, {"file", "api/h.c"}, {"line", 1}, {"external", false}},
          {{"id", "hot"},
           {"name", "hot"},
           {"file", "src/h.c"},
           {"line", 1},
           {"external", false},
           {"unsafe_count", 6}},
          {{"id", "api_cold"},
           {"name", "api_cold"},
           {"file", "api/c.c"},
           {"line", 1},
           {"external", false}},
          {{"id", "cold"},
           {"name", "cold"},
           {"file", "src/c.c"},
           {"line", 1},
           {"external", false},
           {"unsafe_count", 0}}}},
        {"edges",
         {{{"caller", "api_hot"}, {"callee", "hot"}},
          {{"caller", "api_cold"}, {"callee", "cold"}}}},
    };
    const hq::CallGraph g = hq::CallGraph::from_json(doc);
    const std::vector<hq::LogicGroup> lgs = {
        make_lg("hot-path", {"api_hot"}, {"hot"}),
        make_lg("cold-path", {"api_cold"}, {"cold"}),
    };

    const auto ranked = hq::rank_and_select(lgs, g, 20, hq::UnsafeProfile{}, 10);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].lg.name == "hot-path");
    CHECK(ranked[0].rank == 1);
}
