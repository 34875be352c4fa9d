#include <doctest.h>

#include <random>

#include "hq/callgraph.hpp"
#include "support/oracles.hpp"

namespace {

nlohmann::json tiny_doc() {
    return {
        {"version", 1},
        {"nodes",
         {{{"id", "pub"},
           {"name", "ns::pub"},
           {"file", "include/pub.h"},
           {"line", 3},
           {"external", false}},
          {{"id", "mid"},
           {"name", "mid"},
           {"file", "src/mid.c"},
           {"line", 9},
           {"external", false},
           {"unsafe_count", 2}},
          {{"id", "leaf"}, {"name", "leaf"}, {"file", "weird/leaf.c"}, {"line", 4}, {"external", false}},
          {{"id", "ext"}, {"name", "ext"}, {"file", ""}, {"line", 0}, {"external", true}}}},
        {"edges",
         {{{"caller", "pub"}, {"callee", "mid"}},
          {{"caller", "mid"}, {"callee", "leaf"}},
          {{"caller", "mid"}, {"callee", "ext"}},
          {{"caller", "leaf"}, {"callee", "pub"}}}},
    };
}

}  // namespace

TEST_CASE("basename strips the last scope separator") {
    CHECK(hq::basename_of("yaml_load") == "yaml_load");
    CHECK(hq::basename_of("ns::parse") == "parse");
    CHECK(hq::basename_of("outer::inner::parse") == "parse");
    CHECK(hq::basename_of("module.parse") == "parse");
    CHECK(hq::basename_of("a::b.c") == "c");
}

TEST_CASE("visibility follows path segments") {
    const hq::CallGraph g = hq::CallGraph::from_json(tiny_doc());
    CHECK(g.node("pub").visibility == hq::Visibility::PUBLIC);
    CHECK(g.node("mid").visibility == hq::Visibility::INTERNAL);
    CHECK(g.node("leaf").visibility == hq::Visibility::UNKNOWN);
    CHECK(g.node("ext").visibility == hq::Visibility::UNKNOWN);
}

TEST_CASE("a resolver is consulted only for unknown nodes") {
    struct Everything : hq::VisibilityResolver {
        hq::Visibility resolve(const hq::FunctionNode&) const override {
            return hq::Visibility::PUBLIC;
        }
    } resolver;
    const hq::CallGraph g =
        hq::CallGraph::from_json(tiny_doc(), hq::default_visibility_rules(), &resolver);
    CHECK(g.node("mid").visibility == hq::Visibility::INTERNAL);
    CHECK(g.node("leaf").visibility == hq::Visibility::PUBLIC);
    CHECK(g.node("ext").visibility == hq::Visibility::PUBLIC);
}

TEST_CASE("document problems raise the right error") {
    CHECK_THROWS_AS(hq::CallGraph::from_json(nlohmann::json::array()), hq::SchemaError);
    CHECK_THROWS_AS(hq::CallGraph::from_json({{"version", 2}, {"nodes", nlohmann::json::array()}}),
                    hq::SchemaError);

    nlohmann::json dup = tiny_doc();
    dup["nodes"].push_back(
        {{"id", "pub"}, {"name", "again"}, {"file", "src/x.c"}, {"line", 1}, {"external", false}});
    CHECK_THROWS_AS(hq::CallGraph::from_json(dup), hq::IntegrityError);

    nlohmann::json dangling = tiny_doc();
    dangling["edges"].push_back({{"caller", "pub"}, {"callee", "nowhere"}});
    CHECK_THROWS_AS(hq::CallGraph::from_json(dangling), hq::IntegrityError);
}

TEST_CASE("unknown ids raise on node lookup") {
    const hq::CallGraph g = hq::CallGraph::from_json(tiny_doc());
    CHECK_THROWS_AS(g.node("missing"), hq::UnknownFunctionError);
}

TEST_CASE("forward reach excludes the start even through a cycle") {
    const hq::CallGraph g = hq::CallGraph::from_json(tiny_doc());
    const auto reach = g.forward_reach("pub", 10);
    CHECK(reach.size() == 3);
    CHECK(reach.at("mid") == 1);
    CHECK(reach.at("leaf") == 2);
    CHECK(reach.at("ext") == 2);
    CHECK(reach.count("pub") == 0);

    const auto shallow = g.forward_reach("pub", 1);
    CHECK(shallow.size() == 1);
    CHECK(shallow.at("mid") == 1);
}

TEST_CASE("reverse reach carries distance and visibility") {
    const hq::CallGraph g = hq::CallGraph::from_json(tiny_doc());
    const auto reach = g.reverse_reach("leaf", 10);
    CHECK(reach.size() == 2);
    CHECK(reach.at("mid").distance == 1);
    CHECK(reach.at("mid").visibility == hq::Visibility::INTERNAL);
    CHECK(reach.at("pub").distance == 2);
    CHECK(reach.at("pub").visibility == hq::Visibility::PUBLIC);
}

TEST_CASE("public entries come back sorted by distance then id") {
    nlohmann::json doc = {
        {"version", 1},
        {"nodes",
         {{{"id", "a_far"}, {"name", "a_far"}, {"file", "api/a.c"}, {"line", 1}, {"external", false}},
          {{"id", "b_near"}, {"name", "b_near"}, {"file", "api/b.c"}, {"line", 1}, {"external", false}},
          {{"id", "c_near"}, {"name", "c_near"}, {"file", "api/c.c"}, {"line", 1}, {"external", false}},
          {{"id", "core"}, {"name", "core"}, {"file", "src/core.c"}, {"line", 1}, {"external", false}},
          {{"id", "hop"}, {"name", "hop"}, {"file", "src/hop.c"}, {"line", 1}, {"external", false}}}},
        {"edges",
         {{{"caller", "a_far"}, {"callee", "hop"}},
          {{"caller", "hop"}, {"callee", "core"}},
          {{"caller", "b_near"}, {"callee", "core"}},
          {{"caller", "c_near"}, {"callee", "core"}}}},
    };
    const hq::CallGraph g = hq::CallGraph::from_json(doc);
    const auto entries = g.public_entries_for("core", 20);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].id == "b_near");
    CHECK(entries[0].distance == 1);
    CHECK(entries[1].id == "c_near");
    CHECK(entries[2].id == "a_far");
    CHECK(entries[2].distance == 2);

    const auto batch = g.public_entries_for_batch({"core", "hop"}, 20);
    CHECK(batch.at("core").size() == 3);
    CHECK(batch.at("hop").size() == 1);
    CHECK(batch.at("hop")[0].id == "a_far");
}

TEST_CASE("symbol resolution ladder: id, then name, then basename") {
    nlohmann::json doc = {
        {"version", 1},
        {"nodes",
         {{{"id", "n1"}, {"name", "ns::parse"}, {"file", "src/a.c"}, {"line", 1}, {"external", false}},
          {{"id", "n2"},
           {"name", "other::parse"},
           {"file", "src/b.c"},
           {"line", 1},
           {"external", false}},
          {{"id", "ns::parse"},
           {"name", "shadow"},
           {"file", "src/c.c"},
           {"line", 1},
           {"external", false}}}},
        {"edges", nlohmann::json::array()},
    };
    const hq::CallGraph g = hq::CallGraph::from_json(doc);

    CHECK(g.resolve_symbol("ns::parse") == std::vector<std::string>{"ns::parse"});
    CHECK(g.resolve_symbol("other::parse") == std::vector<std::string>{"n2"});
    const auto by_base = g.resolve_symbol("parse");
    CHECK(by_base == std::vector<std::string>{"n1", "n2"});
    CHECK(g.resolve_symbol("nothing").empty());
}

TEST_CASE("serialization round-trips") {
    const hq::CallGraph g = hq::CallGraph::from_json(tiny_doc());
    const hq::CallGraph again = hq::CallGraph::from_json(g.to_json());
    CHECK(again.node_count() == g.node_count());
    CHECK(again.edge_count() == g.edge_count());
    CHECK(again.node("mid").unsafe_count == g.node("mid").unsafe_count);
    CHECK(again.node("ext").external);
    CHECK(again.to_json() == g.to_json());
}

TEST_CASE("forward reach agrees with the brute-force closure on random graphs") {
    std::mt19937_64 rng(20250815u);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 40);
        const oracles::TestGraph tg =
            oracles::random_graph(rng, n, 0.05 + 0.25 * (trial / 19.0), 10);
        const hq::CallGraph g = hq::CallGraph::from_json(tg.doc);
        const auto dist = oracles::all_pairs_distances(tg);
        for (int u = 0; u < n; ++u) {
            const auto got = g.forward_reach(oracles::node_id(u), n);
            const auto want = oracles::reach_oracle(tg, dist, u, n);
            REQUIRE(got == want);
        }
    }
}
