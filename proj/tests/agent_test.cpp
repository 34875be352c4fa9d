#include <doctest.h>

#include <httplib.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <thread>

#include "hq/agent.hpp"
#include "hq/http_model.hpp"
#include "hq/scripted.hpp"
#include "support/fixtures.hpp"

namespace {

namespace fs = std::filesystem;

hq::ToolRegistry registry_with(const std::string& name, const std::string& category,
                               std::function<nlohmann::json(const nlohmann::json&)> handler) {
    hq::ToolRegistry registry;
    registry.add({name, category, "", nlohmann::json::object(), std::move(handler)});
    return registry;
}

nlohmann::json echo_tool(const nlohmann::json& args) { return {{"echo", args}}; }

/* Temporary directory removed when the test block ends. */
struct TempTree {
    fs::path root;

    TempTree() {
        root = fs::temp_directory_path() /
               ("hq_agent_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this) & 0xffff));
        fs::create_directories(root / "src");
        fs::create_directories(root / "fuzz");
        write("src/lib.c", "int helper(void) { return 1; }\nint lookup_tag(void);\n");
        write("fuzz/old_harness.c", "int LLVMFuzzerTestOneInput() { return 0; }\n");
        write("README", "library notes\n");
    }
    ~TempTree() { fs::remove_all(root); }

    void write(const std::string& rel, const std::string& content) {
        std::ofstream out(root / rel);
        out << content;
    }
};

}  // namespace

TEST_CASE("stock agent configurations") {
    const auto lg = hq::default_agent_config(hq::AgentName::LOGIC_GROUP);
    CHECK(lg.turn_cap == 50);
    CHECK(lg.terminator == "submit_logic_group");
    CHECK(lg.tool_categories == std::vector<std::string>{"code_view", "sast"});

    const auto research = hq::default_agent_config(hq::AgentName::API_RESEARCH);
    CHECK(research.turn_cap == 30);
    CHECK(research.terminator == "submit_p2_report");

    const auto generator = hq::default_agent_config(hq::AgentName::HARNESS_GENERATOR);
    CHECK(generator.turn_cap == 50);
    CHECK(generator.terminator == "submit_harness");
    CHECK(generator.tool_categories == std::vector<std::string>{"code_view", "sast", "dast"});
}

TEST_CASE("the tool registry dispatches by name and filters schemas by category") {
    hq::ToolRegistry registry;
    registry.add({"ping", "misc", "answers pong", {{"x", "integer"}},
                  [](const nlohmann::json&) -> nlohmann::json { return {{"pong", true}}; }});
    registry.add({"probe", "dast", "", nlohmann::json::object(), echo_tool});

    CHECK(registry.has("ping"));
    CHECK_FALSE(registry.has("pong"));
    CHECK(registry.call("ping", {})["pong"] == true);
    CHECK_THROWS_AS(registry.call("absent", {}), hq::ConfigError);

    const nlohmann::json schemas = registry.schemas({"misc"});
    REQUIRE(schemas.size() == 1);
    CHECK(schemas[0]["name"] == "ping");
    CHECK(schemas[0]["description"] == "answers pong");

    CHECK(registry.covers({"misc", "dast"}));
    CHECK_FALSE(registry.covers({"misc", "sast"}));
    CHECK(registry.names_in("dast") == std::vector<std::string>{"probe"});
    CHECK(registry.names_in("nothing").empty());
}

TEST_CASE("the agent loop feeds tools and stops at the terminator") {
    hq::AgentConfig config;
    config.name = hq::AgentName::LOGIC_GROUP;
    config.turn_cap = 10;
    config.tool_categories = {"misc"};
    config.terminator = "submit";

    const nlohmann::json script = {
        {"agents",
         {{"logic_group",
           {{"ctx",
             {{{"text", "looking around"},
               {"calls", {{{"tool", "ping"}, {"args", {{"n", 1}}}}}}},
              {{"text", "done"},
               {"calls", {{{"tool", "submit"}, {"args", {{"answer", 42}}}}}}}}}}}}},
    };
    hq::ScriptedModel model(script);
    auto registry = registry_with("ping", "misc", echo_tool);

    const hq::AgentRunResult run = hq::run_agent(config, model, registry, {{"goal", "x"}}, "ctx");
    CHECK(run.turns_used == 2);
    CHECK(run.payload == nlohmann::json{{"answer", 42}});
    REQUIRE(run.log.size() == 2);
    CHECK(run.log[0].tool == "ping");
    CHECK(run.log[0].turn == 1);
    CHECK(run.log[0].result == nlohmann::json{{"echo", {{"n", 1}}}});
    CHECK(run.log[1].tool == "submit");

    const nlohmann::json entry = hq::to_json(run.log[0]);
    CHECK(entry["turn"] == 1);
    CHECK(entry["tool"] == "ping");
}

TEST_CASE("a registered terminator can veto and the loop continues") {
    hq::AgentConfig config;
    config.name = hq::AgentName::HARNESS_GENERATOR;
    config.turn_cap = 10;
    config.tool_categories = {"misc"};
    config.terminator = "submit";

    const nlohmann::json script = {
        {"agents",
         {{"harness_generator",
           {{"",
             {{{"calls", {{{"tool", "submit"}, {"args", {{"draft", 1}}}}}}},
              {{"calls", {{{"tool", "submit"}, {"args", {{"draft", 2}}}}}}}}}}}}},
    };
    hq::ScriptedModel model(script);

    hq::ToolRegistry registry;
    registry.add({"noop", "misc", "", nlohmann::json::object(), echo_tool});
    int submissions = 0;
    registry.add({"submit", "gate", "", nlohmann::json::object(),
                  [&submissions](const nlohmann::json&) -> nlohmann::json {
                      ++submissions;
                      if (submissions == 1) return {{"_rejected", true}, {"why", "too thin"}};
                      return {{"ok", true}};
                  }});

    const hq::AgentRunResult run = hq::run_agent(config, model, registry, {});
    CHECK(submissions == 2);
    CHECK(run.turns_used == 2);
    CHECK(run.payload == nlohmann::json{{"draft", 2}});
    /* The vetoed attempt stays in the log. */
    REQUIRE(run.log.size() == 2);
    CHECK(run.log[0].result["_rejected"] == true);
}

TEST_CASE("unknown tools come back as errors instead of aborting") {
    hq::AgentConfig config;
    config.turn_cap = 5;
    config.tool_categories = {"misc"};
    config.terminator = "submit";

    const nlohmann::json script = {
        {"agents",
         {{"logic_group",
           {{"",
             {{{"calls", {{{"tool", "imaginary"}, {"args", nlohmann::json::object()}}}}},
              {{"calls", {{{"tool", "submit"}, {"args", {{"done", true}}}}}}}}}}}}},
    };
    hq::ScriptedModel model(script);
    auto registry = registry_with("noop", "misc", echo_tool);

    const hq::AgentRunResult run = hq::run_agent(config, model, registry, {});
    REQUIRE(run.log.size() == 2);
    CHECK(run.log[0].result["error"] == "unknown tool: imaginary");
    CHECK(run.payload == nlohmann::json{{"done", true}});
}

TEST_CASE("running past the turn cap raises") {
    hq::AgentConfig config;
    config.turn_cap = 3;
    config.tool_categories = {"misc"};
    config.terminator = "submit";

    nlohmann::json turns = nlohmann::json::array();
    for (int i = 0; i < 4; ++i) {
        turns.push_back({{"text", "still thinking"}, {"calls", nlohmann::json::array()}});
    }
    const nlohmann::json script = {{"agents", {{"logic_group", {{"", turns}}}}}};
    hq::ScriptedModel model(script);
    auto registry = registry_with("noop", "misc", echo_tool);

    CHECK_THROWS_AS(hq::run_agent(config, model, registry, {}), hq::TurnCapExceededError);
}

TEST_CASE("a registry that misses a category is a configuration error") {
    hq::AgentConfig config;
    config.tool_categories = {"misc", "dast"};
    config.terminator = "submit";

    const nlohmann::json script = {{"agents", nlohmann::json::object()}};
    hq::ScriptedModel model(script);
    auto registry = registry_with("noop", "misc", echo_tool);

    CHECK_THROWS_AS(hq::run_agent(config, model, registry, {}), hq::ConfigError);
}

TEST_CASE("the scripted model is keyed by agent and context") {
    const nlohmann::json script = {
        {"agents", {{"logic_group", {{"a", {{{"text", "turn for a"}}}}}}}},
    };
    hq::ScriptedModel model(script);

    hq::ModelRequest request;
    request.agent = "logic_group";
    request.context = "a";
    CHECK(model.complete(request).text == "turn for a");
    /* Exhausted and unknown keys are script errors. */
    CHECK_THROWS_AS(model.complete(request), hq::ConfigError);
    request.context = "b";
    CHECK_THROWS_AS(model.complete(request), hq::ConfigError);

    CHECK_THROWS_AS(hq::ScriptedModel(nlohmann::json::object()), hq::ConfigError);
}

TEST_CASE("static-analysis tools answer from the call graph") {
    const hq::CallGraph g = fixtures::load_graph("toy_callgraph.json");
    hq::ToolRegistry registry;
    hq::add_sast_tools(registry, g, 20);

    CHECK(registry.call("get_callers", {{"symbol", "buf_grow"}})["callers"] ==
          nlohmann::json({"emit_node", "resolve_anchor", "scan_token"}));
    CHECK(registry.call("get_callees", {{"symbol", "parse_document"}})["callees"] ==
          nlohmann::json({"resolve_anchor", "scan_token"}));

    const nlohmann::json defs = registry.call("find_definition", {{"symbol", "yaml_load"}});
    REQUIRE(defs["definitions"].size() == 1);
    CHECK(defs["definitions"][0]["file"] == "api/load.c");

    const nlohmann::json reach = registry.call("forward_reach", {{"symbol", "yaml_load"}});
    CHECK(reach["reach"]["parse_document"] == 1);
    CHECK(reach["reach"]["buf_grow"] == 3);

    const nlohmann::json shallow =
        registry.call("forward_reach", {{"symbol", "yaml_load"}, {"depth", 1}});
    CHECK(shallow["reach"].size() == 1);

    const nlohmann::json reverse = registry.call("reverse_reach", {{"symbol", "buf_grow"}});
    CHECK(reverse["reach"]["yaml_scan"]["distance"] == 2);
    CHECK(reverse["reach"]["yaml_scan"]["visibility"] == "public");

    const nlohmann::json entries =
        registry.call("public_entries_for", {{"symbol", "buf_grow"}});
    REQUIRE(entries["entries"].size() == 3);
    CHECK(entries["entries"][0]["id"] == "yaml_emit");
    CHECK(entries["entries"][0]["distance"] == 2);

    const nlohmann::json batch = registry.call(
        "public_entries_for_batch", {{"symbols", {"buf_grow", "parse_document", "ghost"}}});
    CHECK(batch["buf_grow"]["entries"].size() == 3);
    CHECK(batch["parse_document"]["entries"][0]["id"] == "yaml_load");
    CHECK(batch["ghost"]["error"] == "unknown symbol");

    CHECK(registry.call("is_public_api", {{"symbol", "yaml_load"}})["public"] == true);
    CHECK(registry.call("is_public_api", {{"symbol", "buf_grow"}})["public"] == false);

    CHECK(registry.call("get_callers", {{"symbol", "ghost"}})["error"] ==
          "unknown symbol: ghost");
    CHECK(registry.call("get_callers", nlohmann::json::object())["error"] ==
          "missing \"symbol\" argument");
}

TEST_CASE("code-view tools stay inside the project root") {
    TempTree tree;
    hq::ToolRegistry registry;
    hq::add_code_view_tools(registry, tree.root.string());

    const nlohmann::json content = registry.call("read_file", {{"path", "src/lib.c"}});
    CHECK(content["content"].get<std::string>().find("helper") != std::string::npos);

    CHECK(registry.call("read_file", {{"path", "missing.c"}})["error"] == "no such file");
    CHECK(registry.call("read_file", {{"path", "../escape.c"}})["error"] == "no such file");
    CHECK(registry.call("read_file", nlohmann::json::object())["error"] ==
          "missing \"path\" argument");

    const nlohmann::json listing = registry.call("list_directory", nlohmann::json::object());
    const auto entries = listing["entries"].get<std::vector<std::string>>();
    CHECK(std::find(entries.begin(), entries.end(), "src/") != entries.end());
    CHECK(std::find(entries.begin(), entries.end(), "README") != entries.end());
    CHECK(registry.call("list_directory", {{"path", "../"}})["error"] == "no such directory");

    const nlohmann::json hits = registry.call("search_files", {{"pattern", "lookup_tag"}});
    REQUIRE(hits["matches"].size() == 1);
    CHECK(hits["matches"][0]["file"] == "src/lib.c");
    CHECK(hits["matches"][0]["line"] == 2);

    const nlohmann::json fuzzers = registry.call("list_existing_fuzzers", {});
    REQUIRE(fuzzers["fuzzers"].size() == 1);
    CHECK(fuzzers["fuzzers"][0] == "fuzz/old_harness.c");
}

TEST_CASE("the http backend speaks the chat-completions shape") {
    httplib::Server server;
    nlohmann::json seen_body;

    server.Post("/v1/chat/completions",
                [&seen_body](const httplib::Request& req, httplib::Response& res) {
                    seen_body = nlohmann::json::parse(req.body);
                    const nlohmann::json reply = {
                        {"choices",
                         {{{"message",
                            {{"content", "inspecting the scanner"},
                             {"tool_calls",
                              {{{"id", "call_1"},
                                {"type", "function"},
                                {"function",
                                 {{"name", "get_callers"},
                                  {"arguments", "{\"symbol\": \"buf_grow\"}"}}}}}}}}}}},
                    };
                    res.set_content(reply.dump(), "application/json");
                });
    server.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("backend exploded", "text/plain");
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    hq::HttpModelOptions options;
    options.base_url = "http://127.0.0.1:" + std::to_string(port);

    {
        hq::HttpModel model(options);
        hq::ModelRequest request;
        request.agent = "api_research";
        request.context = "token-scanning";
        request.messages.push_back({{"role", "task"}, {"content", "study the API"}});
        request.messages.push_back(
            {{"role", "assistant"}, {"content", "ok"}, {"calls", nlohmann::json::array()}});
        request.messages.push_back(
            {{"role", "tool"}, {"tool", "ping"}, {"result", {{"pong", true}}}});
        request.tool_schemas.push_back({{"name", "get_callers"},
                                        {"description", "who calls it"},
                                        {"parameters", {{"symbol", "string"}}}});

        const hq::ModelReply reply = model.complete(request);
        CHECK(reply.text == "inspecting the scanner");
        REQUIRE(reply.calls.size() == 1);
        CHECK(reply.calls[0].tool == "get_callers");
        CHECK(reply.calls[0].args == nlohmann::json{{"symbol", "buf_grow"}});

        /* The transcript went over the wire in the provider's shape. */
        REQUIRE(seen_body["messages"].size() == 3);
        CHECK(seen_body["messages"][0]["role"] == "user");
        CHECK(seen_body["messages"][1]["role"] == "assistant");
        CHECK(seen_body["messages"][2]["role"] == "tool");
        CHECK(seen_body["tools"][0]["function"]["name"] == "get_callers");
        CHECK(seen_body["metadata"]["agent"] == "api_research");
    }

    {
        hq::HttpModelOptions broken = options;
        broken.path = "/broken";
        hq::HttpModel model(broken);
        hq::ModelRequest request;
        request.agent = "api_research";
        CHECK_THROWS_AS(model.complete(request), hq::ExecutorUnavailableError);
    }

    server.stop();
    server_thread.join();

    {
        /* Nothing listens here any more. */
        hq::HttpModel model(options);
        hq::ModelRequest request;
        request.agent = "api_research";
        CHECK_THROWS_AS(model.complete(request), hq::ExecutorUnavailableError);
    }

    CHECK_THROWS_AS(hq::HttpModel(hq::HttpModelOptions{"https://remote.example", "m", "K", "/", 1}),
                    hq::ConfigError);
}
