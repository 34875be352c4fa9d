#include "hq/agent.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hq {

std::string to_string(AgentName name) {
    switch (name) {
    case AgentName::LOGIC_GROUP: return "logic_group";
    case AgentName::API_RESEARCH: return "api_research";
    case AgentName::HARNESS_GENERATOR: return "harness_generator";
    }
    return "logic_group";
}

AgentConfig default_agent_config(AgentName name) {
    switch (name) {
    case AgentName::LOGIC_GROUP:
        return {name, 50, {"code_view", "sast"}, "submit_logic_group"};
    case AgentName::API_RESEARCH:
        return {name, 30, {"code_view", "sast"}, "submit_p2_report"};
    case AgentName::HARNESS_GENERATOR:
        return {name, 50, {"code_view", "sast", "dast"}, "submit_harness"};
    }
    return {name, 50, {"code_view", "sast"}, "submit_logic_group"};
}

void ToolRegistry::add(ToolSpec spec) {
    const std::string name = spec.name;
    tools_[name] = std::move(spec);
}

bool ToolRegistry::has(const std::string& name) const { return tools_.count(name) != 0; }

nlohmann::json ToolRegistry::call(const std::string& name, const nlohmann::json& args) const {
    auto it = tools_.find(name);
    if (it == tools_.end()) throw ConfigError("tool \"" + name + "\" is not registered");
    return it->second.handler(args);
}

nlohmann::json ToolRegistry::schemas(const std::vector<std::string>& categories) const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [name, spec] : tools_) {
        if (std::find(categories.begin(), categories.end(), spec.category) == categories.end()) {
            continue;
        }
        out.push_back({
            {"name", spec.name},
            {"description", spec.description},
            {"parameters", spec.parameters},
        });
    }
    return out;
}

bool ToolRegistry::covers(const std::vector<std::string>& categories) const {
    for (const auto& category : categories) {
        bool found = false;
        for (const auto& [name, spec] : tools_) {
            if (spec.category == category) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

std::vector<std::string> ToolRegistry::names_in(const std::string& category) const {
    std::vector<std::string> names;
    for (const auto& [name, spec] : tools_) {
        if (spec.category == category) names.push_back(name);
    }
    return names;
}

nlohmann::json to_json(const ToolLogEntry& entry) {
    return nlohmann::json{
        {"turn", entry.turn},
        {"tool", entry.tool},
        {"args", entry.args},
        {"result", entry.result},
    };
}

AgentRunResult run_agent(const AgentConfig& config, ModelBackend& model,
                         const ToolRegistry& tools, const nlohmann::json& task,
                         const std::string& context) {
    if (!tools.covers(config.tool_categories)) {
        throw ConfigError("tool registry does not cover the agent's tool categories");
    }

    ModelRequest request;
    request.agent = to_string(config.name);
    request.context = context;
    request.tool_schemas = tools.schemas(config.tool_categories);
    request.messages.push_back({{"role", "task"}, {"content", task}});

    AgentRunResult run;
    for (int turn = 1; turn <= config.turn_cap; ++turn) {
        run.turns_used = turn;
        ModelReply reply = model.complete(request);

        nlohmann::json calls = nlohmann::json::array();
        for (const auto& call : reply.calls) {
            calls.push_back({{"tool", call.tool}, {"args", call.args}});
        }
        request.messages.push_back(
            {{"role", "assistant"}, {"content", reply.text}, {"calls", calls}});

        for (const auto& call : reply.calls) {
            if (call.tool == config.terminator) {
                nlohmann::json result = nlohmann::json::object();
                if (tools.has(call.tool)) result = tools.call(call.tool, call.args);
                run.log.push_back({turn, call.tool, call.args, result});
                if (result.is_object() && result.value("_rejected", false)) {
                    request.messages.push_back(
                        {{"role", "tool"}, {"tool", call.tool}, {"result", result}});
                    continue;
                }
                run.payload = call.args;
                return run;
            }

            nlohmann::json result;
            if (!tools.has(call.tool)) {
                result = {{"error", "unknown tool: " + call.tool}};
            } else {
                result = tools.call(call.tool, call.args);
            }
            run.log.push_back({turn, call.tool, call.args, result});
            request.messages.push_back(
                {{"role", "tool"}, {"tool", call.tool}, {"result", result}});
        }
    }
    throw TurnCapExceededError("agent " + to_string(config.name) + " exceeded " +
                               std::to_string(config.turn_cap) + " turns without submitting");
}

namespace {

std::string get_symbol(const nlohmann::json& args) {
    if (!args.is_object()) return {};
    auto it = args.find("symbol");
    if (it == args.end() || !it->is_string()) return {};
    return it->get<std::string>();
}

nlohmann::json resolve_or_error(const CallGraph& g, const nlohmann::json& args,
                                std::vector<std::string>* ids) {
    const std::string symbol = get_symbol(args);
    if (symbol.empty()) return {{"error", "missing \"symbol\" argument"}};
    *ids = g.resolve_symbol(symbol);
    if (ids->empty()) return {{"error", "unknown symbol: " + symbol}};
    return nullptr;
}

int depth_arg(const nlohmann::json& args, int fallback) {
    if (args.is_object()) {
        if (auto it = args.find("depth"); it != args.end() && it->is_number_integer()) {
            return it->get<int>();
        }
    }
    return fallback;
}

}  // namespace

void add_sast_tools(ToolRegistry& registry, const CallGraph& g, int default_depth) {
    auto symbol_schema = nlohmann::json{{"symbol", "string"}};
    auto symbol_depth_schema = nlohmann::json{{"symbol", "string"}, {"depth", "integer"}};

    registry.add({"get_callers", "sast", "functions that directly call the symbol",
                  symbol_schema, [&g](const nlohmann::json& args) -> nlohmann::json {
                      std::vector<std::string> ids;
                      if (auto err = resolve_or_error(g, args, &ids); !err.is_null()) return err;
                      std::set<std::string> callers;
                      for (const auto& id : ids) {
                          const auto& c = g.callers_of(id);
                          callers.insert(c.begin(), c.end());
                      }
                      return {{"callers", std::vector<std::string>(callers.begin(), callers.end())}};
                  }});

    registry.add({"get_callees", "sast", "functions the symbol directly calls",
                  symbol_schema, [&g](const nlohmann::json& args) -> nlohmann::json {
                      std::vector<std::string> ids;
                      if (auto err = resolve_or_error(g, args, &ids); !err.is_null()) return err;
                      std::set<std::string> callees;
                      for (const auto& id : ids) {
                          const auto& c = g.callees_of(id);
                          callees.insert(c.begin(), c.end());
                      }
                      return {{"callees", std::vector<std::string>(callees.begin(), callees.end())}};
                  }});

    registry.add({"find_definition", "sast", "definition site of the symbol",
                  symbol_schema, [&g](const nlohmann::json& args) -> nlohmann::json {
                      std::vector<std::string> ids;
                      if (auto err = resolve_or_error(g, args, &ids); !err.is_null()) return err;
                      nlohmann::json defs = nlohmann::json::array();
                      for (const auto& id : ids) {
                          const FunctionNode& node = g.node(id);
                          defs.push_back({{"id", node.id},
                                          {"name", node.name},
                                          {"file", node.file},
                                          {"line", node.line}});
                      }
                      return {{"definitions", std::move(defs)}};
                  }});

    registry.add({"forward_reach", "sast", "what the symbol reaches within depth hops",
                  symbol_depth_schema,
                  [&g, default_depth](const nlohmann::json& args) -> nlohmann::json {
                      std::vector<std::string> ids;
                      if (auto err = resolve_or_error(g, args, &ids); !err.is_null()) return err;
                      nlohmann::json reach = nlohmann::json::object();
                      for (const auto& [id, dist] :
                           g.forward_reach(ids.front(), depth_arg(args, default_depth))) {
                          reach[id] = dist;
                      }
                      return {{"reach", std::move(reach)}};
                  }});

    registry.add({"reverse_reach", "sast", "what reaches the symbol within depth hops",
                  symbol_depth_schema,
                  [&g, default_depth](const nlohmann::json& args) -> nlohmann::json {
                      std::vector<std::string> ids;
                      if (auto err = resolve_or_error(g, args, &ids); !err.is_null()) return err;
                      nlohmann::json reach = nlohmann::json::object();
                      for (const auto& [id, info] :
                           g.reverse_reach(ids.front(), depth_arg(args, default_depth))) {
                          reach[id] = {{"distance", info.distance},
                                       {"visibility", to_string(info.visibility)}};
                      }
                      return {{"reach", std::move(reach)}};
                  }});

    registry.add({"public_entries_for", "sast",
                  "public API functions that can reach the symbol, nearest first",
                  symbol_depth_schema,
                  [&g, default_depth](const nlohmann::json& args) -> nlohmann::json {
                      std::vector<std::string> ids;
                      if (auto err = resolve_or_error(g, args, &ids); !err.is_null()) return err;
                      nlohmann::json entries = nlohmann::json::array();
                      for (const auto& entry :
                           g.public_entries_for(ids.front(), depth_arg(args, default_depth))) {
                          entries.push_back({{"id", entry.id}, {"distance", entry.distance}});
                      }
                      return {{"entries", std::move(entries)}};
                  }});

    registry.add({"public_entries_for_batch", "sast",
                  "public entries for several symbols at once",
                  nlohmann::json{{"symbols", "array"}, {"depth", "integer"}},
                  [&g, default_depth](const nlohmann::json& args) -> nlohmann::json {
                      if (!args.is_object() || !args.contains("symbols") ||
                          !args["symbols"].is_array()) {
                          return {{"error", "missing \"symbols\" argument"}};
                      }
                      const int depth = depth_arg(args, default_depth);
                      nlohmann::json out = nlohmann::json::object();
                      for (const auto& item : args["symbols"]) {
                          if (!item.is_string()) continue;
                          auto ids = g.resolve_symbol(item.get<std::string>());
                          if (ids.empty()) {
                              out[item.get<std::string>()] = {{"error", "unknown symbol"}};
                              continue;
                          }
                          nlohmann::json entries = nlohmann::json::array();
                          for (const auto& entry : g.public_entries_for(ids.front(), depth)) {
                              entries.push_back(
                                  {{"id", entry.id}, {"distance", entry.distance}});
                          }
                          out[item.get<std::string>()] = {{"entries", std::move(entries)}};
                      }
                      return out;
                  }});

    registry.add({"is_public_api", "sast", "whether the symbol is part of the published API",
                  symbol_schema, [&g](const nlohmann::json& args) -> nlohmann::json {
                      std::vector<std::string> ids;
                      if (auto err = resolve_or_error(g, args, &ids); !err.is_null()) return err;
                      bool any_public = false;
                      for (const auto& id : ids) {
                          if (g.node(id).visibility == Visibility::PUBLIC) any_public = true;
                      }
                      return {{"public", any_public}};
                  }});
}

namespace {

namespace fs = std::filesystem;

/* Resolves a tool-supplied relative path against the root, refusing
 * anything that climbs out of it. */
std::optional<fs::path> safe_join(const fs::path& root, const std::string& relative) {
    if (relative.find("..") != std::string::npos) return std::nullopt;
    fs::path joined = root / relative;
    return joined;
}

}  // namespace

void add_code_view_tools(ToolRegistry& registry, const std::string& project_root) {
    const fs::path root(project_root);

    registry.add({"read_file", "code_view", "read a file relative to the project root",
                  nlohmann::json{{"path", "string"}},
                  [root](const nlohmann::json& args) -> nlohmann::json {
                      if (!args.is_object() || !args.contains("path") ||
                          !args["path"].is_string()) {
                          return {{"error", "missing \"path\" argument"}};
                      }
                      auto path = safe_join(root, args["path"].get<std::string>());
                      if (!path || !fs::is_regular_file(*path)) {
                          return {{"error", "no such file"}};
                      }
                      std::ifstream in(*path);
                      std::ostringstream content;
                      content << in.rdbuf();
                      return {{"content", content.str()}};
                  }});

    registry.add({"list_directory", "code_view", "list entries of a project directory",
                  nlohmann::json{{"path", "string"}},
                  [root](const nlohmann::json& args) -> nlohmann::json {
                      std::string rel = ".";
                      if (args.is_object() && args.contains("path") && args["path"].is_string()) {
                          rel = args["path"].get<std::string>();
                      }
                      auto path = safe_join(root, rel);
                      if (!path || !fs::is_directory(*path)) {
                          return {{"error", "no such directory"}};
                      }
                      std::vector<std::string> entries;
                      for (const auto& item : fs::directory_iterator(*path)) {
                          entries.push_back(item.path().filename().string() +
                                            (item.is_directory() ? "/" : ""));
                      }
                      std::sort(entries.begin(), entries.end());
                      return {{"entries", entries}};
                  }});

    registry.add({"search_files", "code_view", "find lines containing a literal pattern",
                  nlohmann::json{{"pattern", "string"}},
                  [root](const nlohmann::json& args) -> nlohmann::json {
                      if (!args.is_object() || !args.contains("pattern") ||
                          !args["pattern"].is_string()) {
                          return {{"error", "missing \"pattern\" argument"}};
                      }
                      const std::string pattern = args["pattern"].get<std::string>();
                      nlohmann::json hits = nlohmann::json::array();
                      for (const auto& item : fs::recursive_directory_iterator(root)) {
                          if (!item.is_regular_file()) continue;
                          std::ifstream in(item.path());
                          std::string line;
                          int line_no = 0;
                          while (std::getline(in, line)) {
                              ++line_no;
                              if (line.find(pattern) != std::string::npos) {
                                  hits.push_back({{"file",
                                                   fs::relative(item.path(), root).string()},
                                                  {"line", line_no}});
                              }
                          }
                      }
                      return {{"matches", std::move(hits)}};
                  }});

    registry.add({"list_existing_fuzzers", "code_view",
                  "source files that look like fuzz harnesses",
                  nlohmann::json::object(),
                  [root](const nlohmann::json&) -> nlohmann::json {
                      std::vector<std::string> fuzzers;
                      for (const auto& item : fs::recursive_directory_iterator(root)) {
                          if (!item.is_regular_file()) continue;
                          const std::string rel = fs::relative(item.path(), root).string();
                          if (rel.find("fuzz") != std::string::npos) fuzzers.push_back(rel);
                      }
                      std::sort(fuzzers.begin(), fuzzers.end());
                      return {{"fuzzers", fuzzers}};
                  }});
}

}  // namespace hq
