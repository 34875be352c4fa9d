#ifndef HQ_AGENT_HPP
#define HQ_AGENT_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hq/callgraph.hpp"
#include "hq/errors.hpp"

namespace hq {

enum class AgentName { LOGIC_GROUP, API_RESEARCH, HARNESS_GENERATOR };

std::string to_string(AgentName name);

struct AgentConfig {
    AgentName name = AgentName::LOGIC_GROUP;
    int turn_cap = 50;
    std::vector<std::string> tool_categories;
    std::string terminator;
};

/* Stock configurations: the group-discovery and generator agents get fifty
 * turns, protocol research gets thirty; each submits through exactly one
 * terminator tool. */
AgentConfig default_agent_config(AgentName name);

struct ToolCall {
    std::string tool;
    nlohmann::json args;
};

struct ModelReply {
    std::string text;
    std::vector<ToolCall> calls;
};

/* Everything a backend needs to produce the next turn: which agent is
 * asking, which work item it is on, the running message history, and the
 * schemas of the tools it may call. */
struct ModelRequest {
    std::string agent;
    std::string context;
    nlohmann::json messages = nlohmann::json::array();
    nlohmann::json tool_schemas = nlohmann::json::array();
};

class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual ModelReply complete(const ModelRequest& request) = 0;
};

struct ToolSpec {
    std::string name;
    std::string category;
    std::string description;
    nlohmann::json parameters = nlohmann::json::object();
    std::function<nlohmann::json(const nlohmann::json&)> handler;
};

class ToolRegistry {
public:
    void add(ToolSpec spec);
    bool has(const std::string& name) const;
    nlohmann::json call(const std::string& name, const nlohmann::json& args) const;
    nlohmann::json schemas(const std::vector<std::string>& categories) const;
    bool covers(const std::vector<std::string>& categories) const;
    std::vector<std::string> names_in(const std::string& category) const;

private:
    std::map<std::string, ToolSpec> tools_;
};

struct ToolLogEntry {
    int turn = 0;
    std::string tool;
    nlohmann::json args;
    nlohmann::json result;
};

nlohmann::json to_json(const ToolLogEntry& entry);

struct AgentRunResult {
    nlohmann::json payload;
    std::vector<ToolLogEntry> log;
    int turns_used = 0;
};

/* Turn loop: ask the backend for a turn, dispatch its tool calls in order,
 * feed results back, stop when the terminator is called.  Unknown tools
 * come back to the model as error results rather than aborting the run.  A
 * registered terminator handler may veto by returning {"_rejected": true},
 * in which case the loop continues; otherwise the terminator's arguments
 * are the run's payload.  Exceeding the turn cap raises. */
AgentRunResult run_agent(const AgentConfig& config, ModelBackend& model,
                         const ToolRegistry& tools, const nlohmann::json& task,
                         const std::string& context = "");

/* Static-analysis tool surface over a call graph: caller/callee queries,
 * definition lookup, bounded reach in both directions, and the public-entry
 * helpers.  Symbols resolve by id, name, then basename. */
void add_sast_tools(ToolRegistry& registry, const CallGraph& g, int default_depth);

/* Read-only project navigation rooted at project_root; paths that escape
 * the root are rejected. */
void add_code_view_tools(ToolRegistry& registry, const std::string& project_root);

}  // namespace hq

#endif
