#include "hq/scripted.hpp"

#include <fstream>

#include "hq/errors.hpp"

namespace hq {

namespace {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open script file: " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed script file " + path + ": " + e.what());
    }
    return doc;
}

std::string turn_key(const std::string& agent, const std::string& context) {
    return agent + "\x1f" + context;
}

}  // namespace

ScriptedModel::ScriptedModel(const nlohmann::json& script) {
    if (!script.is_object() || !script.contains("agents") || !script["agents"].is_object()) {
        throw ConfigError("model script needs an \"agents\" object");
    }
    for (const auto& [agent, contexts] : script["agents"].items()) {
        if (!contexts.is_object()) {
            throw ConfigError("model script: agent \"" + agent + "\" must map contexts to turn lists");
        }
        for (const auto& [context, turns] : contexts.items()) {
            if (!turns.is_array()) {
                throw ConfigError("model script: turns for " + agent + "/" + context + " must be an array");
            }
            turns_[turn_key(agent, context)] = std::vector<nlohmann::json>(turns.begin(), turns.end());
        }
    }
}

std::unique_ptr<ScriptedModel> ScriptedModel::from_file(const std::string& path) {
    return std::make_unique<ScriptedModel>(load_json_file(path));
}

ModelReply ScriptedModel::complete(const ModelRequest& request) {
    std::lock_guard<std::mutex> lock(mu_);
    const std::string key = turn_key(request.agent, request.context);
    auto it = turns_.find(key);
    if (it == turns_.end()) {
        throw ConfigError("no scripted turns for agent \"" + request.agent + "\" context \"" +
                          request.context + "\"");
    }
    std::size_t& next = cursor_[key];
    if (next >= it->second.size()) {
        throw ConfigError("scripted turns exhausted for agent \"" + request.agent +
                          "\" context \"" + request.context + "\"");
    }
    const nlohmann::json& turn = it->second[next++];
    ModelReply reply;
    reply.text = turn.value("text", "");
    for (const auto& call : turn.value("calls", nlohmann::json::array())) {
        ToolCall tc;
        tc.tool = call.at("tool").get<std::string>();
        tc.args = call.value("args", nlohmann::json::object());
        reply.calls.push_back(std::move(tc));
    }
    return reply;
}

ScriptedExecutor::ScriptedExecutor(const nlohmann::json& script)
    : shared_(std::make_shared<Shared>()) {
    if (!script.is_object() || !script.contains("binaries") || !script["binaries"].is_object()) {
        throw ConfigError("executor script needs a \"binaries\" object");
    }
    for (const auto& [path, entry] : script["binaries"].items()) {
        BinaryScript bs;
        for (const auto& row : entry.value("reach", nlohmann::json::array())) {
            bs.reach.push_back(row);
        }
        for (const auto& row : entry.value("run", nlohmann::json::array())) {
            bs.run.push_back(row);
        }
        if (entry.contains("fuzz")) {
            bs.fuzz = entry["fuzz"];
        }
        if (entry.contains("coverage")) {
            bs.coverage = entry["coverage"];
        }
        shared_->binaries[path] = std::move(bs);
    }
}

ScriptedExecutor ScriptedExecutor::from_file(const std::string& path) {
    return ScriptedExecutor(load_json_file(path));
}

std::unique_ptr<Executor> ScriptedExecutor::clone() const {
    return std::unique_ptr<Executor>(new ScriptedExecutor(shared_));
}

ScriptedExecutor::BinaryScript& ScriptedExecutor::script_at(const std::string& binary) {
    auto it = shared_->binaries.find(binary);
    if (it == shared_->binaries.end()) {
        throw ExecutorUnavailableError("no scripted outcomes for binary: " +
                                       (binary.empty() ? "<unbound>" : binary));
    }
    return it->second;
}

ReachResult ScriptedExecutor::reach_check(const ProbeSpec&) {
    std::lock_guard<std::mutex> lock(shared_->mu);
    BinaryScript& bs = script_at(bound_binary());
    if (bs.reach_next >= bs.reach.size()) {
        throw ExecutorUnavailableError("scripted reach outcomes exhausted for " + bound_binary());
    }
    const nlohmann::json& row = bs.reach[bs.reach_next++];
    ReachResult result;
    result.hit = row.value("hit", false);
    for (const auto& name : row.value("called_functions", nlohmann::json::array())) {
        result.called.push_back(name.get<std::string>());
    }
    result.exit_status = row.value("timeout", false) ? kTimeoutExitStatus : row.value("exit_status", 0);
    return result;
}

RunResult ScriptedExecutor::run_check(const ProbeSpec&) {
    std::lock_guard<std::mutex> lock(shared_->mu);
    BinaryScript& bs = script_at(bound_binary());
    if (bs.run_next >= bs.run.size()) {
        throw ExecutorUnavailableError("scripted run outcomes exhausted for " + bound_binary());
    }
    const nlohmann::json& row = bs.run[bs.run_next++];
    RunResult result;
    result.crashed = row.value("crashed", false);
    result.trace = row.value("trace", "");
    result.exit_status = row.value("timeout", false) ? kTimeoutExitStatus : row.value("exit_status", 0);
    return result;
}

FuzzResult ScriptedExecutor::timed_fuzz(int) {
    std::lock_guard<std::mutex> lock(shared_->mu);
    BinaryScript& bs = script_at(bound_binary());
    if (bs.fuzz.is_null()) {
        throw ExecutorUnavailableError("no scripted fuzz result for " + bound_binary());
    }
    FuzzResult result;
    result.crashed = bs.fuzz.value("crashed", false);
    result.trace = bs.fuzz.value("trace", "");
    result.exit_status =
        bs.fuzz.value("timeout", false) ? kTimeoutExitStatus : bs.fuzz.value("exit_status", 0);
    return result;
}

CoverageResult ScriptedExecutor::coverage() {
    std::lock_guard<std::mutex> lock(shared_->mu);
    BinaryScript& bs = script_at(bound_binary());
    if (bs.coverage.is_null()) {
        throw ExecutorUnavailableError("no scripted coverage for " + bound_binary());
    }
    return coverage_from_json(bs.coverage);
}

ScriptedBuilder::ScriptedBuilder(const nlohmann::json& script)
    : shared_(std::make_shared<Shared>()) {
    if (!script.is_object() || !script.contains("builds") || !script["builds"].is_object()) {
        throw ConfigError("builder script needs a \"builds\" object");
    }
    for (const auto& [context, rows] : script["builds"].items()) {
        if (!rows.is_array()) {
            throw ConfigError("builder script: builds for \"" + context + "\" must be an array");
        }
        shared_->builds[context] = std::vector<nlohmann::json>(rows.begin(), rows.end());
    }
}

ScriptedBuilder ScriptedBuilder::from_file(const std::string& path) {
    return ScriptedBuilder(load_json_file(path));
}

std::unique_ptr<Builder> ScriptedBuilder::clone() const {
    return std::unique_ptr<Builder>(new ScriptedBuilder(shared_));
}

BuildResult ScriptedBuilder::build(const std::string&) {
    std::lock_guard<std::mutex> lock(shared_->mu);
    auto it = shared_->builds.find(context_);
    if (it == shared_->builds.end()) {
        throw ConfigError("no scripted builds for context \"" + context_ + "\"");
    }
    std::size_t& next = shared_->cursor[context_];
    if (next >= it->second.size()) {
        throw ConfigError("scripted builds exhausted for context \"" + context_ + "\"");
    }
    const nlohmann::json& row = it->second[next++];
    BuildResult result;
    result.success = row.value("result", "") == "success";
    result.compiler_tail = row.value("tail", "");
    result.binary = row.value("binary", "");
    return result;
}

}  // namespace hq
