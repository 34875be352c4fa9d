#include "hq/http_model.hpp"

#include <cstdlib>

#include <httplib.h>

#include "hq/errors.hpp"

namespace hq {

namespace {

std::string message_content(const nlohmann::json& content) {
    if (content.is_string()) return content.get<std::string>();
    return content.dump();
}

/* Transcript entries use roles task/assistant/tool; the wire format wants
 * user/assistant/tool with tool calls echoed in OpenAI's shape. */
nlohmann::json wire_messages(const nlohmann::json& messages) {
    nlohmann::json out = nlohmann::json::array();
    int call_id = 0;
    for (const auto& entry : messages) {
        const std::string role = entry.value("role", "");
        if (role == "task") {
            out.push_back({{"role", "user"}, {"content", message_content(entry["content"])}});
        } else if (role == "assistant") {
            nlohmann::json msg = {{"role", "assistant"},
                                  {"content", entry.value("content", "")}};
            if (entry.contains("calls") && !entry["calls"].empty()) {
                nlohmann::json calls = nlohmann::json::array();
                for (const auto& call : entry["calls"]) {
                    calls.push_back({{"id", "call_" + std::to_string(++call_id)},
                                     {"type", "function"},
                                     {"function",
                                      {{"name", call.value("tool", "")},
                                       {"arguments", call.value("args", nlohmann::json::object()).dump()}}}});
                }
                msg["tool_calls"] = std::move(calls);
            }
            out.push_back(std::move(msg));
        } else if (role == "tool") {
            out.push_back({{"role", "tool"},
                           {"name", entry.value("tool", "")},
                           {"content", entry.value("result", nlohmann::json::object()).dump()}});
        }
    }
    return out;
}

nlohmann::json wire_tools(const nlohmann::json& schemas) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& schema : schemas) {
        out.push_back({{"type", "function"},
                       {"function",
                        {{"name", schema.value("name", "")},
                         {"description", schema.value("description", "")},
                         {"parameters", schema.value("parameters", nlohmann::json::object())}}}});
    }
    return out;
}

}  // namespace

HttpModel::HttpModel(HttpModelOptions options) : options_(std::move(options)) {
    std::string rest = options_.base_url;
    const std::string scheme = "http://";
    if (rest.rfind(scheme, 0) == 0) {
        rest = rest.substr(scheme.size());
    } else if (rest.rfind("https://", 0) == 0) {
        throw ConfigError("https model endpoints are not supported; use a local http proxy");
    }
    if (auto slash = rest.find('/'); slash != std::string::npos) {
        rest = rest.substr(0, slash);
    }
    if (auto colon = rest.find(':'); colon != std::string::npos) {
        host_ = rest.substr(0, colon);
        port_ = std::stoi(rest.substr(colon + 1));
    } else {
        host_ = rest;
        port_ = 80;
    }
    if (host_.empty()) throw ConfigError("model base_url has no host: " + options_.base_url);
}

ModelReply HttpModel::complete(const ModelRequest& request) {
    nlohmann::json body = {
        {"model", options_.model},
        {"temperature", 0},
        {"messages", wire_messages(request.messages)},
    };
    if (!request.tool_schemas.empty()) {
        body["tools"] = wire_tools(request.tool_schemas);
    }
    body["metadata"] = {{"agent", request.agent}, {"context", request.context}};

    httplib::Client client(host_, port_);
    client.set_read_timeout(options_.timeout_s, 0);
    client.set_write_timeout(options_.timeout_s, 0);

    httplib::Headers headers;
    if (const char* key = std::getenv(options_.key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto res = client.Post(options_.path, headers, body.dump(), "application/json");
    if (!res) {
        throw ExecutorUnavailableError("model endpoint unreachable: " + host_ + ":" +
                                       std::to_string(port_));
    }
    if (res->status != 200) {
        throw ExecutorUnavailableError("model endpoint returned status " +
                                       std::to_string(res->status) + ": " +
                                       res->body.substr(0, 500));
    }

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw ExecutorUnavailableError(std::string("model endpoint sent malformed JSON: ") +
                                       e.what());
    }

    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw ExecutorUnavailableError("model reply has no choices");
    }
    const nlohmann::json& message = doc["choices"][0].value("message", nlohmann::json::object());

    ModelReply reply;
    if (message.contains("content") && message["content"].is_string()) {
        reply.text = message["content"].get<std::string>();
    }
    for (const auto& call : message.value("tool_calls", nlohmann::json::array())) {
        const nlohmann::json& fn = call.value("function", nlohmann::json::object());
        ToolCall tc;
        tc.tool = fn.value("name", "");
        const std::string arguments = fn.value("arguments", "{}");
        try {
            tc.args = nlohmann::json::parse(arguments);
        } catch (const nlohmann::json::exception&) {
            tc.args = {{"_raw", arguments}};
        }
        reply.calls.push_back(std::move(tc));
    }
    return reply;
}

}  // namespace hq
