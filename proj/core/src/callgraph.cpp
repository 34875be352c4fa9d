#include "hq/callgraph.hpp"

#include <algorithm>
#include <queue>

namespace hq {

namespace {

const std::set<std::string> kNoNeighbours;

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> segments;
    std::string current;
    for (char c : path) {
        if (c == '/') {
            if (!current.empty()) segments.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) segments.push_back(current);
    return segments;
}

bool has_marker(const std::vector<std::string>& segments,
                const std::vector<std::string>& markers) {
    for (const auto& seg : segments) {
        if (std::find(markers.begin(), markers.end(), seg) != markers.end()) return true;
    }
    return false;
}

const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                    const char* context) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(std::string(context) + " is missing required field \"" + key + "\"");
    }
    return *it;
}

std::string require_string(const nlohmann::json& obj, const char* key, const char* context) {
    const auto& v = require_field(obj, key, context);
    if (!v.is_string()) {
        throw SchemaError(std::string(context) + " field \"" + key + "\" must be a string");
    }
    return v.get<std::string>();
}

}  // namespace

std::string to_string(Visibility v) {
    switch (v) {
    case Visibility::PUBLIC: return "public";
    case Visibility::INTERNAL: return "internal";
    case Visibility::UNKNOWN: return "unknown";
    }
    return "unknown";
}

const VisibilityRules& default_visibility_rules() {
    static const VisibilityRules rules{
        {"include", "public", "api"},
        {"internal", "private", "src", "core", "util", "common", "impl", "detail"},
    };
    return rules;
}

std::string basename_of(const std::string& name) {
    std::size_t cut = 0;
    std::size_t scope = name.rfind("::");
    if (scope != std::string::npos) cut = scope + 2;
    std::size_t dot = name.rfind('.');
    if (dot != std::string::npos && dot + 1 > cut) cut = dot + 1;
    return name.substr(cut);
}

Visibility classify_visibility(const FunctionNode& node, const VisibilityRules& rules) {
    if (node.file.empty()) return Visibility::UNKNOWN;
    auto segments = split_path(node.file);
    if (has_marker(segments, rules.public_markers)) return Visibility::PUBLIC;
    if (has_marker(segments, rules.internal_markers)) return Visibility::INTERNAL;
    return Visibility::UNKNOWN;
}

CallGraph CallGraph::from_json(const nlohmann::json& doc, const VisibilityRules& rules,
                               const VisibilityResolver* resolver) {
    if (!doc.is_object()) throw SchemaError("call graph document must be a JSON object");

    const auto& version = require_field(doc, "version", "call graph document");
    if (!version.is_number_integer() || version.get<int>() != 1) {
        throw SchemaError("unsupported call graph document version");
    }

    const auto& nodes = require_field(doc, "nodes", "call graph document");
    const auto& edges = require_field(doc, "edges", "call graph document");
    if (!nodes.is_array()) throw SchemaError("\"nodes\" must be an array");
    if (!edges.is_array()) throw SchemaError("\"edges\" must be an array");

    CallGraph g;
    for (const auto& item : nodes) {
        if (!item.is_object()) throw SchemaError("node entries must be objects");
        FunctionNode node;
        node.id = require_string(item, "id", "node");
        node.name = require_string(item, "name", "node");
        node.file = require_string(item, "file", "node");

        const auto& line = require_field(item, "line", "node");
        if (!line.is_number_integer()) throw SchemaError("node field \"line\" must be an integer");
        node.line = line.get<int>();

        const auto& external = require_field(item, "external", "node");
        if (!external.is_boolean()) throw SchemaError("node field \"external\" must be a boolean");
        node.external = external.get<bool>();

        if (auto it = item.find("unsafe_count"); it != item.end() && !it->is_null()) {
            if (!it->is_number_integer() || it->get<long long>() < 0) {
                throw SchemaError("node field \"unsafe_count\" must be a non-negative integer or null");
            }
            node.unsafe_count = it->get<int>();
        }

        node.basename = basename_of(node.name);
        node.visibility = classify_visibility(node, rules);
        if (node.visibility == Visibility::UNKNOWN && resolver) {
            node.visibility = resolver->resolve(node);
        }

        if (g.nodes_.count(node.id)) {
            throw IntegrityError("duplicate node id \"" + node.id + "\"");
        }
        g.by_name_[node.name].insert(node.id);
        g.by_basename_[node.basename].insert(node.id);
        g.nodes_.emplace(node.id, std::move(node));
    }

    for (const auto& item : edges) {
        if (!item.is_object()) throw SchemaError("edge entries must be objects");
        std::string caller = require_string(item, "caller", "edge");
        std::string callee = require_string(item, "callee", "edge");
        if (!g.nodes_.count(caller)) {
            throw IntegrityError("edge references unknown caller \"" + caller + "\"");
        }
        if (!g.nodes_.count(callee)) {
            throw IntegrityError("edge references unknown callee \"" + callee + "\"");
        }
        if (g.out_[caller].insert(callee).second) {
            g.in_[callee].insert(caller);
            ++g.edge_count_;
        }
    }
    return g;
}

nlohmann::json CallGraph::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [id, node] : nodes_) {
        nlohmann::json item{
            {"id", node.id},
            {"name", node.name},
            {"file", node.file},
            {"line", node.line},
            {"external", node.external},
        };
        if (node.unsafe_count) {
            item["unsafe_count"] = *node.unsafe_count;
        } else {
            item["unsafe_count"] = nullptr;
        }
        nodes.push_back(std::move(item));
    }

    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [caller, callees] : out_) {
        for (const auto& callee : callees) {
            edges.push_back({{"caller", caller}, {"callee", callee}});
        }
    }
    return nlohmann::json{{"version", 1}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

bool CallGraph::contains(const std::string& id) const { return nodes_.count(id) != 0; }

const FunctionNode& CallGraph::node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw UnknownFunctionError("unknown function id \"" + id + "\"");
    return it->second;
}

const std::set<std::string>& CallGraph::callers_of(const std::string& id) const {
    node(id);
    auto it = in_.find(id);
    return it == in_.end() ? kNoNeighbours : it->second;
}

const std::set<std::string>& CallGraph::callees_of(const std::string& id) const {
    node(id);
    auto it = out_.find(id);
    return it == out_.end() ? kNoNeighbours : it->second;
}

namespace {

/* Shared BFS over either adjacency direction.  Distances are shortest hop
 * counts; the start node is dropped from the result even if revisited. */
std::map<std::string, int> bounded_bfs(
    const std::string& start, int depth,
    const std::map<std::string, std::set<std::string>>& adjacency) {
    std::map<std::string, int> dist;
    if (depth <= 0) return dist;

    std::queue<std::pair<std::string, int>> frontier;
    frontier.emplace(start, 0);
    std::set<std::string> seen{start};
    while (!frontier.empty()) {
        auto [current, d] = frontier.front();
        frontier.pop();
        if (d == depth) continue;
        auto it = adjacency.find(current);
        if (it == adjacency.end()) continue;
        for (const auto& next : it->second) {
            if (!seen.insert(next).second) continue;
            dist[next] = d + 1;
            frontier.emplace(next, d + 1);
        }
    }
    dist.erase(start);
    return dist;
}

}  // namespace

std::map<std::string, int> CallGraph::forward_reach(const std::string& id, int depth) const {
    node(id);
    return bounded_bfs(id, depth, out_);
}

std::map<std::string, ReverseReachEntry> CallGraph::reverse_reach(const std::string& id,
                                                                  int depth) const {
    node(id);
    std::map<std::string, ReverseReachEntry> result;
    for (const auto& [ancestor, d] : bounded_bfs(id, depth, in_)) {
        result.emplace(ancestor, ReverseReachEntry{d, nodes_.at(ancestor).visibility});
    }
    return result;
}

std::vector<PublicEntry> CallGraph::public_entries_for(const std::string& core_id,
                                                       int depth) const {
    std::vector<PublicEntry> entries;
    for (const auto& [ancestor, info] : reverse_reach(core_id, depth)) {
        if (info.visibility == Visibility::PUBLIC) {
            entries.push_back({ancestor, info.distance});
        }
    }
    std::sort(entries.begin(), entries.end(), [](const PublicEntry& a, const PublicEntry& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
    });
    return entries;
}

std::map<std::string, std::vector<PublicEntry>> CallGraph::public_entries_for_batch(
    const std::vector<std::string>& core_ids, int depth) const {
    std::map<std::string, std::vector<PublicEntry>> result;
    for (const auto& core : core_ids) {
        result[core] = public_entries_for(core, depth);
    }
    return result;
}

std::vector<std::string> CallGraph::ids_for_name(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return {};
    return {it->second.begin(), it->second.end()};
}

std::vector<std::string> CallGraph::ids_for_basename(const std::string& basename) const {
    auto it = by_basename_.find(basename);
    if (it == by_basename_.end()) return {};
    return {it->second.begin(), it->second.end()};
}

std::vector<std::string> CallGraph::resolve_symbol(const std::string& symbol) const {
    if (nodes_.count(symbol)) return {symbol};
    if (auto by_name = ids_for_name(symbol); !by_name.empty()) return by_name;
    return ids_for_basename(symbol);
}

}  // namespace hq
