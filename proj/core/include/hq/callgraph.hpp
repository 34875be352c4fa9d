#ifndef HQ_CALLGRAPH_HPP
#define HQ_CALLGRAPH_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hq/errors.hpp"

namespace hq {

enum class Visibility { PUBLIC, INTERNAL, UNKNOWN };

std::string to_string(Visibility v);

/* Path-segment markers deciding whether a definition site is part of the
 * published API surface.  Matching is against whole '/'-separated segments,
 * case-sensitive; a path carrying markers from both lists is PUBLIC. */
struct VisibilityRules {
    std::vector<std::string> public_markers;
    std::vector<std::string> internal_markers;
};

const VisibilityRules& default_visibility_rules();

struct FunctionNode {
    std::string id;
    std::string name;
    std::string basename;   // derived from name, never stored in documents
    std::string file;       // empty for external nodes
    int line = 0;
    bool external = false;
    std::optional<int> unsafe_count;
    Visibility visibility = Visibility::UNKNOWN;  // derived at load
};

/* Last scope separator ("::" or ".") wins; everything after it is the
 * basename.  Template arguments and overload signatures are not parsed. */
std::string basename_of(const std::string& name);

Visibility classify_visibility(const FunctionNode& node, const VisibilityRules& rules);

/* Hook for callers that can classify nodes the path rules cannot (symbol
 * allow-lists, build-system knowledge).  Consulted only for UNKNOWN nodes. */
class VisibilityResolver {
public:
    virtual ~VisibilityResolver() = default;
    virtual Visibility resolve(const FunctionNode& node) const = 0;
};

struct PublicEntry {
    std::string id;
    int distance = 0;

    bool operator==(const PublicEntry&) const = default;
};

struct ReverseReachEntry {
    int distance = 0;
    Visibility visibility = Visibility::UNKNOWN;
};

/* Immutable static call graph.  All query results are ordered (std::map /
 * sorted vectors) so downstream artifacts serialize identically run to run. */
class CallGraph {
public:
    CallGraph() = default;

    /* Accepts documents of the shape
     *   {"version": 1,
     *    "nodes": [{"id", "name", "file", "line", "external", "unsafe_count"}],
     *    "edges": [{"caller", "callee"}]}
     * Unknown keys at either level are ignored.  Raises SchemaError for shape
     * problems and IntegrityError for duplicate ids or dangling edges. */
    static CallGraph from_json(const nlohmann::json& doc,
                               const VisibilityRules& rules = default_visibility_rules(),
                               const VisibilityResolver* resolver = nullptr);

    nlohmann::json to_json() const;

    bool contains(const std::string& id) const;
    const FunctionNode& node(const std::string& id) const;
    const std::map<std::string, FunctionNode>& nodes() const { return nodes_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edge_count_; }

    const std::set<std::string>& callers_of(const std::string& id) const;
    const std::set<std::string>& callees_of(const std::string& id) const;

    /* Everything reachable from id along call edges within depth hops,
     * mapped to its shortest distance.  The start node itself is excluded,
     * even when a cycle leads back to it. */
    std::map<std::string, int> forward_reach(const std::string& id, int depth) const;

    /* Everything that can reach id within depth hops, tagged with shortest
     * distance and visibility.  Excludes id itself. */
    std::map<std::string, ReverseReachEntry> reverse_reach(const std::string& id, int depth) const;

    /* PUBLIC ancestors of core_id within depth, sorted by (distance, id). */
    std::vector<PublicEntry> public_entries_for(const std::string& core_id, int depth) const;

    std::map<std::string, std::vector<PublicEntry>> public_entries_for_batch(
        const std::vector<std::string>& core_ids, int depth) const;

    /* Name lookups return every match; callers disambiguate. */
    std::vector<std::string> ids_for_name(const std::string& name) const;
    std::vector<std::string> ids_for_basename(const std::string& basename) const;

    /* Resolution ladder for user-facing symbols: exact id, then exact name,
     * then basename.  First rung with any match wins. */
    std::vector<std::string> resolve_symbol(const std::string& symbol) const;

private:
    std::map<std::string, FunctionNode> nodes_;
    std::map<std::string, std::set<std::string>> out_;
    std::map<std::string, std::set<std::string>> in_;
    std::map<std::string, std::set<std::string>> by_name_;
    std::map<std::string, std::set<std::string>> by_basename_;
    std::size_t edge_count_ = 0;
};

}  // namespace hq

#endif
