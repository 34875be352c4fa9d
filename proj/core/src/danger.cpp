#include "hq/danger.hpp"

#include <algorithm>
#include <stdexcept>

#include "hq/evalkit.hpp"

namespace hq {

int unsafe_count_for(const CallGraph& g, const std::string& id, const UnsafeProfile& profile) {
    const FunctionNode& node = g.node(id);
    if (node.unsafe_count) return *node.unsafe_count;
    auto it = profile.per_function.find(id);
    if (it != profile.per_function.end()) return it->second;
    return 0;
}

double danger(const CallGraph& g, const std::string& f, int depth, const UnsafeProfile& profile) {
    if (depth < 1) throw std::invalid_argument("danger horizon must be at least 1");

    std::vector<double> addends{static_cast<double>(unsafe_count_for(g, f, profile))};
    for (const auto& [id, dist] : g.forward_reach(f, depth)) {
        addends.push_back(static_cast<double>(unsafe_count_for(g, id, profile)) / dist);
    }

    /* Summing smallest-first makes the score depend only on the multiset of
     * addends, so functions with equal reachable mass tie bit-for-bit and
     * keep their relative order when the profile is rescaled. */
    std::sort(addends.begin(), addends.end());
    double score = 0.0;
    for (const double addend : addends) score += addend;
    return score;
}

double danger_lg(const CallGraph& g, const LogicGroup& lg, int depth,
                 const UnsafeProfile& profile) {
    if (lg.entries.empty()) {
        throw EmptyEntrySetError("logic group \"" + lg.name + "\" has no entries");
    }
    double best = 0.0;
    bool first = true;
    for (const auto& entry : lg.entries) {
        const double score = danger(g, entry, depth, profile);
        if (first || score > best) best = score;
        first = false;
    }
    return best;
}

namespace {

std::vector<RankedGroupScore> rank_groups(const CallGraph& g, const std::vector<LogicGroup>& lgs,
                                          int depth, const UnsafeProfile& profile) {
    std::vector<RankedGroupScore> rows;
    rows.reserve(lgs.size());
    for (const auto& lg : lgs) {
        rows.push_back({lg.name, danger_lg(g, lg, depth, profile), 0});
    }
    std::sort(rows.begin(), rows.end(), [](const RankedGroupScore& a, const RankedGroupScore& b) {
        return a.score != b.score ? a.score > b.score : a.name < b.name;
    });
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = static_cast<int>(i) + 1;
    return rows;
}

}  // namespace

DangerReport danger_report(const CallGraph& g, const std::vector<LogicGroup>& lgs, int depth,
                           const UnsafeProfile& profile) {
    DangerReport report;
    report.depth = depth;
    for (const auto& [id, node] : g.nodes()) {
        if (node.external) continue;
        report.functions.push_back({id, danger(g, id, depth, profile)});
    }
    std::sort(report.functions.begin(), report.functions.end(),
              [](const FunctionScore& a, const FunctionScore& b) {
                  return a.score != b.score ? a.score > b.score : a.id < b.id;
              });
    report.logic_groups = rank_groups(g, lgs, depth, profile);
    return report;
}

nlohmann::json to_json(const DangerReport& report) {
    nlohmann::json functions = nlohmann::json::array();
    for (const auto& f : report.functions) {
        functions.push_back({{"id", f.id}, {"score", f.score}});
    }
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& row : report.logic_groups) {
        groups.push_back({{"name", row.name}, {"score", row.score}, {"rank", row.rank}});
    }
    return nlohmann::json{
        {"depth", report.depth},
        {"functions", std::move(functions)},
        {"logic_groups", std::move(groups)},
    };
}

SweepResult sensitivity_sweep(const CallGraph& g, const std::vector<LogicGroup>& lgs,
                              const std::vector<int>& depths, const UnsafeProfile& profile,
                              int reference_depth) {
    if (std::find(depths.begin(), depths.end(), reference_depth) == depths.end()) {
        throw std::invalid_argument("reference depth must be one of the swept depths");
    }

    SweepResult sweep;
    sweep.reference_depth = reference_depth;

    std::vector<std::string> reference_order;
    for (const auto& row : rank_groups(g, lgs, reference_depth, profile)) {
        reference_order.push_back(row.name);
    }

    for (int depth : depths) {
        DepthRanking entry;
        entry.depth = depth;
        entry.ranking = rank_groups(g, lgs, depth, profile);
        std::vector<std::string> order;
        for (const auto& row : entry.ranking) order.push_back(row.name);
        entry.rho_vs_reference = spearman_rho(order, reference_order);
        sweep.depths.push_back(std::move(entry));
    }
    return sweep;
}

nlohmann::json to_json(const SweepResult& sweep) {
    nlohmann::json depths = nlohmann::json::array();
    for (const auto& entry : sweep.depths) {
        nlohmann::json ranking = nlohmann::json::array();
        for (const auto& row : entry.ranking) {
            ranking.push_back({{"name", row.name}, {"score", row.score}, {"rank", row.rank}});
        }
        depths.push_back({
            {"depth", entry.depth},
            {"ranking", std::move(ranking)},
            {"rho_vs_reference", entry.rho_vs_reference},
        });
    }
    return nlohmann::json{
        {"reference_depth", sweep.reference_depth},
        {"depths", std::move(depths)},
    };
}

}  // namespace hq
