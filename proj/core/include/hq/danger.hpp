#ifndef HQ_DANGER_HPP
#define HQ_DANGER_HPP

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hq/callgraph.hpp"
#include "hq/logic_group.hpp"
#include "hq/unsafe.hpp"

namespace hq {

/* Node unsafe_count wins, then the profile's per-function map, then zero. */
int unsafe_count_for(const CallGraph& g, const std::string& id, const UnsafeProfile& profile);

/* Distance-discounted unsafe mass reachable from f:
 *
 *     danger(f) = unsafe(f) + sum over g reachable within depth of
 *                 unsafe(g) / dist(f, g)
 *
 * The function's own operations count at full weight.  Terms are added in
 * ascending (distance, id) order so repeated runs sum identically. */
double danger(const CallGraph& g, const std::string& f, int depth, const UnsafeProfile& profile);

/* A group is as dangerous as its most dangerous entry. */
double danger_lg(const CallGraph& g, const LogicGroup& lg, int depth,
                 const UnsafeProfile& profile);

struct FunctionScore {
    std::string id;
    double score = 0.0;
};

struct RankedGroupScore {
    std::string name;
    double score = 0.0;
    int rank = 0;
};

struct DangerReport {
    int depth = 0;
    std::vector<FunctionScore> functions;       // descending score, ascending id
    std::vector<RankedGroupScore> logic_groups; // descending score, ascending name
};

DangerReport danger_report(const CallGraph& g, const std::vector<LogicGroup>& lgs, int depth,
                           const UnsafeProfile& profile);

nlohmann::json to_json(const DangerReport& report);

struct DepthRanking {
    int depth = 0;
    std::vector<RankedGroupScore> ranking;
    double rho_vs_reference = 1.0;
};

struct SweepResult {
    int reference_depth = 0;
    std::vector<DepthRanking> depths;
};

/* Re-ranks the groups at each horizon and reports how far each ranking
 * drifts from the reference horizon's ranking (Spearman rho over the rank
 * orders).  The reference depth must be one of the swept depths. */
SweepResult sensitivity_sweep(const CallGraph& g, const std::vector<LogicGroup>& lgs,
                              const std::vector<int>& depths, const UnsafeProfile& profile,
                              int reference_depth = 20);

nlohmann::json to_json(const SweepResult& sweep);

}  // namespace hq

#endif
