#ifndef HQ_LOGIC_GROUP_HPP
#define HQ_LOGIC_GROUP_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hq/callgraph.hpp"
#include "hq/unsafe.hpp"

namespace hq {

enum class Provenance { EXISTING, CANDIDATE, SELECTED };
enum class EntryMode { PUBLIC, INTERNAL_FALLBACK };

std::string to_string(Provenance p);
std::string to_string(EntryMode m);

/* A coherent piece of library behaviour worth its own harness: the core
 * functions that implement it plus the entry points a harness may drive it
 * through.  Entries stay ordered so serialization is stable. */
struct LogicGroup {
    std::string name;
    std::vector<std::string> entries;
    std::set<std::string> core;
    std::string description;
    Provenance provenance = Provenance::CANDIDATE;
    EntryMode entry_mode = EntryMode::PUBLIC;
};

nlohmann::json lg_to_json(const LogicGroup& lg,
                          std::optional<double> score = std::nullopt,
                          std::optional<int> rank = std::nullopt);
LogicGroup lg_from_json(const nlohmann::json& doc);

enum class P3Status { PASS, FALLBACK, FAIL };

std::string to_string(P3Status s);

/* Outcome of entry selection for one core set.  p4_pass holds exactly when
 * the chosen entry reaches a core member within depth and its danger score
 * is positive; with p3 == FAIL there is no entry and p4_pass is false. */
struct EntryVerdict {
    P3Status p3 = P3Status::FAIL;
    bool p4_pass = false;
    std::string chosen_entry;
    int distance_to_core = 0;
};

nlohmann::json to_json(const EntryVerdict& v);

struct FallbackCandidate {
    std::string id;
    int distance = 0;
    Visibility visibility = Visibility::UNKNOWN;
};

/* Semantic decisions the mechanics cannot make alone.  The defaults are
 * deliberately mechanical: nearest fallback candidate, no semantic
 * duplicates beyond set equality. */
class LgJudge {
public:
    virtual ~LgJudge() = default;

    /* Candidates arrive sorted by (distance, name, id) and non-empty. */
    virtual std::string choose_fallback_entry(
        const CallGraph& g, const std::vector<FallbackCandidate>& candidates) const;

    virtual bool is_semantic_duplicate(const LogicGroup& a, const LogicGroup& b) const;
};

const LgJudge& default_lg_judge();

/* Picks the harness entry for a core set: the nearest public ancestor when
 * one exists, otherwise a judge-chosen internal ancestor, otherwise FAIL. */
EntryVerdict select_entry(const CallGraph& g, const std::set<std::string>& core, int depth,
                          const UnsafeProfile& profile, const LgJudge* judge = nullptr);

/* Drops candidates whose (entries, core) sets match an existing group or an
 * earlier candidate, then lets the judge drop semantic duplicates. Keeps
 * first occurrences, preserves order, never mutates survivors. */
std::vector<LogicGroup> dedup(const std::vector<LogicGroup>& candidates,
                              const std::vector<LogicGroup>& existing,
                              const LgJudge* judge = nullptr);

struct RankedLg {
    LogicGroup lg;
    double score = 0.0;
    int rank = 0;
    EntryVerdict verdict;
};

/* Scores each group (max entry danger), removes groups whose entry verdict
 * fails P4, orders by descending score with ascending-name tie-break, and
 * keeps the top k. */
std::vector<RankedLg> rank_and_select(const std::vector<LogicGroup>& lgs, const CallGraph& g,
                                      int depth, const UnsafeProfile& profile, int k,
                                      const LgJudge* judge = nullptr);

}  // namespace hq

#endif
