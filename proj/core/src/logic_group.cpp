#include "hq/logic_group.hpp"

#include <algorithm>

#include "hq/danger.hpp"

namespace hq {

std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::EXISTING: return "existing";
    case Provenance::CANDIDATE: return "candidate";
    case Provenance::SELECTED: return "selected";
    }
    return "candidate";
}

std::string to_string(EntryMode m) {
    return m == EntryMode::PUBLIC ? "public" : "internal_fallback";
}

std::string to_string(P3Status s) {
    switch (s) {
    case P3Status::PASS: return "PASS";
    case P3Status::FALLBACK: return "FALLBACK";
    case P3Status::FAIL: return "FAIL";
    }
    return "FAIL";
}

nlohmann::json lg_to_json(const LogicGroup& lg, std::optional<double> score,
                          std::optional<int> rank) {
    nlohmann::json doc{
        {"name", lg.name},
        {"entries", lg.entries},
        {"core", std::vector<std::string>(lg.core.begin(), lg.core.end())},
        {"description", lg.description},
        {"entry_mode", to_string(lg.entry_mode)},
    };
    if (score) doc["score"] = *score;
    if (rank) doc["rank"] = *rank;
    return doc;
}

LogicGroup lg_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("logic group must be a JSON object");
    LogicGroup lg;

    auto name = doc.find("name");
    if (name == doc.end() || !name->is_string()) {
        throw SchemaError("logic group needs a string \"name\"");
    }
    lg.name = name->get<std::string>();

    auto read_list = [&](const char* key, bool required) {
        std::vector<std::string> out;
        auto it = doc.find(key);
        if (it == doc.end()) {
            if (required) {
                throw SchemaError("logic group \"" + lg.name + "\" needs \"" + key + "\"");
            }
            return out;
        }
        if (!it->is_array()) {
            throw SchemaError("logic group field \"" + std::string(key) + "\" must be an array");
        }
        for (const auto& item : *it) {
            if (!item.is_string()) {
                throw SchemaError("logic group field \"" + std::string(key) +
                                  "\" must hold strings");
            }
            out.push_back(item.get<std::string>());
        }
        return out;
    };

    lg.entries = read_list("entries", false);
    auto core = read_list("core", true);
    lg.core.insert(core.begin(), core.end());
    if (lg.core.empty()) {
        throw SchemaError("logic group \"" + lg.name + "\" has an empty core");
    }

    if (auto it = doc.find("description"); it != doc.end() && it->is_string()) {
        lg.description = it->get<std::string>();
    }
    if (auto it = doc.find("entry_mode"); it != doc.end() && it->is_string()) {
        lg.entry_mode = it->get<std::string>() == "internal_fallback"
                            ? EntryMode::INTERNAL_FALLBACK
                            : EntryMode::PUBLIC;
    }
    return lg;
}

nlohmann::json to_json(const EntryVerdict& v) {
    return nlohmann::json{
        {"p3", to_string(v.p3)},
        {"p4", v.p4_pass ? "PASS" : "FAIL"},
        {"chosen_entry", v.chosen_entry},
        {"distance_to_core", v.distance_to_core},
    };
}

std::string LgJudge::choose_fallback_entry(const CallGraph&,
                                           const std::vector<FallbackCandidate>& candidates) const {
    return candidates.front().id;
}

bool LgJudge::is_semantic_duplicate(const LogicGroup&, const LogicGroup&) const { return false; }

const LgJudge& default_lg_judge() {
    static const LgJudge judge;
    return judge;
}

EntryVerdict select_entry(const CallGraph& g, const std::set<std::string>& core, int depth,
                          const UnsafeProfile& profile, const LgJudge* judge) {
    if (core.empty()) throw EmptyEntrySetError("entry selection over an empty core");
    if (!judge) judge = &default_lg_judge();

    /* Minimum distance from each ancestor to any core member, public or not.
     * A core member can appear here as an ancestor of another member; only
     * its own reach excludes it. */
    std::map<std::string, ReverseReachEntry> ancestors;
    for (const auto& member : core) {
        for (const auto& [id, info] : g.reverse_reach(member, depth)) {
            auto [it, inserted] = ancestors.emplace(id, info);
            if (!inserted && info.distance < it->second.distance) {
                it->second.distance = info.distance;
            }
        }
    }

    EntryVerdict verdict;

    std::vector<FallbackCandidate> public_entries;
    std::vector<FallbackCandidate> fallback_candidates;
    for (const auto& [id, info] : ancestors) {
        FallbackCandidate c{id, info.distance, info.visibility};
        if (info.visibility == Visibility::PUBLIC) {
            public_entries.push_back(c);
        } else {
            fallback_candidates.push_back(c);
        }
    }

    auto by_distance_name = [&](const FallbackCandidate& a, const FallbackCandidate& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        const std::string& an = g.node(a.id).name;
        const std::string& bn = g.node(b.id).name;
        if (an != bn) return an < bn;
        return a.id < b.id;
    };

    if (!public_entries.empty()) {
        std::sort(public_entries.begin(), public_entries.end(), by_distance_name);
        verdict.p3 = P3Status::PASS;
        verdict.chosen_entry = public_entries.front().id;
        verdict.distance_to_core = public_entries.front().distance;
    } else if (!fallback_candidates.empty()) {
        std::sort(fallback_candidates.begin(), fallback_candidates.end(), by_distance_name);
        verdict.p3 = P3Status::FALLBACK;
        verdict.chosen_entry = judge->choose_fallback_entry(g, fallback_candidates);
        for (const auto& c : fallback_candidates) {
            if (c.id == verdict.chosen_entry) {
                verdict.distance_to_core = c.distance;
                break;
            }
        }
    } else {
        verdict.p3 = P3Status::FAIL;
        verdict.p4_pass = false;
        return verdict;
    }

    verdict.p4_pass = danger(g, verdict.chosen_entry, depth, profile) > 0.0;
    return verdict;
}

namespace {

std::pair<std::set<std::string>, std::set<std::string>> shape_of(const LogicGroup& lg) {
    return {{lg.entries.begin(), lg.entries.end()}, lg.core};
}

}  // namespace

std::vector<LogicGroup> dedup(const std::vector<LogicGroup>& candidates,
                              const std::vector<LogicGroup>& existing, const LgJudge* judge) {
    if (!judge) judge = &default_lg_judge();

    std::vector<LogicGroup> kept;
    kept.reserve(candidates.size());  // seen_groups points into kept
    std::vector<std::pair<std::set<std::string>, std::set<std::string>>> seen_shapes;
    std::vector<const LogicGroup*> seen_groups;
    for (const auto& lg : existing) {
        seen_shapes.push_back(shape_of(lg));
        seen_groups.push_back(&lg);
    }

    for (const auto& candidate : candidates) {
        const auto shape = shape_of(candidate);
        bool duplicate =
            std::find(seen_shapes.begin(), seen_shapes.end(), shape) != seen_shapes.end();
        if (!duplicate) {
            for (const LogicGroup* other : seen_groups) {
                if (judge->is_semantic_duplicate(candidate, *other)) {
                    duplicate = true;
                    break;
                }
            }
        }
        if (duplicate) continue;
        seen_shapes.push_back(shape);
        kept.push_back(candidate);
        seen_groups.push_back(&kept.back());
    }
    return kept;
}

std::vector<RankedLg> rank_and_select(const std::vector<LogicGroup>& lgs, const CallGraph& g,
                                      int depth, const UnsafeProfile& profile, int k,
                                      const LgJudge* judge) {
    std::vector<RankedLg> ranked;
    for (const auto& lg : lgs) {
        if (lg.entries.empty()) {
            throw EmptyEntrySetError("logic group \"" + lg.name + "\" has no entries");
        }
        RankedLg row;
        row.lg = lg;
        row.verdict = select_entry(g, lg.core, depth, profile, judge);
        if (!row.verdict.p4_pass) continue;  // inadequate entry, reported upstream
        row.score = danger_lg(g, lg, depth, profile);
        ranked.push_back(std::move(row));
    }

    std::sort(ranked.begin(), ranked.end(), [](const RankedLg& a, const RankedLg& b) {
        return a.score != b.score ? a.score > b.score : a.lg.name < b.lg.name;
    });
    if (k >= 0 && ranked.size() > static_cast<std::size_t>(k)) {
        ranked.resize(static_cast<std::size_t>(k));
    }
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        ranked[i].rank = static_cast<int>(i) + 1;
    }
    return ranked;
}

}  // namespace hq
