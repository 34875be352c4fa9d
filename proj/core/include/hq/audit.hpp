#ifndef HQ_AUDIT_HPP
#define HQ_AUDIT_HPP

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hq/agent.hpp"
#include "hq/pipeline.hpp"
#include "hq/probing.hpp"
#include "hq/subchecks.hpp"

namespace hq {

/* Audit mode re-validates a harness that already exists: no group
 * discovery, no danger ranking, no entry selection.  Probes target the
 * live-oracle rows only; whether the harness is structurally sound was
 * someone else's decision long ago. */
struct AuditConfig {
    std::string harness_source;
    std::string binary;
    int budget_s = 60;
    int repair_cap = 5;
    std::string metric = "edges";   // line, branch, or edges
    std::string context = "audit";  // keys the model and builder replay scripts
};

struct AuditViolation {
    SubCheckId subcheck = SubCheckId::P1_1;
    std::string evidence;
    bool confirmed = false;         // a repair fixed it without losing coverage
    bool self_declared_fp = false;  // every repair attempt failed
};

struct AuditRecord {
    bool clean = false;
    CoverageResult original;
    std::vector<AuditViolation> violations;
    std::vector<nlohmann::json> unmasked_bugs;  // library crashes surfaced along the way
    std::vector<nlohmann::json> probe_log;
    std::vector<BuildAttempt> repair_attempts;
    int repairs_used = 0;
    std::string final_source;     // the repaired harness when confirmed
    std::string research_notes;   // the model's protocol recap, logged but never a report
};

nlohmann::json to_json(const AuditRecord& record);

/* Runs the original harness for a baseline, probes it, and when a probe
 * shows a harness-side fault tries up to repair_cap rewrites.  A repair
 * counts only if the probes come back green and coverage on the configured
 * metric does not regress; if no rewrite manages that, the finding is
 * recorded as the model declaring its own probe a false alarm. */
AuditRecord audit_harness(const AuditConfig& config, ModelBackend& model, Builder& builder,
                          Executor& executor, const CrashJudge& judge);

}  // namespace hq

#endif
