#ifndef HQ_PIPELINE_HPP
#define HQ_PIPELINE_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hq/agent.hpp"
#include "hq/callgraph.hpp"
#include "hq/danger.hpp"
#include "hq/logic_group.hpp"
#include "hq/probing.hpp"
#include "hq/protocol_report.hpp"
#include "hq/subchecks.hpp"

namespace hq {

/* 64-bit FNV-1a as lowercase hex; used to fingerprint harness sources and
 * to content-address result files. */
std::string content_hash(const std::string& text);

struct BuildResult {
    bool success = false;
    std::string compiler_tail;
    std::string binary;
};

class Builder {
public:
    virtual ~Builder() = default;

    /* Names the work item (usually the logic group) so implementations can
     * key artifacts or replay data per item. */
    virtual void bind_context(const std::string&) {}

    virtual BuildResult build(const std::string& source) = 0;
};

enum class BuildOutcome { SUCCESS, COMPILE_ERROR };

struct BuildAttempt {
    int attempt = 0;  // 1-based
    std::string source_hash;
    BuildOutcome result = BuildOutcome::COMPILE_ERROR;
    std::string compiler_tail;
    std::string binary;
};

nlohmann::json to_json(const BuildAttempt& attempt);

/* Bounded build accounting.  Both the mechanical loop and the generator
 * agent's build tool feed the same state, so the cap spans stages: repair
 * rebuilds draw from whatever the first compile left over. */
class BuildState {
public:
    explicit BuildState(int cap) : cap_(cap) {}

    const std::vector<BuildAttempt>& attempts() const { return attempts_; }
    const std::vector<std::string>& stall_warnings() const { return stalls_; }
    int cap() const { return cap_; }
    bool exhausted() const { return static_cast<int>(attempts_.size()) >= cap_; }

    /* Runs one build.  Raises BuildCapExhaustedError once the cap is spent;
     * an identical source hash to the previous attempt is recorded as a
     * stall warning but still consumes an attempt. */
    const BuildAttempt& attempt(Builder& builder, const std::string& source);

    const BuildAttempt* last_success() const;

private:
    int cap_;
    std::vector<BuildAttempt> attempts_;
    std::vector<std::string> stalls_;
};

struct BuildLoopResult {
    std::vector<BuildAttempt> attempts;
    std::string source;
    std::string binary;
};

/* Compile-fix loop: build, and on failure hand the compiler tail to the
 * revise hook for the next source, until success or the cap is spent. */
BuildLoopResult stage3_build_loop(const std::string& initial_source,
                                  const std::function<std::string(const BuildAttempt&)>& revise,
                                  Builder& builder, BuildState& state);

struct Stage1Settings {
    int depth = 20;
    int top_k = 5;
    UnsafeProfile profile;
    std::vector<LogicGroup> existing;

    /* Core refinement hook; the default drops members with no in-graph
     * definition.  Receives resolved candidate ids. */
    std::function<std::set<std::string>(const CallGraph&, const std::set<std::string>&)>
        refine_core;
};

struct RejectedCandidate {
    LogicGroup lg;
    EntryVerdict verdict;
};

struct Stage1Result {
    std::vector<RankedLg> selected;
    std::vector<RejectedCandidate> rejected;   // no entry reaches the core
    std::vector<std::string> invalid;          // dropped at intake
    std::vector<ToolLogEntry> agent_log;
    int turns_used = 0;
};

/* Group discovery: runs the discovery agent, validates its candidates
 * against the graph, picks entries, drops duplicates, and keeps the top-k
 * by danger.  A submission with no usable candidate at all is an error. */
Stage1Result stage1(const CallGraph& g, ModelBackend& model, const ToolRegistry& tools,
                    const Stage1Settings& settings, const nlohmann::json& task);

/* Protocol research for one group: the research agent submits the
 * eight-section report, which is then parsed and its evidence checked
 * against the real tree. */
ProtocolReport stage2(ModelBackend& model, const ToolRegistry& tools,
                      const std::string& project_root, const nlohmann::json& task,
                      const std::string& context);

struct GeneratorResult {
    std::vector<BuildAttempt> attempts;
    std::vector<std::string> stall_warnings;
    std::vector<nlohmann::json> probe_log;
    std::vector<nlohmann::json> library_bugs;
    GateDecision gate;
    CoverageResult coverage;
    std::string final_source;
    std::string final_binary;
    std::vector<Verdict> probe_verdicts;  // latest verdict per probed sub-check
    int turns_used = 0;
};

/* Harness generation and validation as one agent session.  The agent gets
 * build, probe, coverage, and submit tools on top of the read-only ones;
 * the hard ordering is enforced here: probing needs a built binary, the
 * timed run needs every outstanding probe to pass, submission needs the
 * gate.  The submit handler also re-runs the caller's static checks so a
 * gate accept can never coexist with a failing report. */
GeneratorResult run_generator(
    ModelBackend& model, ToolRegistry tools, Builder& builder, Executor& executor,
    const CrashJudge& judge, BuildState& build_state, int budget_seconds,
    const nlohmann::json& task, const std::string& context,
    const std::function<std::vector<Verdict>(const std::string& source)>& static_checks);

struct PipelineConfig {
    std::string project_name;
    std::string project_root;
    int depth = 20;
    int top_k = 5;
    int build_cap = 5;
    int stage4_budget_s = 600;
    int audit_budget_s = 60;
    std::string audit_metric = "edges";
    UnsafeProfile profile;
    std::vector<LogicGroup> existing;
};

struct RunRecord {
    std::string project;
    LogicGroup lg;
    double score = 0.0;
    int rank = 0;
    EntryVerdict entry_verdict;
    ProtocolReport protocol;
    std::vector<BuildAttempt> attempts;
    std::vector<std::string> stall_warnings;
    std::vector<nlohmann::json> probe_log;
    std::vector<nlohmann::json> library_bugs;
    GateDecision gate;
    CoverageResult coverage;
    std::string final_source;
    std::string final_binary;
    PrincipleReport principles;
    bool completed = false;
    std::string failure;  // set when the run ended without a submission
};

nlohmann::json to_json(const RunRecord& record);

/* Serializes the record to <out_dir>/record_<project>_<group>_<hash>.json,
 * where the hash is taken over the content itself.  Returns the path. */
std::string write_run_record(const RunRecord& record, const std::string& out_dir);

/* Builds the full 21-row principle report for a finished harness: probed
 * rows from the generator, the three static rows from the graph, judge
 * rows where a judge exists, UNKNOWN elsewhere.  A fallback entry shifts
 * the boundary question from the structural row to its judge row. */
PrincipleReport assemble_principles(const CallGraph& g, const std::string& harness_source,
                                    const LogicGroup& lg, const EntryVerdict& entry_verdict,
                                    int depth, const UnsafeProfile& profile,
                                    const std::vector<Verdict>& probe_verdicts,
                                    const SubCheckJudge* judge = nullptr);

/* Research, build, and validation for one selected group. Build or turn cap
 * exhaustion is reported in the record rather than thrown. */
RunRecord run_lg_pipeline(const PipelineConfig& config, const CallGraph& g, const RankedLg& item,
                          ModelBackend& model, Builder& builder, Executor& executor,
                          const CrashJudge& judge, const SubCheckJudge* subcheck_judge = nullptr);

using BuilderFactory = std::function<std::unique_ptr<Builder>()>;
using ExecutorFactory = std::function<std::unique_ptr<Executor>()>;

struct ProjectRunResult {
    Stage1Result discovery;
    std::vector<RunRecord> records;  // ordered by group name
};

/* Whole-project run: discovery once, then one pipeline per selected group,
 * fanned out over a small worker pool.  Workers share nothing but the model
 * backend and the results sink; records come back sorted by group name so
 * output is stable however the scheduler interleaved them. */
ProjectRunResult run_project_pipeline(const PipelineConfig& config, const CallGraph& g,
                                      ModelBackend& model, const BuilderFactory& make_builder,
                                      const ExecutorFactory& make_executor,
                                      const CrashJudge& judge, int workers,
                                      const SubCheckJudge* subcheck_judge = nullptr);

/* Shells out to a user-supplied compile command.  {source_file} and
 * {binary} are substituted; a zero exit is success and the captured output
 * tail travels back to the model on failure. */
class CommandBuilder : public Builder {
public:
    CommandBuilder(std::string build_cmd, std::string out_dir);

    void bind_context(const std::string& key) override { context_ = key; }
    BuildResult build(const std::string& source) override;

private:
    std::string build_cmd_;
    std::string out_dir_;
    std::string context_;
    int counter_ = 0;
};

}  // namespace hq

#endif
