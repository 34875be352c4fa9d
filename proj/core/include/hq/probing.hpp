#ifndef HQ_PROBING_HPP
#define HQ_PROBING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hq/subchecks.hpp"

namespace hq {

enum class ProbeKind { REACH, RUN };

std::string to_string(ProbeKind k);

/* One adversarial input aimed at one sub-check.  REACH probes watch a
 * breakpoint under a debugger; RUN probes execute under sanitizers. */
struct ProbeSpec {
    SubCheckId target = SubCheckId::P1_1;
    ProbeKind kind = ProbeKind::RUN;
    std::vector<std::uint8_t> blob;
    std::string rationale;
};

/* REACH is only valid against debugger-oracle rows, RUN only against
 * sanitizer-oracle rows.  Anything else is a malformed spec. */
void validate_spec(const ProbeSpec& spec);

nlohmann::json to_json(const ProbeSpec& spec);
ProbeSpec probe_spec_from_json(const nlohmann::json& doc);

std::string hex_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> hex_decode(const std::string& hex);

enum class ReachStatus { HIT, MISS, NOT_APPLICABLE };

std::string to_string(ReachStatus s);

/* Exit status recorded when the probe ran out of wall clock.  Timeouts are
 * data, not errors; they surface here rather than as exceptions. */
constexpr int kTimeoutExitStatus = 124;

struct ProbeOutcome {
    ProbeSpec spec;
    ReachStatus reach = ReachStatus::NOT_APPLICABLE;
    std::vector<std::string> called_functions;  // REACH probes only
    bool crashed = false;
    std::optional<std::string> sanitizer_trace;  // recorded verbatim, never invented
    int exit_status = 0;
};

nlohmann::json to_json(const ProbeOutcome& outcome);

enum class TriageClass { HARNESS_BUG, REACH_MISS, LIBRARY_BUG, PASS };
enum class NextAction { FIX_LOOP, SUBMIT_UPSTREAM, CONTINUE };

std::string to_string(TriageClass c);
std::string to_string(NextAction a);

/* Harness-side failures loop back to the generator; library-side crashes
 * leave the pipeline as upstream reports; clean probes continue. */
NextAction next_action(TriageClass c);

struct ReachResult {
    bool hit = false;
    std::vector<std::string> called;
    int exit_status = 0;
};

struct RunResult {
    bool crashed = false;
    std::string trace;
    int exit_status = 0;
};

struct FuzzResult {
    bool crashed = false;
    std::string trace;
    int exit_status = 0;
};

struct CoverageResult {
    double line = 0.0;
    double branch = 0.0;
    double edges = 0.0;
    bool entry_reached = false;
};

nlohmann::json to_json(const CoverageResult& coverage);
CoverageResult coverage_from_json(const nlohmann::json& doc);

/* Runs probes against one bound harness binary.  Implementations either
 * shell out to real tooling or replay canned outcomes for tests. */
class Executor {
public:
    virtual ~Executor() = default;

    virtual void bind_binary(const std::string& path) { binary_ = path; }
    const std::string& bound_binary() const { return binary_; }

    virtual ReachResult reach_check(const ProbeSpec& spec) = 0;
    virtual RunResult run_check(const ProbeSpec& spec) = 0;
    virtual FuzzResult timed_fuzz(int budget_seconds) = 0;
    virtual CoverageResult coverage() = 0;

protected:
    std::string binary_;
};

/* Dispatches a validated spec to the right executor hook and packages the
 * verbatim result. */
ProbeOutcome execute(const ProbeSpec& spec, Executor& executor);

/* Decides whether a crash belongs to the harness or the library, and has
 * the final soft say before submission. */
class CrashJudge {
public:
    virtual ~CrashJudge() = default;
    virtual bool attributes_to_harness(const ProbeOutcome& outcome) const = 0;
    virtual bool soft_submit_ok(const nlohmann::json&) const { return true; }
};

/* Default attribution rule: the crash is the harness's fault when any of
 * the top frames of the trace lands in a registered harness source file.
 * Files match as substrings of the frame line, so either a basename or a
 * longer path suffix works. */
class FrameCrashJudge : public CrashJudge {
public:
    explicit FrameCrashJudge(std::vector<std::string> harness_files, int frame_window = 3);
    bool attributes_to_harness(const ProbeOutcome& outcome) const override;

private:
    std::vector<std::string> files_;
    int window_;
};

TriageClass triage(const ProbeOutcome& outcome, const CrashJudge& judge);

struct GateDecision {
    bool accepted = false;
    std::string reason;
};

/* Hard submission bar: nonzero line coverage, nonzero branch coverage, the
 * entry point actually reached, and the soft check not objecting.  Checked
 * in that order; the reason names the first condition that failed. */
GateDecision submission_gate(double line, double branch, bool entry_reached, bool soft_ok);

struct CycleResult {
    std::vector<ProbeOutcome> outcomes;
    std::vector<TriageClass> triages;
    bool all_passed = false;
    std::optional<FuzzResult> fuzz;          // present only when every triage passed
    std::optional<CoverageResult> coverage;  // likewise
};

nlohmann::json probe_log_entry(const ProbeOutcome& outcome, TriageClass triage_class);

/* One validation cycle: run every probe, triage every outcome, and only if
 * nothing failed spend the timed fuzz budget and collect coverage.  Zero
 * probes is a legal cycle that goes straight to the timed run. */
CycleResult run_gate_cycle(const std::vector<ProbeSpec>& specs, Executor& executor,
                           const CrashJudge& judge, int budget_seconds);

/* Shells out through user-supplied command templates.  Placeholders
 * {binary}, {blob_file}, {breakpoint_symbol}, and {timeout} are substituted
 * before the command runs; the command prints a single JSON object on
 * stdout describing the result. */
struct ExecutorCommands {
    std::string reach_cmd;
    std::string run_cmd;
    std::string coverage_cmd;
    std::string breakpoint_symbol;
    int timeout_s = 600;
};

class CommandExecutor : public Executor {
public:
    explicit CommandExecutor(ExecutorCommands commands);

    ReachResult reach_check(const ProbeSpec& spec) override;
    RunResult run_check(const ProbeSpec& spec) override;
    FuzzResult timed_fuzz(int budget_seconds) override;
    CoverageResult coverage() override;

private:
    nlohmann::json run_template(const std::string& tmpl, const ProbeSpec* spec,
                                int timeout_s, int* exit_status);

    ExecutorCommands commands_;
};

}  // namespace hq

#endif
