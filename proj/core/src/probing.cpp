#include "hq/probing.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace hq {

std::string to_string(ProbeKind k) { return k == ProbeKind::REACH ? "reach" : "run"; }

std::string to_string(ReachStatus s) {
    switch (s) {
    case ReachStatus::HIT: return "hit";
    case ReachStatus::MISS: return "miss";
    case ReachStatus::NOT_APPLICABLE: return "not_applicable";
    }
    return "not_applicable";
}

std::string to_string(TriageClass c) {
    switch (c) {
    case TriageClass::HARNESS_BUG: return "harness_bug";
    case TriageClass::REACH_MISS: return "reach_miss";
    case TriageClass::LIBRARY_BUG: return "library_bug";
    case TriageClass::PASS: return "pass";
    }
    return "pass";
}

std::string to_string(NextAction a) {
    switch (a) {
    case NextAction::FIX_LOOP: return "fix_loop";
    case NextAction::SUBMIT_UPSTREAM: return "submit_upstream";
    case NextAction::CONTINUE: return "continue";
    }
    return "continue";
}

NextAction next_action(TriageClass c) {
    switch (c) {
    case TriageClass::HARNESS_BUG: return NextAction::FIX_LOOP;
    case TriageClass::REACH_MISS: return NextAction::FIX_LOOP;
    case TriageClass::LIBRARY_BUG: return NextAction::SUBMIT_UPSTREAM;
    case TriageClass::PASS: return NextAction::CONTINUE;
    }
    return NextAction::CONTINUE;
}

void validate_spec(const ProbeSpec& spec) {
    const SubCheck& check = subcheck(spec.target);
    if (spec.kind == ProbeKind::REACH && check.oracle != Oracle::GDB) {
        throw SchemaError("REACH probe aimed at " + to_string(spec.target) +
                          ", whose oracle is not the debugger");
    }
    if (spec.kind == ProbeKind::RUN && check.oracle != Oracle::ASAN &&
        check.oracle != Oracle::LSAN) {
        throw SchemaError("RUN probe aimed at " + to_string(spec.target) +
                          ", whose oracle is not a sanitizer");
    }
}

std::string hex_encode(const std::vector<std::uint8_t>& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

std::vector<std::uint8_t> hex_decode(const std::string& hex) {
    if (hex.size() % 2 != 0) throw SchemaError("hex blob has odd length");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw SchemaError("hex blob has a non-hex character");
    };
    std::vector<std::uint8_t> bytes;
    bytes.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        bytes.push_back(static_cast<std::uint8_t>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
    }
    return bytes;
}

nlohmann::json to_json(const ProbeSpec& spec) {
    return nlohmann::json{
        {"subcheck", to_string(spec.target)},
        {"kind", to_string(spec.kind)},
        {"blob_hex", hex_encode(spec.blob)},
        {"rationale", spec.rationale},
    };
}

ProbeSpec probe_spec_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("probe spec must be a JSON object");
    ProbeSpec spec;

    auto id_field = doc.find("subcheck");
    if (id_field == doc.end() || !id_field->is_string()) {
        throw SchemaError("probe spec needs a string \"subcheck\"");
    }
    auto id = parse_subcheck(id_field->get<std::string>());
    if (!id) throw SchemaError("unknown sub-check \"" + id_field->get<std::string>() + "\"");
    spec.target = *id;

    auto kind = doc.find("kind");
    if (kind == doc.end() || !kind->is_string()) {
        throw SchemaError("probe spec needs a string \"kind\"");
    }
    const std::string kind_text = kind->get<std::string>();
    if (kind_text == "reach") {
        spec.kind = ProbeKind::REACH;
    } else if (kind_text == "run") {
        spec.kind = ProbeKind::RUN;
    } else {
        throw SchemaError("probe kind must be \"reach\" or \"run\"");
    }

    if (auto it = doc.find("blob_hex"); it != doc.end() && it->is_string()) {
        spec.blob = hex_decode(it->get<std::string>());
    } else if (auto text = doc.find("blob_text"); text != doc.end() && text->is_string()) {
        const std::string raw = text->get<std::string>();
        spec.blob.assign(raw.begin(), raw.end());
    }
    if (auto it = doc.find("rationale"); it != doc.end() && it->is_string()) {
        spec.rationale = it->get<std::string>();
    }
    validate_spec(spec);
    return spec;
}

nlohmann::json to_json(const ProbeOutcome& outcome) {
    nlohmann::json doc{
        {"spec", to_json(outcome.spec)},
        {"reach", to_string(outcome.reach)},
        {"called_functions", outcome.called_functions},
        {"crashed", outcome.crashed},
        {"exit_status", outcome.exit_status},
    };
    if (outcome.sanitizer_trace) {
        doc["sanitizer_trace"] = *outcome.sanitizer_trace;
    } else {
        doc["sanitizer_trace"] = nullptr;
    }
    return doc;
}

nlohmann::json to_json(const CoverageResult& coverage) {
    return nlohmann::json{
        {"line", coverage.line},
        {"branch", coverage.branch},
        {"edges", coverage.edges},
        {"entry_reached", coverage.entry_reached},
    };
}

CoverageResult coverage_from_json(const nlohmann::json& doc) {
    CoverageResult coverage;
    if (!doc.is_object()) throw SchemaError("coverage record must be a JSON object");
    if (auto it = doc.find("line"); it != doc.end() && it->is_number()) {
        coverage.line = it->get<double>();
    }
    if (auto it = doc.find("branch"); it != doc.end() && it->is_number()) {
        coverage.branch = it->get<double>();
    }
    if (auto it = doc.find("edges"); it != doc.end() && it->is_number()) {
        coverage.edges = it->get<double>();
    }
    if (auto it = doc.find("entry_reached"); it != doc.end() && it->is_boolean()) {
        coverage.entry_reached = it->get<bool>();
    }
    return coverage;
}

ProbeOutcome execute(const ProbeSpec& spec, Executor& executor) {
    validate_spec(spec);
    ProbeOutcome outcome;
    outcome.spec = spec;
    if (spec.kind == ProbeKind::REACH) {
        ReachResult r = executor.reach_check(spec);
        outcome.reach = r.hit ? ReachStatus::HIT : ReachStatus::MISS;
        outcome.called_functions = std::move(r.called);
        outcome.exit_status = r.exit_status;
    } else {
        RunResult r = executor.run_check(spec);
        outcome.reach = ReachStatus::NOT_APPLICABLE;
        outcome.crashed = r.crashed;
        if (!r.trace.empty()) outcome.sanitizer_trace = std::move(r.trace);
        outcome.exit_status = r.exit_status;
    }
    return outcome;
}

FrameCrashJudge::FrameCrashJudge(std::vector<std::string> harness_files, int frame_window)
    : files_(std::move(harness_files)), window_(frame_window) {}

bool FrameCrashJudge::attributes_to_harness(const ProbeOutcome& outcome) const {
    if (!outcome.sanitizer_trace) return false;
    const std::string& trace = *outcome.sanitizer_trace;

    int frames_seen = 0;
    std::size_t line_start = 0;
    while (line_start < trace.size() && frames_seen < window_) {
        std::size_t line_end = trace.find('\n', line_start);
        if (line_end == std::string::npos) line_end = trace.size();
        const std::string line = trace.substr(line_start, line_end - line_start);
        line_start = line_end + 1;

        std::size_t i = 0;
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i >= line.size() || line[i] != '#') continue;
        ++frames_seen;
        for (const auto& file : files_) {
            if (!file.empty() && line.find(file) != std::string::npos) return true;
        }
    }
    return false;
}

TriageClass triage(const ProbeOutcome& outcome, const CrashJudge& judge) {
    if (outcome.crashed) {
        return judge.attributes_to_harness(outcome) ? TriageClass::HARNESS_BUG
                                                    : TriageClass::LIBRARY_BUG;
    }
    if (outcome.reach == ReachStatus::MISS) return TriageClass::REACH_MISS;
    return TriageClass::PASS;
}

GateDecision submission_gate(double line, double branch, bool entry_reached, bool soft_ok) {
    if (line <= 0.0) return {false, "zero line coverage"};
    if (branch <= 0.0) return {false, "zero branch coverage"};
    if (!entry_reached) return {false, "entry point never reached"};
    if (!soft_ok) return {false, "soft check declined submission"};
    return {true, "all gate conditions met"};
}

nlohmann::json probe_log_entry(const ProbeOutcome& outcome, TriageClass triage_class) {
    return nlohmann::json{
        {"type", "probe"},
        {"spec", to_json(outcome.spec)},
        {"outcome", to_json(outcome)},
        {"triage", to_string(triage_class)},
        {"next_action", to_string(next_action(triage_class))},
    };
}

CycleResult run_gate_cycle(const std::vector<ProbeSpec>& specs, Executor& executor,
                           const CrashJudge& judge, int budget_seconds) {
    CycleResult cycle;
    cycle.all_passed = true;
    for (const auto& spec : specs) {
        ProbeOutcome outcome = execute(spec, executor);
        TriageClass verdict = triage(outcome, judge);
        if (verdict != TriageClass::PASS) cycle.all_passed = false;
        cycle.outcomes.push_back(std::move(outcome));
        cycle.triages.push_back(verdict);
    }
    if (cycle.all_passed) {
        cycle.fuzz = executor.timed_fuzz(budget_seconds);
        cycle.coverage = executor.coverage();
    }
    return cycle;
}

namespace {

std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = tmpl.find(key, pos)) != std::string::npos) {
        tmpl.replace(pos, key.size(), value);
        pos += value.size();
    }
    return tmpl;
}

}  // namespace

CommandExecutor::CommandExecutor(ExecutorCommands commands) : commands_(std::move(commands)) {}

nlohmann::json CommandExecutor::run_template(const std::string& tmpl, const ProbeSpec* spec,
                                             int timeout_s, int* exit_status) {
    if (tmpl.empty()) throw ExecutorUnavailableError("no command template configured");

    namespace fs = std::filesystem;
    fs::path blob_file;
    if (spec) {
        blob_file = fs::temp_directory_path() /
                    ("hq_blob_" + std::to_string(::getpid()) + "_" +
                     std::to_string(reinterpret_cast<std::uintptr_t>(spec) & 0xffff) + ".bin");
        std::ofstream out(blob_file, std::ios::binary);
        out.write(reinterpret_cast<const char*>(spec->blob.data()),
                  static_cast<std::streamsize>(spec->blob.size()));
    }

    std::string cmd = tmpl;
    cmd = substitute(cmd, "{binary}", bound_binary());
    cmd = substitute(cmd, "{blob_file}", blob_file.string());
    cmd = substitute(cmd, "{breakpoint_symbol}", commands_.breakpoint_symbol);
    cmd = substitute(cmd, "{timeout}", std::to_string(timeout_s));

    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) {
        if (spec) fs::remove(blob_file);
        throw ExecutorUnavailableError("failed to spawn executor command: " + cmd);
    }
    std::string output;
    char buffer[4096];
    std::size_t n;
    while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) {
        output.append(buffer, n);
    }
    const int status = ::pclose(pipe);
    if (spec) fs::remove(blob_file);
    *exit_status = status >= 0 && WIFEXITED(status) ? WEXITSTATUS(status) : status;

    nlohmann::json doc = nlohmann::json::parse(output, nullptr, false);
    if (doc.is_discarded()) {
        throw ExecutorUnavailableError("executor command produced no parseable result: " + cmd);
    }
    if (doc.value("timeout", false)) *exit_status = kTimeoutExitStatus;
    return doc;
}

ReachResult CommandExecutor::reach_check(const ProbeSpec& spec) {
    ReachResult result;
    nlohmann::json doc = run_template(commands_.reach_cmd, &spec, commands_.timeout_s,
                                      &result.exit_status);
    result.hit = doc.value("hit", false);
    if (auto it = doc.find("called"); it != doc.end() && it->is_array()) {
        for (const auto& item : *it) {
            if (item.is_string()) result.called.push_back(item.get<std::string>());
        }
    }
    return result;
}

RunResult CommandExecutor::run_check(const ProbeSpec& spec) {
    RunResult result;
    nlohmann::json doc = run_template(commands_.run_cmd, &spec, commands_.timeout_s,
                                      &result.exit_status);
    result.crashed = doc.value("crashed", false);
    result.trace = doc.value("trace", std::string());
    return result;
}

FuzzResult CommandExecutor::timed_fuzz(int budget_seconds) {
    FuzzResult result;
    nlohmann::json doc = run_template(commands_.run_cmd, nullptr, budget_seconds,
                                      &result.exit_status);
    result.crashed = doc.value("crashed", false);
    result.trace = doc.value("trace", std::string());
    return result;
}

CoverageResult CommandExecutor::coverage() {
    int ignored = 0;
    nlohmann::json doc = run_template(commands_.coverage_cmd, nullptr, commands_.timeout_s,
                                      &ignored);
    return coverage_from_json(doc);
}

}  // namespace hq
