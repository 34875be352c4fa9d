#include "hq/pipeline.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "hq/errors.hpp"

namespace hq {

namespace fs = std::filesystem;

std::string content_hash(const std::string& text) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[hash & 0xf];
        hash >>= 4;
    }
    return out;
}

nlohmann::json to_json(const BuildAttempt& attempt) {
    return nlohmann::json{
        {"attempt", attempt.attempt},
        {"source_hash", attempt.source_hash},
        {"result", attempt.result == BuildOutcome::SUCCESS ? "success" : "compile_error"},
        {"compiler_tail", attempt.compiler_tail},
        {"binary", attempt.binary},
    };
}

const BuildAttempt& BuildState::attempt(Builder& builder, const std::string& source) {
    if (exhausted()) {
        throw BuildCapExhaustedError("build cap of " + std::to_string(cap_) +
                                     " attempts is spent");
    }
    const std::string hash = content_hash(source);
    if (!attempts_.empty() && attempts_.back().source_hash == hash) {
        stalls_.push_back("attempt " + std::to_string(attempts_.size() + 1) +
                          " resubmitted identical source (" + hash + ")");
    }
    BuildResult result = builder.build(source);
    BuildAttempt record;
    record.attempt = static_cast<int>(attempts_.size()) + 1;
    record.source_hash = hash;
    record.result = result.success ? BuildOutcome::SUCCESS : BuildOutcome::COMPILE_ERROR;
    record.compiler_tail = result.compiler_tail;
    record.binary = result.success ? result.binary : "";
    attempts_.push_back(std::move(record));
    return attempts_.back();
}

const BuildAttempt* BuildState::last_success() const {
    for (auto it = attempts_.rbegin(); it != attempts_.rend(); ++it) {
        if (it->result == BuildOutcome::SUCCESS) return &*it;
    }
    return nullptr;
}

BuildLoopResult stage3_build_loop(const std::string& initial_source,
                                  const std::function<std::string(const BuildAttempt&)>& revise,
                                  Builder& builder, BuildState& state) {
    std::string source = initial_source;
    while (true) {
        const BuildAttempt& attempt = state.attempt(builder, source);
        if (attempt.result == BuildOutcome::SUCCESS) {
            return {state.attempts(), source, attempt.binary};
        }
        source = revise(attempt);
    }
}

namespace {

/* Default core refinement: drop members whose definition is outside the
 * graph; a harness cannot target code nobody indexed. */
std::set<std::string> drop_external_members(const CallGraph& g, const std::set<std::string>& core) {
    std::set<std::string> kept;
    for (const auto& id : core) {
        if (!g.node(id).external) kept.insert(id);
    }
    return kept;
}

}  // namespace

Stage1Result stage1(const CallGraph& g, ModelBackend& model, const ToolRegistry& tools,
                    const Stage1Settings& settings, const nlohmann::json& task) {
    AgentRunResult run =
        run_agent(default_agent_config(AgentName::LOGIC_GROUP), model, tools, task, "discovery");

    Stage1Result result;
    result.agent_log = run.log;
    result.turns_used = run.turns_used;

    std::vector<LogicGroup> valid;
    const nlohmann::json candidates = run.payload.value("candidates", nlohmann::json::array());
    for (const auto& doc : candidates) {
        if (!doc.is_object() || !doc.contains("name") || !doc["name"].is_string()) {
            result.invalid.push_back("<unnamed>: candidate is not an object with a name");
            continue;
        }
        const std::string name = doc["name"].get<std::string>();

        std::set<std::string> core;
        for (const auto& member : doc.value("core", nlohmann::json::array())) {
            if (!member.is_string()) continue;
            for (const auto& id : g.resolve_symbol(member.get<std::string>())) {
                core.insert(id);
            }
        }
        core = settings.refine_core ? settings.refine_core(g, core)
                                    : drop_external_members(g, core);
        if (core.empty()) {
            result.invalid.push_back(name + ": no core member resolves to a defined function");
            continue;
        }

        LogicGroup lg;
        lg.name = name;
        lg.core = std::move(core);
        lg.description = doc.value("description", "");
        lg.provenance = Provenance::CANDIDATE;

        EntryVerdict verdict = select_entry(g, lg.core, settings.depth, settings.profile);
        if (verdict.p3 == P3Status::FAIL) {
            result.rejected.push_back({std::move(lg), verdict});
            continue;
        }
        lg.entries = {verdict.chosen_entry};
        lg.entry_mode =
            verdict.p3 == P3Status::PASS ? EntryMode::PUBLIC : EntryMode::INTERNAL_FALLBACK;
        valid.push_back(std::move(lg));
    }

    if (valid.empty()) {
        throw NoViableCandidatesError("discovery produced no usable logic group candidate");
    }

    std::vector<LogicGroup> survivors = dedup(valid, settings.existing);
    result.selected =
        rank_and_select(survivors, g, settings.depth, settings.profile, settings.top_k);
    for (auto& item : result.selected) {
        item.lg.provenance = Provenance::SELECTED;
    }
    return result;
}

ProtocolReport stage2(ModelBackend& model, const ToolRegistry& tools,
                      const std::string& project_root, const nlohmann::json& task,
                      const std::string& context) {
    AgentRunResult run =
        run_agent(default_agent_config(AgentName::API_RESEARCH), model, tools, task, context);
    const nlohmann::json& payload =
        run.payload.contains("report") ? run.payload["report"] : run.payload;
    ProtocolReport report = protocol_report_from_json(payload);
    validate_evidence(report, project_root);
    return report;
}

namespace {

struct GeneratorSession {
    Builder& builder;
    Executor& executor;
    const CrashJudge& judge;
    BuildState& state;
    int budget_s;
    std::function<std::vector<Verdict>(const std::string&)> static_checks;

    std::string current_source;
    bool built = false;
    bool harness_failure = false;
    bool coverage_ready = false;
    CoverageResult cov;
    GateDecision gate;
    std::vector<nlohmann::json> probe_log;
    std::vector<nlohmann::json> library_bugs;
    std::map<SubCheckId, Verdict> probe_verdicts;
};

Verdict fail_verdict(const ProbeOutcome& outcome) {
    Verdict v{outcome.spec.target, VerdictStatus::FAIL, {}};
    if (outcome.sanitizer_trace) {
        v.evidence.push_back({EvidenceKind::SANITIZER_TRACE, *outcome.sanitizer_trace});
    } else if (outcome.crashed) {
        v.evidence.push_back({EvidenceKind::SANITIZER_TRACE,
                              "crash without trace, exit status " +
                                  std::to_string(outcome.exit_status)});
    } else {
        std::string called;
        for (const auto& fn : outcome.called_functions) {
            called += called.empty() ? fn : ", " + fn;
        }
        v.evidence.push_back({EvidenceKind::BREAKPOINT_LOG,
                              "reach probe missed; functions seen: [" + called + "]"});
    }
    return v;
}

nlohmann::json handle_probes(GeneratorSession& s, const nlohmann::json& args, ProbeKind expected) {
    if (!s.built) return {{"error", "no built harness to probe"}};
    if (!args.is_object() || !args.contains("probes") || !args["probes"].is_array()) {
        return {{"error", "missing \"probes\" argument"}};
    }

    nlohmann::json results = nlohmann::json::array();
    for (const auto& doc : args["probes"]) {
        ProbeSpec spec;
        try {
            spec = probe_spec_from_json(doc);
        } catch (const Error& e) {
            results.push_back({{"error", e.what()}});
            continue;
        }
        if (spec.kind != expected) {
            results.push_back({{"error", to_string(spec.kind) + " probe sent to the " +
                                             to_string(expected) + " tool"}});
            continue;
        }

        ProbeOutcome outcome = execute(spec, s.executor);
        TriageClass tc = triage(outcome, s.judge);
        s.probe_log.push_back(probe_log_entry(outcome, tc));

        switch (tc) {
        case TriageClass::HARNESS_BUG:
        case TriageClass::REACH_MISS:
            s.harness_failure = true;
            s.coverage_ready = false;
            s.probe_verdicts[spec.target] = fail_verdict(outcome);
            break;
        case TriageClass::LIBRARY_BUG:
            s.library_bugs.push_back(probe_log_entry(outcome, tc));
            s.probe_verdicts[spec.target] = {spec.target, VerdictStatus::PASS, {}};
            break;
        case TriageClass::PASS:
            s.probe_verdicts[spec.target] = {spec.target, VerdictStatus::PASS, {}};
            break;
        }

        results.push_back({{"subcheck", to_string(spec.target)},
                           {"reach", to_string(outcome.reach)},
                           {"crashed", outcome.crashed},
                           {"triage", to_string(tc)},
                           {"next_action", to_string(next_action(tc))}});
    }
    return {{"results", std::move(results)}};
}

void add_generator_tools(ToolRegistry& registry, GeneratorSession& s) {
    registry.add({"build_harness", "dast", "compile a harness source, binding it on success",
                  nlohmann::json{{"source", "string"}},
                  [&s](const nlohmann::json& args) -> nlohmann::json {
                      if (!args.is_object() || !args.contains("source") ||
                          !args["source"].is_string()) {
                          return {{"error", "missing \"source\" argument"}};
                      }
                      const std::string source = args["source"].get<std::string>();
                      const BuildAttempt& attempt = s.state.attempt(s.builder, source);
                      nlohmann::json result = {
                          {"result", attempt.result == BuildOutcome::SUCCESS ? "success"
                                                                             : "compile_error"},
                          {"attempt", attempt.attempt},
                          {"remaining_attempts", s.state.cap() -
                                                     static_cast<int>(s.state.attempts().size())},
                      };
                      if (attempt.result == BuildOutcome::SUCCESS) {
                          s.current_source = source;
                          s.built = true;
                          s.harness_failure = false;
                          s.coverage_ready = false;
                          s.probe_verdicts.clear();
                          s.executor.bind_binary(attempt.binary);
                          result["binary"] = attempt.binary;
                      } else {
                          result["compiler_tail"] = attempt.compiler_tail;
                      }
                      return result;
                  }});

    registry.add({"reach_check", "dast", "run debugger reach probes against the built harness",
                  nlohmann::json{{"probes", "array"}},
                  [&s](const nlohmann::json& args) {
                      return handle_probes(s, args, ProbeKind::REACH);
                  }});

    registry.add({"run_check", "dast", "run sanitizer probes against the built harness",
                  nlohmann::json{{"probes", "array"}},
                  [&s](const nlohmann::json& args) {
                      return handle_probes(s, args, ProbeKind::RUN);
                  }});

    registry.add({"get_coverage", "dast",
                  "spend the timed fuzz budget and measure coverage; needs all probes green",
                  nlohmann::json::object(),
                  [&s](const nlohmann::json&) -> nlohmann::json {
                      if (!s.built) return {{"error", "no built harness to run"}};
                      if (s.harness_failure) {
                          return {{"error", "failing probes outstanding; fix the harness first"}};
                      }
                      FuzzResult fuzz = s.executor.timed_fuzz(s.budget_s);
                      if (fuzz.crashed) {
                          ProbeOutcome po;
                          po.crashed = true;
                          if (!fuzz.trace.empty()) po.sanitizer_trace = fuzz.trace;
                          po.exit_status = fuzz.exit_status;
                          const bool ours = s.judge.attributes_to_harness(po);
                          nlohmann::json event = {{"event", "timed_run_crash"},
                                                  {"attribution", ours ? "harness" : "library"},
                                                  {"trace", fuzz.trace}};
                          s.probe_log.push_back(event);
                          if (ours) {
                              s.harness_failure = true;
                              return {{"error", "timed run crashed inside the harness"},
                                      {"trace", fuzz.trace}};
                          }
                          s.library_bugs.push_back(event);
                      }
                      s.cov = s.executor.coverage();
                      s.coverage_ready = true;
                      s.probe_log.push_back({{"event", "timed_run"},
                                             {"budget_s", s.budget_s},
                                             {"crashed", fuzz.crashed},
                                             {"coverage", to_json(s.cov)}});
                      return {{"coverage", to_json(s.cov)}, {"fuzz_crashed", fuzz.crashed}};
                  }});

    registry.add({"submit_harness", "dast", "submit the validated harness for acceptance",
                  nlohmann::json{{"soft_ok", "boolean"}},
                  [&s](const nlohmann::json& args) -> nlohmann::json {
                      auto reject = [](const std::string& reason) -> nlohmann::json {
                          return {{"_rejected", true}, {"accepted", false}, {"reason", reason}};
                      };
                      if (!s.built) return reject("no built harness");
                      if (s.harness_failure) return reject("failing probes outstanding");
                      if (!s.coverage_ready) {
                          return reject("no coverage measured for the current build");
                      }
                      if (s.static_checks) {
                          for (const auto& v : s.static_checks(s.current_source)) {
                              if (v.status == VerdictStatus::FAIL) {
                                  return reject("static check failed: " + to_string(v.subcheck));
                              }
                          }
                      }
                      const bool soft = s.judge.soft_submit_ok({{"coverage", to_json(s.cov)}}) &&
                                        (!args.is_object() || args.value("soft_ok", true));
                      GateDecision gate =
                          submission_gate(s.cov.line, s.cov.branch, s.cov.entry_reached, soft);
                      s.probe_log.push_back({{"event", "gate"},
                                             {"accepted", gate.accepted},
                                             {"reason", gate.reason}});
                      if (!gate.accepted) return reject(gate.reason);
                      s.gate = gate;
                      return {{"accepted", true}, {"reason", gate.reason}};
                  }});
}

}  // namespace

GeneratorResult run_generator(
    ModelBackend& model, ToolRegistry tools, Builder& builder, Executor& executor,
    const CrashJudge& judge, BuildState& build_state, int budget_seconds,
    const nlohmann::json& task, const std::string& context,
    const std::function<std::vector<Verdict>(const std::string& source)>& static_checks) {
    GeneratorSession session{builder, executor, judge, build_state, budget_seconds,
                             static_checks};
    add_generator_tools(tools, session);

    AgentRunResult run = run_agent(default_agent_config(AgentName::HARNESS_GENERATOR), model,
                                   tools, task, context);

    GeneratorResult result;
    result.attempts = build_state.attempts();
    result.stall_warnings = build_state.stall_warnings();
    result.probe_log = std::move(session.probe_log);
    result.library_bugs = std::move(session.library_bugs);
    result.gate = session.gate;
    result.coverage = session.cov;
    result.final_source = session.current_source;
    result.final_binary = executor.bound_binary();
    for (const auto& [id, verdict] : session.probe_verdicts) {
        result.probe_verdicts.push_back(verdict);
    }
    result.turns_used = run.turns_used;
    return result;
}

namespace {

/* The statically decidable rows with the entry verdict already known.  A
 * fallback entry moves the public-entry question to its semantic row, so
 * the structural row reads NOT_APPLICABLE rather than FAIL. */
std::vector<Verdict> static_rows(const CallGraph& g, const std::string& source,
                                 const LogicGroup& lg, const EntryVerdict& entry_verdict,
                                 int depth, const UnsafeProfile& profile) {
    std::vector<Verdict> statics =
        check_static(g, extract_called_symbols(source), lg, depth, profile);
    std::vector<Verdict> rows;
    rows.push_back(statics[0]);  // P2.6
    switch (entry_verdict.p3) {
    case P3Status::PASS:
        rows.push_back({SubCheckId::P3_1, VerdictStatus::PASS, {}});
        break;
    case P3Status::FALLBACK:
        rows.push_back({SubCheckId::P3_1,
                        VerdictStatus::NOT_APPLICABLE,
                        {{EvidenceKind::JUDGE_NOTE,
                          "no public entry exists; the harness drives internal entry \"" +
                              entry_verdict.chosen_entry + "\""}}});
        break;
    case P3Status::FAIL:
        rows.push_back(statics[1]);
        break;
    }
    rows.push_back(statics[2]);  // P4.1
    return rows;
}

}  // namespace

PrincipleReport assemble_principles(const CallGraph& g, const std::string& harness_source,
                                    const LogicGroup& lg, const EntryVerdict& entry_verdict,
                                    int depth, const UnsafeProfile& profile,
                                    const std::vector<Verdict>& probe_verdicts,
                                    const SubCheckJudge* judge) {
    const SubCheckJudge& effective = judge ? *judge : default_subcheck_judge();
    std::map<SubCheckId, Verdict> rows;

    for (const auto& v : static_rows(g, harness_source, lg, entry_verdict, depth, profile)) {
        rows[v.subcheck] = v;
    }
    for (const auto& v : probe_verdicts) {
        rows[v.subcheck] = v;
    }

    const nlohmann::json judge_context = {{"source", harness_source},
                                          {"entry", entry_verdict.chosen_entry},
                                          {"group", lg.name}};
    for (SubCheckId id : {SubCheckId::P1_7, SubCheckId::P1_8, SubCheckId::P2_7}) {
        rows[id] = effective.judge(id, judge_context);
    }
    if (entry_verdict.p3 == P3Status::FALLBACK) {
        rows[SubCheckId::P3_2] = effective.judge(SubCheckId::P3_2, judge_context);
    } else {
        rows[SubCheckId::P3_2] = {SubCheckId::P3_2, VerdictStatus::NOT_APPLICABLE, {}};
    }

    /* With a call graph at hand the structural rows already answered these. */
    rows[SubCheckId::P3_3] = {SubCheckId::P3_3, VerdictStatus::NOT_APPLICABLE, {}};
    rows[SubCheckId::P4_2] = {SubCheckId::P4_2, VerdictStatus::NOT_APPLICABLE, {}};

    std::vector<Verdict> verdicts;
    for (const auto& check : subcheck_registry()) {
        auto it = rows.find(check.id);
        if (it != rows.end()) {
            verdicts.push_back(it->second);
        } else {
            verdicts.push_back({check.id, VerdictStatus::UNKNOWN, {}});
        }
    }
    return aggregate(attribute_dual_violations(verdicts));
}

nlohmann::json to_json(const RunRecord& record) {
    return nlohmann::json{
        {"project", record.project},
        {"logic_group", lg_to_json(record.lg, record.score, record.rank)},
        {"entry_verdict", to_json(record.entry_verdict)},
        {"protocol", to_json(record.protocol)},
        {"build_attempts",
         [&] {
             nlohmann::json arr = nlohmann::json::array();
             for (const auto& attempt : record.attempts) arr.push_back(to_json(attempt));
             return arr;
         }()},
        {"stall_warnings", record.stall_warnings},
        {"probe_log", record.probe_log},
        {"library_bugs", record.library_bugs},
        {"gate", {{"accepted", record.gate.accepted}, {"reason", record.gate.reason}}},
        {"coverage", to_json(record.coverage)},
        {"final_harness", {{"source", record.final_source}, {"binary", record.final_binary}}},
        {"principles", to_json(record.principles)},
        {"completed", record.completed},
        {"failure", record.failure},
    };
}

std::string write_run_record(const RunRecord& record, const std::string& out_dir) {
    std::string name;
    for (char c : record.lg.name) {
        name += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
    }
    const std::string body = to_json(record).dump(2) + "\n";
    fs::create_directories(out_dir);
    const std::string path =
        out_dir + "/record_" + record.project + "_" + name + "_" + content_hash(body) + ".json";
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write run record: " + path);
    out << body;
    return path;
}

RunRecord run_lg_pipeline(const PipelineConfig& config, const CallGraph& g, const RankedLg& item,
                          ModelBackend& model, Builder& builder, Executor& executor,
                          const CrashJudge& judge, const SubCheckJudge* subcheck_judge) {
    RunRecord record;
    record.project = config.project_name;
    record.lg = item.lg;
    record.score = item.score;
    record.rank = item.rank;
    record.entry_verdict = item.verdict;

    ToolRegistry tools;
    add_code_view_tools(tools, config.project_root);
    add_sast_tools(tools, g, config.depth);

    BuildState state(config.build_cap);
    try {
        const nlohmann::json research_task = {
            {"objective", "document how the library expects to be driven for this group"},
            {"logic_group", lg_to_json(item.lg)},
            {"entry", item.verdict.chosen_entry},
        };
        record.protocol =
            stage2(model, tools, config.project_root, research_task, item.lg.name);

        builder.bind_context(item.lg.name);
        auto statics = [&](const std::string& source) {
            return static_rows(g, source, item.lg, item.verdict, config.depth, config.profile);
        };
        const nlohmann::json generator_task = {
            {"objective", "write, build, and validate a fuzz harness for this group"},
            {"logic_group", lg_to_json(item.lg, item.score, item.rank)},
            {"entry", item.verdict.chosen_entry},
            {"protocol", to_json(record.protocol)},
        };
        GeneratorResult gen =
            run_generator(model, tools, builder, executor, judge, state,
                          config.stage4_budget_s, generator_task, item.lg.name, statics);

        record.attempts = gen.attempts;
        record.stall_warnings = gen.stall_warnings;
        record.probe_log = gen.probe_log;
        record.library_bugs = gen.library_bugs;
        record.gate = gen.gate;
        record.coverage = gen.coverage;
        record.final_source = gen.final_source;
        record.final_binary = gen.final_binary;
        record.principles =
            assemble_principles(g, gen.final_source, item.lg, item.verdict, config.depth,
                                config.profile, gen.probe_verdicts, subcheck_judge);
        record.completed = true;
    } catch (const Error& e) {
        record.completed = false;
        record.failure = e.what();
        record.attempts = state.attempts();
        record.stall_warnings = state.stall_warnings();
    }
    return record;
}

ProjectRunResult run_project_pipeline(const PipelineConfig& config, const CallGraph& g,
                                      ModelBackend& model, const BuilderFactory& make_builder,
                                      const ExecutorFactory& make_executor,
                                      const CrashJudge& judge, int workers,
                                      const SubCheckJudge* subcheck_judge) {
    ProjectRunResult out;

    ToolRegistry tools;
    add_code_view_tools(tools, config.project_root);
    add_sast_tools(tools, g, config.depth);

    Stage1Settings settings;
    settings.depth = config.depth;
    settings.top_k = config.top_k;
    settings.profile = config.profile;
    settings.existing = config.existing;
    const nlohmann::json discovery_task = {
        {"objective", "identify the logic groups worth a dedicated harness"},
        {"project", config.project_name},
    };
    out.discovery = stage1(g, model, tools, settings, discovery_task);

    const std::vector<RankedLg>& selected = out.discovery.selected;
    out.records.resize(selected.size());

    const int pool = std::max(1, std::min<int>(workers, static_cast<int>(selected.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        std::unique_ptr<Builder> builder = make_builder();
        std::unique_ptr<Executor> executor = make_executor();
        for (std::size_t i; (i = next.fetch_add(1)) < selected.size();) {
            out.records[i] = run_lg_pipeline(config, g, selected[i], model, *builder, *executor,
                                             judge, subcheck_judge);
        }
    };
    if (pool == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (int i = 0; i < pool; ++i) threads.emplace_back(work);
        for (auto& t : threads) t.join();
    }

    std::sort(out.records.begin(), out.records.end(),
              [](const RunRecord& a, const RunRecord& b) { return a.lg.name < b.lg.name; });
    return out;
}

namespace {

std::string replace_all(std::string text, const std::string& needle, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

}  // namespace

CommandBuilder::CommandBuilder(std::string build_cmd, std::string out_dir)
    : build_cmd_(std::move(build_cmd)), out_dir_(std::move(out_dir)) {}

BuildResult CommandBuilder::build(const std::string& source) {
    fs::create_directories(out_dir_);
    std::string stem = context_.empty() ? "harness" : context_;
    for (char& c : stem) {
        if (std::isalnum(static_cast<unsigned char>(c)) == 0) c = '_';
    }
    stem += "_" + std::to_string(++counter_);

    const std::string source_file = out_dir_ + "/" + stem + ".c";
    const std::string binary = out_dir_ + "/" + stem;
    {
        std::ofstream out(source_file);
        if (!out) throw ConfigError("cannot write harness source: " + source_file);
        out << source;
    }

    std::string cmd = replace_all(build_cmd_, "{source_file}", source_file);
    cmd = replace_all(cmd, "{binary}", binary);
    cmd += " 2>&1";

    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw ConfigError("cannot spawn build command: " + cmd);
    std::string output;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) {
        output.append(buf, n);
    }
    const int status = pclose(pipe);
    const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;

    BuildResult result;
    result.success = ok;
    result.compiler_tail =
        output.size() > 4000 ? output.substr(output.size() - 4000) : output;
    result.binary = ok ? binary : "";
    return result;
}

}  // namespace hq
