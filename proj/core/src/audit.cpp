#include "hq/audit.hpp"

#include <map>

#include "hq/errors.hpp"

namespace hq {

namespace {

double metric_value(const CoverageResult& cov, const std::string& metric) {
    if (metric == "line") return cov.line;
    if (metric == "branch") return cov.branch;
    if (metric == "edges") return cov.edges;
    throw ConfigError("unknown coverage metric: " + metric);
}

nlohmann::json crash_event(const char* phase, const FuzzResult& fuzz, bool harness_side) {
    return nlohmann::json{
        {"event", phase},
        {"attribution", harness_side ? "harness" : "library"},
        {"trace", fuzz.trace},
        {"exit_status", fuzz.exit_status},
    };
}

bool fuzz_is_harness_side(const FuzzResult& fuzz, const CrashJudge& judge) {
    ProbeOutcome outcome;
    outcome.crashed = true;
    if (!fuzz.trace.empty()) outcome.sanitizer_trace = fuzz.trace;
    outcome.exit_status = fuzz.exit_status;
    return judge.attributes_to_harness(outcome);
}

/* Pulls probe specs out of a model reply; the reply uses the same probe
 * tools the generator has, one batch per call. */
std::vector<ProbeSpec> probes_from_reply(const ModelReply& reply,
                                         std::vector<nlohmann::json>& log) {
    std::vector<ProbeSpec> specs;
    for (const auto& call : reply.calls) {
        if (call.tool != "run_check" && call.tool != "reach_check") continue;
        for (const auto& doc : call.args.value("probes", nlohmann::json::array())) {
            try {
                specs.push_back(probe_spec_from_json(doc));
            } catch (const Error& e) {
                log.push_back({{"event", "invalid_probe"}, {"error", e.what()}});
            }
        }
    }
    return specs;
}

std::string first_evidence(const ProbeOutcome& outcome) {
    if (outcome.sanitizer_trace) return *outcome.sanitizer_trace;
    if (outcome.crashed) {
        return "crash without trace, exit status " + std::to_string(outcome.exit_status);
    }
    std::string called;
    for (const auto& fn : outcome.called_functions) {
        called += called.empty() ? fn : ", " + fn;
    }
    return "reach probe missed; functions seen: [" + called + "]";
}

}  // namespace

nlohmann::json to_json(const AuditRecord& record) {
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& v : record.violations) {
        violations.push_back({{"subcheck", to_string(v.subcheck)},
                              {"evidence", v.evidence},
                              {"confirmed", v.confirmed},
                              {"self_declared_fp", v.self_declared_fp}});
    }
    nlohmann::json attempts = nlohmann::json::array();
    for (const auto& attempt : record.repair_attempts) attempts.push_back(to_json(attempt));
    return nlohmann::json{
        {"clean", record.clean},
        {"original_coverage", to_json(record.original)},
        {"violations", std::move(violations)},
        {"unmasked_bugs", record.unmasked_bugs},
        {"probe_log", record.probe_log},
        {"repair_attempts", std::move(attempts)},
        {"repairs_used", record.repairs_used},
        {"final_source", record.final_source},
        {"research_notes", record.research_notes},
    };
}

AuditRecord audit_harness(const AuditConfig& config, ModelBackend& model, Builder& builder,
                          Executor& executor, const CrashJudge& judge) {
    AuditRecord record;

    executor.bind_binary(config.binary);
    FuzzResult baseline_fuzz = executor.timed_fuzz(config.budget_s);
    if (baseline_fuzz.crashed) {
        const bool ours = fuzz_is_harness_side(baseline_fuzz, judge);
        nlohmann::json event = crash_event("baseline_run_crash", baseline_fuzz, ours);
        record.probe_log.push_back(event);
        if (!ours) record.unmasked_bugs.push_back(event);
    }
    record.original = executor.coverage();
    record.probe_log.push_back(
        {{"event", "baseline_run"}, {"coverage", to_json(record.original)}});

    ModelRequest request;
    request.agent = to_string(AgentName::HARNESS_GENERATOR);
    request.context = config.context;
    request.messages.push_back(
        {{"role", "task"},
         {"content",
          {{"objective", "recap how this harness drives the library, then probe it"},
           {"harness_source", config.harness_source}}}});

    ModelReply research = model.complete(request);
    record.research_notes = research.text;
    request.messages.push_back({{"role", "assistant"}, {"content", research.text}});

    request.messages.push_back(
        {{"role", "task"},
         {"content", {{"objective", "propose probes for the live-oracle checks"}}}});
    ModelReply probe_reply = model.complete(request);
    std::vector<ProbeSpec> specs = probes_from_reply(probe_reply, record.probe_log);

    std::map<SubCheckId, std::string> failing;
    for (const auto& spec : specs) {
        ProbeOutcome outcome = execute(spec, executor);
        TriageClass tc = triage(outcome, judge);
        record.probe_log.push_back(probe_log_entry(outcome, tc));
        switch (tc) {
        case TriageClass::HARNESS_BUG:
        case TriageClass::REACH_MISS:
            failing.emplace(spec.target, first_evidence(outcome));
            break;
        case TriageClass::LIBRARY_BUG:
            record.unmasked_bugs.push_back(probe_log_entry(outcome, tc));
            break;
        case TriageClass::PASS:
            break;
        }
    }

    for (const auto& [id, evidence] : failing) {
        AuditViolation v;
        v.subcheck = id;
        v.evidence = evidence;
        record.violations.push_back(v);
    }
    if (record.violations.empty()) {
        record.clean = true;
        return record;
    }

    nlohmann::json found = nlohmann::json::array();
    for (const auto& v : record.violations) found.push_back(to_string(v.subcheck));

    builder.bind_context(config.context);
    bool confirmed = false;
    int attempt = 0;
    while (attempt < config.repair_cap && !confirmed) {
        ++attempt;
        request.messages.push_back(
            {{"role", "task"},
             {"content",
              {{"objective", "rewrite the harness to fix the violations"},
               {"violations", found},
               {"attempt", attempt}}}});
        ModelReply repair = model.complete(request);
        request.messages.push_back({{"role", "assistant"}, {"content", repair.text}});

        std::string source;
        for (const auto& call : repair.calls) {
            if (call.tool == "build_harness" && call.args.contains("source") &&
                call.args["source"].is_string()) {
                source = call.args["source"].get<std::string>();
                break;
            }
        }
        if (source.empty()) {
            record.probe_log.push_back(
                {{"event", "repair_without_source"}, {"attempt", attempt}});
            continue;
        }

        BuildResult built = builder.build(source);
        BuildAttempt build_record;
        build_record.attempt = attempt;
        build_record.source_hash = content_hash(source);
        build_record.result =
            built.success ? BuildOutcome::SUCCESS : BuildOutcome::COMPILE_ERROR;
        build_record.compiler_tail = built.compiler_tail;
        build_record.binary = built.success ? built.binary : "";
        record.repair_attempts.push_back(build_record);
        if (!built.success) continue;

        executor.bind_binary(built.binary);
        bool harness_fault = false;
        for (const auto& spec : specs) {
            ProbeOutcome outcome = execute(spec, executor);
            TriageClass tc = triage(outcome, judge);
            record.probe_log.push_back(probe_log_entry(outcome, tc));
            if (tc == TriageClass::HARNESS_BUG || tc == TriageClass::REACH_MISS) {
                harness_fault = true;
            } else if (tc == TriageClass::LIBRARY_BUG) {
                /* The repair removed whatever shadowed this crash: a latent
                 * library bug the broken harness was masking. */
                record.unmasked_bugs.push_back(probe_log_entry(outcome, tc));
            }
        }
        if (harness_fault) continue;

        FuzzResult fuzz = executor.timed_fuzz(config.budget_s);
        if (fuzz.crashed) {
            const bool ours = fuzz_is_harness_side(fuzz, judge);
            nlohmann::json event = crash_event("repaired_run_crash", fuzz, ours);
            record.probe_log.push_back(event);
            if (ours) continue;
            record.unmasked_bugs.push_back(event);
        }

        CoverageResult cov = executor.coverage();
        const double before = metric_value(record.original, config.metric);
        const double after = metric_value(cov, config.metric);
        record.probe_log.push_back({{"event", "repaired_run"},
                                    {"attempt", attempt},
                                    {"coverage", to_json(cov)},
                                    {"metric", config.metric},
                                    {"baseline", before},
                                    {"repaired", after}});
        if (after < before) continue;

        confirmed = true;
        record.final_source = source;
    }

    record.repairs_used = attempt;
    for (auto& v : record.violations) {
        v.confirmed = confirmed;
        v.self_declared_fp = !confirmed;
    }
    return record;
}

}  // namespace hq
