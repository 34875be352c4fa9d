#include "hq/subchecks.hpp"

#include <algorithm>
#include <cctype>

#include "hq/danger.hpp"

namespace hq {

std::string to_string(SubCheckId id) {
    static const char* names[] = {
        "P1.1", "P1.2", "P1.3", "P1.4", "P1.5", "P1.6", "P1.7", "P1.8",
        "P2.1", "P2.2", "P2.3", "P2.4", "P2.5", "P2.6", "P2.7", "P2.8",
        "P3.1", "P3.2", "P3.3",
        "P4.1", "P4.2",
    };
    return names[static_cast<int>(id)];
}

std::optional<SubCheckId> parse_subcheck(const std::string& text) {
    for (const auto& check : subcheck_registry()) {
        if (to_string(check.id) == text) return check.id;
    }
    return std::nullopt;
}

std::string to_string(Principle p) {
    switch (p) {
    case Principle::P1: return "P1";
    case Principle::P2: return "P2";
    case Principle::P3: return "P3";
    case Principle::P4: return "P4";
    }
    return "P1";
}

std::string to_string(Oracle o) {
    switch (o) {
    case Oracle::ASAN: return "asan";
    case Oracle::LSAN: return "lsan";
    case Oracle::GDB: return "gdb";
    case Oracle::STATIC_CALLGRAPH: return "static_callgraph";
    case Oracle::LLM_SEMANTIC: return "llm_semantic";
    }
    return "asan";
}

std::string to_string(ProbeInputKind k) {
    switch (k) {
    case ProbeInputKind::ERROR_PATH: return "error_path";
    case ProbeInputKind::FREE_THEN_USE: return "free_then_use";
    case ProbeInputKind::TWO_INPUT_SEQUENCE: return "two_input_sequence";
    case ProbeInputKind::MARKER_BYTES: return "marker_bytes";
    case ProbeInputKind::OVERSIZED: return "oversized";
    case ProbeInputKind::UNDERSIZED: return "undersized";
    case ProbeInputKind::ARBITRARY: return "arbitrary";
    case ProbeInputKind::INVALID_PARAMS: return "invalid_params";
    case ProbeInputKind::EARLY_EXIT: return "early_exit";
    case ProbeInputKind::NONE: return "none";
    }
    return "none";
}

const std::vector<SubCheck>& subcheck_registry() {
    static const std::vector<SubCheck> registry{
        {SubCheckId::P1_1, Principle::P1, "Resource leaks",
         "API error paths must not leak harness-held resources",
         ProbeInputKind::ERROR_PATH, Oracle::LSAN, "sanitizer crash report"},
        {SubCheckId::P1_2, Principle::P1, "Use-after-free / double-free",
         "freed objects must never be touched again",
         ProbeInputKind::FREE_THEN_USE, Oracle::ASAN, "sanitizer crash report"},
        {SubCheckId::P1_3, Principle::P1, "Stale state between iterations",
         "one iteration must not observe the previous iteration's state",
         ProbeInputKind::TWO_INPUT_SEQUENCE, Oracle::ASAN,
         "sanitizer crash report (either address or leak oracle counts)"},
        {SubCheckId::P1_4, Principle::P1, "Input flows into the API",
         "fuzz bytes must actually reach the library call",
         ProbeInputKind::MARKER_BYTES, Oracle::GDB, "API call site stays silent"},
        {SubCheckId::P1_5, Principle::P1, "Buffer safety",
         "harness-allocated buffers must honour their size limits",
         ProbeInputKind::OVERSIZED, Oracle::ASAN, "sanitizer crash report"},
        {SubCheckId::P1_6, Principle::P1, "Size checks before access",
         "undersized inputs must be rejected before field access",
         ProbeInputKind::UNDERSIZED, Oracle::GDB, "API breakpoint fires"},
        {SubCheckId::P1_7, Principle::P1, "No undefined behaviour",
         "the harness code itself must be free of undefined behaviour",
         ProbeInputKind::NONE, Oracle::LLM_SEMANTIC,
         "reviewer flags a signed-overflow, unaligned-cast, or null-deref pattern"},
        {SubCheckId::P1_8, Principle::P1, "No reimplementation",
         "the harness must call the API rather than a local copy of it",
         ProbeInputKind::NONE, Oracle::LLM_SEMANTIC, "reviewer detects a local copy"},

        {SubCheckId::P2_1, Principle::P2, "Initialization sequence",
         "required init calls must precede any use",
         ProbeInputKind::ARBITRARY, Oracle::GDB, "init breakpoint stays silent before the target"},
        {SubCheckId::P2_2, Principle::P2, "Parameter construction",
         "parameters must be built the way the API contract demands",
         ProbeInputKind::INVALID_PARAMS, Oracle::ASAN, "sanitizer crash report"},
        {SubCheckId::P2_3, Principle::P2, "Object lifecycle",
         "create, use, and destroy must all appear and in that order",
         ProbeInputKind::ARBITRARY, Oracle::GDB, "any of create/use/destroy missing"},
        {SubCheckId::P2_4, Principle::P2, "Return value handling",
         "error returns must be checked before dependent calls",
         ProbeInputKind::ERROR_PATH, Oracle::GDB, "error branch stays silent"},
        {SubCheckId::P2_5, Principle::P2, "Cleanup sequence",
         "teardown must run completely on every path",
         ProbeInputKind::EARLY_EXIT, Oracle::LSAN, "sanitizer crash report"},
        {SubCheckId::P2_6, Principle::P2, "API existence",
         "every symbol the harness calls must exist in the public API",
         ProbeInputKind::NONE, Oracle::STATIC_CALLGRAPH,
         "called symbol not under a public-header path"},
        {SubCheckId::P2_7, Principle::P2, "Co-call constraints",
         "calls that must appear in pairs must both appear",
         ProbeInputKind::NONE, Oracle::LLM_SEMANTIC, "reviewer detects a mismatched pair"},
        {SubCheckId::P2_8, Principle::P2, "Prerequisite state",
         "stateful preconditions must be established before the target call",
         ProbeInputKind::ARBITRARY, Oracle::GDB,
         "prerequisite breakpoint stays silent before the target"},

        {SubCheckId::P3_1, Principle::P3, "Boundary respect",
         "the harness enters through a public API function",
         ProbeInputKind::NONE, Oracle::STATIC_CALLGRAPH, "no public entry reaches the core"},
        {SubCheckId::P3_2, Principle::P3, "Boundary respect (fallback entry)",
         "an internal entry is acceptable when no public one exists",
         ProbeInputKind::NONE, Oracle::LLM_SEMANTIC, "reviewer rejects the boundary argument"},
        {SubCheckId::P3_3, Principle::P3, "Boundary respect (no call graph)",
         "boundary respect judged from source alone",
         ProbeInputKind::NONE, Oracle::LLM_SEMANTIC, "reviewer rejects the boundary argument"},

        {SubCheckId::P4_1, Principle::P4, "Entry adequacy",
         "the entry must reach core logic that does unsafe work",
         ProbeInputKind::NONE, Oracle::STATIC_CALLGRAPH,
         "entry reaches nothing, or its danger score is zero"},
        {SubCheckId::P4_2, Principle::P4, "Entry adequacy (no call graph)",
         "entry adequacy judged from source alone",
         ProbeInputKind::NONE, Oracle::LLM_SEMANTIC, "reviewer declares the entry inadequate"},
    };
    return registry;
}

const SubCheck& subcheck(SubCheckId id) {
    return subcheck_registry()[static_cast<std::size_t>(id)];
}

bool ap_operationalised(const SubCheck& check) {
    return check.oracle == Oracle::ASAN || check.oracle == Oracle::LSAN ||
           check.oracle == Oracle::GDB;
}

std::string to_string(VerdictStatus s) {
    switch (s) {
    case VerdictStatus::PASS: return "PASS";
    case VerdictStatus::FAIL: return "FAIL";
    case VerdictStatus::UNKNOWN: return "UNKNOWN";
    case VerdictStatus::NOT_APPLICABLE: return "NOT_APPLICABLE";
    }
    return "UNKNOWN";
}

std::string to_string(EvidenceKind k) {
    switch (k) {
    case EvidenceKind::SANITIZER_TRACE: return "sanitizer_trace";
    case EvidenceKind::BREAKPOINT_LOG: return "breakpoint_log";
    case EvidenceKind::SOURCE_LOCATION: return "source_location";
    case EvidenceKind::JUDGE_NOTE: return "judge_note";
    }
    return "judge_note";
}

nlohmann::json to_json(const Verdict& v) {
    nlohmann::json evidence = nlohmann::json::array();
    for (const auto& e : v.evidence) {
        evidence.push_back({{"kind", to_string(e.kind)}, {"payload", e.payload}});
    }
    return nlohmann::json{
        {"subcheck", to_string(v.subcheck)},
        {"status", to_string(v.status)},
        {"evidence", std::move(evidence)},
    };
}

nlohmann::json to_json(const PrincipleReport& report) {
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : report.verdicts) verdicts.push_back(to_json(v));
    nlohmann::json unknown = nlohmann::json::array();
    for (const auto& id : report.unknown) unknown.push_back(to_string(id));
    return nlohmann::json{
        {"accepted", report.accepted},
        {"verdicts", std::move(verdicts)},
        {"unknown", std::move(unknown)},
    };
}

PrincipleReport aggregate(const std::vector<Verdict>& verdicts) {
    std::set<SubCheckId> seen;
    for (const auto& v : verdicts) {
        if (!seen.insert(v.subcheck).second) {
            throw DuplicateVerdictError("two verdicts for sub-check " + to_string(v.subcheck));
        }
        if (v.status == VerdictStatus::FAIL && v.evidence.empty()) {
            throw IntegrityError("FAIL verdict for " + to_string(v.subcheck) +
                                 " carries no evidence");
        }
    }

    PrincipleReport report;
    report.verdicts = verdicts;
    std::sort(report.verdicts.begin(), report.verdicts.end(),
              [](const Verdict& a, const Verdict& b) { return a.subcheck < b.subcheck; });

    report.accepted = true;
    for (const auto& v : report.verdicts) {
        if (v.status == VerdictStatus::FAIL) report.accepted = false;
        if (v.status == VerdictStatus::UNKNOWN) report.unknown.push_back(v.subcheck);
    }
    return report;
}

std::vector<Verdict> attribute_dual_violations(const std::vector<Verdict>& verdicts) {
    std::set<std::string> p2_traces;
    for (const auto& v : verdicts) {
        if (subcheck(v.subcheck).principle != Principle::P2 || v.status != VerdictStatus::FAIL) {
            continue;
        }
        for (const auto& e : v.evidence) {
            if (e.kind == EvidenceKind::SANITIZER_TRACE) p2_traces.insert(e.payload);
        }
    }
    if (p2_traces.empty()) return verdicts;

    std::vector<Verdict> kept;
    for (const auto& v : verdicts) {
        bool duplicate_of_p2 = false;
        if (subcheck(v.subcheck).principle == Principle::P1 && v.status == VerdictStatus::FAIL) {
            for (const auto& e : v.evidence) {
                if (e.kind == EvidenceKind::SANITIZER_TRACE && p2_traces.count(e.payload)) {
                    duplicate_of_p2 = true;
                    break;
                }
            }
        }
        if (!duplicate_of_p2) kept.push_back(v);
    }
    return kept;
}

Verdict SubCheckJudge::judge(SubCheckId id, const nlohmann::json&) const {
    return Verdict{id, VerdictStatus::UNKNOWN, {}};
}

const SubCheckJudge& default_subcheck_judge() {
    static const SubCheckJudge judge;
    return judge;
}

const std::vector<std::string>& default_symbol_allowlist() {
    static const std::vector<std::string> allowlist{
        "memcpy", "memmove", "memset", "malloc", "calloc", "realloc", "free",
        "strcpy", "strncpy", "strcat", "sprintf", "snprintf", "strlen", "strcmp",
        "strncmp", "strdup", "printf", "fprintf", "puts", "putchar", "fopen",
        "fclose", "fread", "fwrite", "exit", "abort", "assert",
        "LLVMFuzzerTestOneInput", "LLVMFuzzerInitialize", "main",
    };
    return allowlist;
}

std::set<std::string> extract_called_symbols(const std::string& source) {
    static const std::set<std::string> keywords{
        "if", "else", "for", "while", "do", "switch", "return", "sizeof",
        "case", "break", "continue", "goto", "defined", "alignof", "typeof",
    };

    auto ident_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };

    std::set<std::string> symbols;
    std::size_t i = 0;
    const std::size_t n = source.size();
    while (i < n) {
        if (!ident_char(source[i]) || std::isdigit(static_cast<unsigned char>(source[i]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < n && ident_char(source[i])) ++i;
        std::string word = source.substr(start, i - start);
        std::size_t j = i;
        while (j < n && std::isspace(static_cast<unsigned char>(source[j]))) ++j;
        if (j < n && source[j] == '(' && !keywords.count(word)) {
            symbols.insert(std::move(word));
        }
    }
    return symbols;
}

std::vector<Verdict> check_static(const CallGraph& g, const std::set<std::string>& harness_calls,
                                  const LogicGroup& lg, int depth, const UnsafeProfile& profile,
                                  const std::vector<std::string>& allowlist) {
    std::vector<Verdict> verdicts;

    /* P2.6: every called symbol must resolve to something published. */
    {
        Verdict v{SubCheckId::P2_6, VerdictStatus::PASS, {}};
        bool saw_unknown = false;
        for (const auto& symbol : harness_calls) {
            if (std::find(allowlist.begin(), allowlist.end(), symbol) != allowlist.end()) {
                continue;
            }
            auto ids = g.resolve_symbol(symbol);
            if (ids.empty()) {
                v.status = VerdictStatus::FAIL;
                v.evidence.push_back({EvidenceKind::SOURCE_LOCATION,
                                      "called symbol \"" + symbol +
                                          "\" resolves to no known function"});
                continue;
            }
            bool any_public = false;
            bool any_unknown = false;
            for (const auto& id : ids) {
                switch (g.node(id).visibility) {
                case Visibility::PUBLIC: any_public = true; break;
                case Visibility::UNKNOWN: any_unknown = true; break;
                case Visibility::INTERNAL: break;
                }
            }
            if (any_public) continue;
            if (any_unknown) {
                saw_unknown = true;
                v.evidence.push_back({EvidenceKind::SOURCE_LOCATION,
                                      "called symbol \"" + symbol +
                                          "\" has no classified definition path"});
            } else {
                v.status = VerdictStatus::FAIL;
                v.evidence.push_back({EvidenceKind::SOURCE_LOCATION,
                                      "called symbol \"" + symbol +
                                          "\" resolves only to internal definitions"});
            }
        }
        if (v.status == VerdictStatus::PASS) {
            if (saw_unknown) {
                v.status = VerdictStatus::UNKNOWN;
            } else {
                v.evidence.clear();
            }
        }
        verdicts.push_back(std::move(v));
    }

    const EntryVerdict entry = select_entry(g, lg.core, depth, profile);

    /* P3.1: a public entry exists for the core. */
    {
        Verdict v{SubCheckId::P3_1, VerdictStatus::PASS, {}};
        if (entry.p3 != P3Status::PASS) {
            v.status = VerdictStatus::FAIL;
            v.evidence.push_back({EvidenceKind::JUDGE_NOTE,
                                  "no public entry reaches the core within depth " +
                                      std::to_string(depth)});
        }
        verdicts.push_back(std::move(v));
    }

    /* P4.1: the chosen entry reaches the core and scores positive danger. */
    {
        Verdict v{SubCheckId::P4_1, VerdictStatus::PASS, {}};
        if (!entry.p4_pass) {
            v.status = VerdictStatus::FAIL;
            if (entry.chosen_entry.empty()) {
                v.evidence.push_back({EvidenceKind::JUDGE_NOTE,
                                      "no entry reaches the core within depth " +
                                          std::to_string(depth)});
            } else {
                v.evidence.push_back({EvidenceKind::JUDGE_NOTE,
                                      "danger(" + entry.chosen_entry + ") = 0 at depth " +
                                          std::to_string(depth)});
            }
        }
        verdicts.push_back(std::move(v));
    }

    return verdicts;
}

}  // namespace hq
