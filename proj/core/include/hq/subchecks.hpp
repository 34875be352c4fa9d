#ifndef HQ_SUBCHECKS_HPP
#define HQ_SUBCHECKS_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hq/callgraph.hpp"
#include "hq/logic_group.hpp"
#include "hq/unsafe.hpp"

namespace hq {

enum class Principle { P1, P2, P3, P4 };

enum class Oracle { ASAN, LSAN, GDB, STATIC_CALLGRAPH, LLM_SEMANTIC };

/* What a probe feeds the harness to trigger the behaviour under test.
 * NONE marks checks that run without executing the harness at all. */
enum class ProbeInputKind {
    ERROR_PATH,
    FREE_THEN_USE,
    TWO_INPUT_SEQUENCE,
    MARKER_BYTES,
    OVERSIZED,
    UNDERSIZED,
    ARBITRARY,
    INVALID_PARAMS,
    EARLY_EXIT,
    NONE,
};

enum class SubCheckId {
    P1_1, P1_2, P1_3, P1_4, P1_5, P1_6, P1_7, P1_8,
    P2_1, P2_2, P2_3, P2_4, P2_5, P2_6, P2_7, P2_8,
    P3_1, P3_2, P3_3,
    P4_1, P4_2,
};

std::string to_string(SubCheckId id);                       // "P1.5"
std::optional<SubCheckId> parse_subcheck(const std::string& text);
std::string to_string(Principle p);
std::string to_string(Oracle o);
std::string to_string(ProbeInputKind k);

struct SubCheck {
    SubCheckId id;
    Principle principle;
    std::string name;
    std::string purpose;
    ProbeInputKind probe_input;
    Oracle oracle;
    std::string fail_signal;
};

/* Fixed check catalogue, ordered P1.1 through P4.2.  Twelve of the sixteen
 * P1/P2 rows run as live probes (sanitizer or debugger oracles); the rest
 * are decided statically or by a semantic judge. */
const std::vector<SubCheck>& subcheck_registry();
const SubCheck& subcheck(SubCheckId id);

/* True when the row's oracle is ASAN, LSAN, or GDB. */
bool ap_operationalised(const SubCheck& check);

enum class VerdictStatus { PASS, FAIL, UNKNOWN, NOT_APPLICABLE };

enum class EvidenceKind { SANITIZER_TRACE, BREAKPOINT_LOG, SOURCE_LOCATION, JUDGE_NOTE };

std::string to_string(VerdictStatus s);
std::string to_string(EvidenceKind k);

struct Evidence {
    EvidenceKind kind;
    std::string payload;
};

struct Verdict {
    SubCheckId subcheck;
    VerdictStatus status = VerdictStatus::UNKNOWN;
    std::vector<Evidence> evidence;
};

nlohmann::json to_json(const Verdict& v);

struct PrincipleReport {
    bool accepted = false;
    std::vector<Verdict> verdicts;       // registry order
    std::vector<SubCheckId> unknown;     // checks that could not be decided
};

nlohmann::json to_json(const PrincipleReport& report);

/* Combines per-check verdicts: accepted iff nothing FAILed.  UNKNOWN never
 * blocks but is surfaced in its own list.  At most one verdict per check;
 * a FAIL must carry evidence. */
PrincipleReport aggregate(const std::vector<Verdict>& verdicts);

/* When one sanitizer trace trips both a P1 and a P2 row, the protocol
 * violation owns it: the P1 FAIL carrying an identical trace is dropped. */
std::vector<Verdict> attribute_dual_violations(const std::vector<Verdict>& verdicts);

/* Oracle port for the checks only a semantic reviewer can decide.  The
 * default judge abstains. */
class SubCheckJudge {
public:
    virtual ~SubCheckJudge() = default;
    virtual Verdict judge(SubCheckId id, const nlohmann::json& context) const;
};

const SubCheckJudge& default_subcheck_judge();

/* Symbols a harness may call without them being part of the library API. */
const std::vector<std::string>& default_symbol_allowlist();

/* Lexical scan for identifiers in call position.  Keywords are skipped;
 * anything else is a candidate call for the static checks to resolve. */
std::set<std::string> extract_called_symbols(const std::string& source);

/* The three statically decidable rows: API existence of everything the
 * harness calls, public-entry existence for the group, and entry adequacy
 * (reach plus positive danger).  Returns verdicts in that order. */
std::vector<Verdict> check_static(const CallGraph& g, const std::set<std::string>& harness_calls,
                                  const LogicGroup& lg, int depth, const UnsafeProfile& profile,
                                  const std::vector<std::string>& allowlist =
                                      default_symbol_allowlist());

}  // namespace hq

#endif
