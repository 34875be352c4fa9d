#ifndef HQ_PROTOCOL_REPORT_HPP
#define HQ_PROTOCOL_REPORT_HPP

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hq/errors.hpp"

namespace hq {

struct EvidenceRef {
    std::string file;
    int line = 0;
    std::string snippet;
};

enum class SectionStatus { VALIDATED, UNKNOWN_EVIDENCE };

std::string to_string(SectionStatus s);

struct ReportSection {
    std::string claim;
    std::vector<EvidenceRef> evidence;
    SectionStatus status = SectionStatus::VALIDATED;
    std::vector<std::string> warnings;
};

/* How the library under test expects to be driven, one section per protocol
 * aspect (P2.1 through P2.8), each claim pinned to file:line evidence. */
struct ProtocolReport {
    std::string entry;
    std::map<std::string, ReportSection> sections;
};

/* All eight sections must be present; a missing one is an error, not a
 * warning, because downstream consumers index into them unconditionally. */
ProtocolReport protocol_report_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const ProtocolReport& report);

/* Checks every evidence reference against the real tree: the file must
 * exist under project_root and the line must be within it.  Broken
 * references downgrade their section to UNKNOWN_EVIDENCE; a snippet that
 * does not appear on the named line is only worth a warning. */
void validate_evidence(ProtocolReport& report, const std::string& project_root);

const std::vector<std::string>& protocol_section_keys();

}  // namespace hq

#endif
