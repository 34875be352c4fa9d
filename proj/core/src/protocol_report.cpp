#include "hq/protocol_report.hpp"

#include <filesystem>
#include <fstream>

namespace hq {

std::string to_string(SectionStatus s) {
    return s == SectionStatus::VALIDATED ? "validated" : "unknown_evidence";
}

const std::vector<std::string>& protocol_section_keys() {
    static const std::vector<std::string> keys{
        "P2.1", "P2.2", "P2.3", "P2.4", "P2.5", "P2.6", "P2.7", "P2.8",
    };
    return keys;
}

ProtocolReport protocol_report_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("protocol report must be a JSON object");

    ProtocolReport report;
    if (auto it = doc.find("entry"); it != doc.end() && it->is_string()) {
        report.entry = it->get<std::string>();
    }

    auto sections = doc.find("sections");
    if (sections == doc.end() || !sections->is_object()) {
        throw SchemaError("protocol report needs a \"sections\" object");
    }

    for (const auto& key : protocol_section_keys()) {
        auto section = sections->find(key);
        if (section == sections->end()) {
            throw MissingSectionError("protocol report is missing section " + key);
        }
        if (!section->is_object()) {
            throw SchemaError("protocol report section " + key + " must be an object");
        }
        ReportSection parsed;
        parsed.claim = section->value("claim", std::string());
        if (auto ev = section->find("evidence"); ev != section->end() && ev->is_array()) {
            for (const auto& item : *ev) {
                if (!item.is_object()) {
                    throw SchemaError("evidence items in section " + key + " must be objects");
                }
                EvidenceRef ref;
                ref.file = item.value("file", std::string());
                ref.line = item.value("line", 0);
                ref.snippet = item.value("snippet", std::string());
                parsed.evidence.push_back(std::move(ref));
            }
        }
        report.sections.emplace(key, std::move(parsed));
    }
    return report;
}

nlohmann::json to_json(const ProtocolReport& report) {
    nlohmann::json sections = nlohmann::json::object();
    for (const auto& [key, section] : report.sections) {
        nlohmann::json evidence = nlohmann::json::array();
        for (const auto& ref : section.evidence) {
            evidence.push_back({
                {"file", ref.file},
                {"line", ref.line},
                {"snippet", ref.snippet},
            });
        }
        sections[key] = {
            {"claim", section.claim},
            {"evidence", std::move(evidence)},
            {"status", to_string(section.status)},
            {"warnings", section.warnings},
        };
    }
    return nlohmann::json{{"entry", report.entry}, {"sections", std::move(sections)}};
}

void validate_evidence(ProtocolReport& report, const std::string& project_root) {
    namespace fs = std::filesystem;
    const fs::path root(project_root);

    for (auto& [key, section] : report.sections) {
        for (const auto& ref : section.evidence) {
            if (ref.file.empty() || ref.file.find("..") != std::string::npos) {
                section.status = SectionStatus::UNKNOWN_EVIDENCE;
                section.warnings.push_back(key + ": evidence names an invalid path \"" +
                                           ref.file + "\"");
                continue;
            }
            const fs::path path = root / ref.file;
            if (!fs::is_regular_file(path)) {
                section.status = SectionStatus::UNKNOWN_EVIDENCE;
                section.warnings.push_back(key + ": evidence file \"" + ref.file +
                                           "\" does not exist");
                continue;
            }

            std::ifstream in(path);
            std::string line;
            int line_count = 0;
            std::string target_line;
            while (std::getline(in, line)) {
                ++line_count;
                if (line_count == ref.line) target_line = line;
            }
            if (ref.line < 1 || ref.line > line_count) {
                section.status = SectionStatus::UNKNOWN_EVIDENCE;
                section.warnings.push_back(key + ": evidence line " + std::to_string(ref.line) +
                                           " is outside \"" + ref.file + "\" (" +
                                           std::to_string(line_count) + " lines)");
                continue;
            }
            if (!ref.snippet.empty() && target_line.find(ref.snippet) == std::string::npos) {
                section.warnings.push_back(key + ": snippet not found at " + ref.file + ":" +
                                           std::to_string(ref.line));
            }
        }
    }
}

}  // namespace hq
