#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"

#ifndef HQ_CLI_PATH
#error "HQ_CLI_PATH must point at the CLI binary"
#endif
#ifndef HQ_SCRATCH_DIR
#error "HQ_SCRATCH_DIR must point at a writable scratch directory"
#endif

namespace {

namespace fs = std::filesystem;

/* Runs the CLI through the shell and returns its exit code. */
int run_cli(const std::string& args) {
    const std::string cmd = std::string(HQ_CLI_PATH) + " " + args;
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(HQ_SCRATCH_DIR) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

std::string quoted_graph() { return fixtures::path("toy_callgraph.json"); }

}  // namespace

TEST_CASE("graph queries answer from a call graph file") {
    const fs::path dir = scratch("cli_graph");

    SUBCASE("callers") {
        const fs::path out = dir / "callers.json";
        CHECK(run_cli("graph --graph " + quoted_graph() +
                      " --query callers --symbol buf_grow --out " + out.string()) == 0);
        const nlohmann::json doc = read_json(out);
        CHECK(doc["callers"] ==
              nlohmann::json({"emit_node", "resolve_anchor", "scan_token"}));
    }

    SUBCASE("reach respects the depth flag") {
        const fs::path out = dir / "reach.json";
        CHECK(run_cli("graph --graph " + quoted_graph() +
                      " --query reach --symbol yaml_load --depth 1 --out " + out.string()) == 0);
        const nlohmann::json doc = read_json(out);
        CHECK(doc["reach"] == nlohmann::json({{"parse_document", 1}}));
        CHECK(doc["depth"] == 1);
    }

    SUBCASE("entries are ordered by distance then id") {
        const fs::path out = dir / "entries.json";
        CHECK(run_cli("graph --graph " + quoted_graph() +
                      " --query entries --symbol buf_grow --out " + out.string()) == 0);
        const nlohmann::json entries = read_json(out)["entries"];
        REQUIRE(entries.size() == 3);
        CHECK(entries[0] == nlohmann::json({{"id", "yaml_emit"}, {"distance", 2}}));
        CHECK(entries[1] == nlohmann::json({{"id", "yaml_scan"}, {"distance", 2}}));
        CHECK(entries[2] == nlohmann::json({{"id", "yaml_load"}, {"distance", 3}}));
    }

    SUBCASE("an unknown symbol is bad input") {
        CHECK(run_cli("graph --graph " + quoted_graph() +
                      " --query callers --symbol no_such_fn --out /dev/null 2>/dev/null") == 2);
    }

    SUBCASE("an unknown query is bad input") {
        CHECK(run_cli("graph --graph " + quoted_graph() +
                      " --query sideways --symbol buf_grow --out /dev/null 2>/dev/null") == 2);
    }

    SUBCASE("a missing required flag is bad input") {
        CHECK(run_cli("graph --graph " + quoted_graph() + " 2>/dev/null") == 2);
    }
}

TEST_CASE("rank emits the danger report and the horizon sweep") {
    const fs::path dir = scratch("cli_rank");

    SUBCASE("toy ranking") {
        const fs::path out = dir / "rank.json";
        CHECK(run_cli("rank --graph " + quoted_graph() + " --lgs " +
                      fixtures::path("toy_lgs.json") + " --out " + out.string()) == 0);
        const nlohmann::json report = read_json(out)["report"];
        CHECK(report["depth"] == 20);
        CHECK(report["functions"][0]["id"] == "scan_token");
        CHECK(report["functions"][0]["score"] == 12.0);
        CHECK(report["logic_groups"][0]["name"] == "token-scanning");
        CHECK(report["logic_groups"][0]["rank"] == 1);
    }

    SUBCASE("sweep against the default reference depth") {
        const fs::path out = dir / "sweep.json";
        CHECK(run_cli("rank --graph " + fixtures::path("sweep_callgraph.json") + " --lgs " +
                      fixtures::path("sweep_lgs.json") +
                      " --sweep 10 15 20 25 30 --out " + out.string()) == 0);
        const nlohmann::json sweep = read_json(out)["sweep"];
        CHECK(sweep["reference_depth"] == 20);
        REQUIRE(sweep["depths"].size() == 5);
        CHECK(std::abs(sweep["depths"][0]["rho_vs_reference"].get<double>() - 0.9) < 1e-9);
        for (std::size_t i = 1; i < 5; ++i) {
            CHECK(sweep["depths"][i]["rho_vs_reference"] == 1.0);
        }
    }

    SUBCASE("a reference outside the sweep is bad input") {
        CHECK(run_cli("rank --graph " + fixtures::path("sweep_callgraph.json") + " --lgs " +
                      fixtures::path("sweep_lgs.json") +
                      " --sweep 10 15 --reference 20 --out /dev/null 2>/dev/null") == 2);
    }
}

TEST_CASE("probe replays specs against a bound binary and gates the result") {
    const fs::path dir = scratch("cli_probe");
    const nlohmann::json config = {
        {"executor", {{"type", "scripted"}, {"path", fixtures::path("probe_executor.json")}}},
        {"binary", "bin/probe_target"},
        {"harness_files", {"harness.c"}},
        {"budget_s", 5},
    };
    write_text(dir / "config.json", config.dump(2));

    SUBCASE("a healthy target passes the gate") {
        const fs::path out = dir / "probes.jsonl";
        CHECK(run_cli("probe --config " + (dir / "config.json").string() + " --specs " +
                      fixtures::path("probe_specs.json") + " --out " + out.string()) == 0);

        std::ifstream in(out);
        std::vector<nlohmann::json> lines;
        for (std::string line; std::getline(in, line);) {
            lines.push_back(nlohmann::json::parse(line));
        }
        REQUIRE(lines.size() == 4);
        CHECK(lines[0]["spec"]["subcheck"] == "P1.5");
        CHECK(lines[0]["triage"] == "pass");
        CHECK(lines[1]["spec"]["subcheck"] == "P1.4");
        CHECK(lines[1]["triage"] == "pass");
        CHECK(lines[2]["event"] == "timed_run");
        CHECK(lines[3]["event"] == "gate");
        CHECK(lines[3]["accepted"] == true);
    }

    SUBCASE("zero branch coverage is a finding") {
        const fs::path out = dir / "bad.jsonl";
        CHECK(run_cli("probe --config " + (dir / "config.json").string() + " --specs " +
                      fixtures::path("probe_specs.json") + " --binary bin/probe_bad --out " +
                      out.string()) == 1);

        std::ifstream in(out);
        std::string last, line;
        while (std::getline(in, line)) {
            if (!line.empty()) last = line;
        }
        const nlohmann::json gate = nlohmann::json::parse(last);
        CHECK(gate["accepted"] == false);
        CHECK(gate["reason"] == "zero branch coverage");
    }

    SUBCASE("a spec file holding an object is bad input") {
        write_text(dir / "object.json", "{}");
        CHECK(run_cli("probe --config " + (dir / "config.json").string() + " --specs " +
                      (dir / "object.json").string() + " 2>/dev/null") == 2);
    }
}

TEST_CASE("audit exit codes separate confirmed findings from false alarms") {
    const fs::path dir = scratch("cli_audit");

    SUBCASE("a confirmed violation is a finding") {
        const nlohmann::json config = {
            {"harness_source_file", fixtures::path("audit_harness.c")},
            {"binary", "bin/audit_orig"},
            {"budget_s", 5},
            {"metric", "edges"},
            {"harness_files", {"audit_harness.c"}},
            {"model",
             {{"backend", "scripted"}, {"path", fixtures::path("audit_confirm_model.json")}}},
            {"builder",
             {{"type", "scripted"}, {"path", fixtures::path("audit_confirm_builder.json")}}},
            {"executor",
             {{"type", "scripted"}, {"path", fixtures::path("audit_confirm_executor.json")}}},
        };
        write_text(dir / "confirm.json", config.dump(2));

        const fs::path out = dir / "confirm_record.json";
        CHECK(run_cli("audit --config " + (dir / "confirm.json").string() + " --out " +
                      out.string()) == 1);
        const nlohmann::json record = read_json(out);
        REQUIRE(record["violations"].size() == 1);
        CHECK(record["violations"][0]["subcheck"] == "P1.5");
        CHECK(record["violations"][0]["confirmed"] == true);
        CHECK(record["repairs_used"] == 1);
    }

    SUBCASE("an abandoned repair is reported but not a finding") {
        const nlohmann::json config = {
            {"harness_source_file", fixtures::path("audit_harness.c")},
            {"binary", "bin/audit_orig2"},
            {"budget_s", 5},
            {"metric", "edges"},
            {"context", "audit-abandon"},
            {"harness_files", {"audit_harness.c"}},
            {"model",
             {{"backend", "scripted"}, {"path", fixtures::path("audit_abandon_model.json")}}},
            {"builder",
             {{"type", "scripted"}, {"path", fixtures::path("audit_abandon_builder.json")}}},
            {"executor",
             {{"type", "scripted"}, {"path", fixtures::path("audit_abandon_executor.json")}}},
        };
        write_text(dir / "abandon.json", config.dump(2));

        const fs::path out = dir / "abandon_record.json";
        CHECK(run_cli("audit --config " + (dir / "abandon.json").string() + " --out " +
                      out.string()) == 0);
        const nlohmann::json record = read_json(out);
        REQUIRE(record["violations"].size() == 1);
        CHECK(record["violations"][0]["confirmed"] == false);
        CHECK(record["violations"][0]["self_declared_fp"] == true);
        CHECK(record["repairs_used"] == 5);
    }

    SUBCASE("a model override replaces the configured backend") {
        const nlohmann::json config = {
            {"harness_source_file", fixtures::path("audit_harness.c")},
            {"binary", "bin/audit_orig"},
            {"budget_s", 5},
            {"harness_files", {"audit_harness.c"}},
            {"builder",
             {{"type", "scripted"}, {"path", fixtures::path("audit_confirm_builder.json")}}},
            {"executor",
             {{"type", "scripted"}, {"path", fixtures::path("audit_confirm_executor.json")}}},
        };
        write_text(dir / "override.json", config.dump(2));
        CHECK(run_cli("audit --config " + (dir / "override.json").string() +
                      " --model scripted:" + fixtures::path("audit_confirm_model.json") +
                      " --out /dev/null") == 1);
    }
}

TEST_CASE("eval subcommands compute the comparison metrics") {
    const fs::path dir = scratch("cli_eval");

    SUBCASE("match modes against gold targets") {
        const fs::path out = dir / "match.json";
        CHECK(run_cli("eval match --graph " + quoted_graph() + " --cases " +
                      fixtures::path("eval_cases.json") + " --out " + out.string()) == 0);
        const nlohmann::json doc = read_json(out);
        CHECK(doc["summary"] ==
              nlohmann::json({{"direct", 3}, {"wrapper", 4}, {"none", 3}}));
        CHECK(doc["cases"].size() == 10);
        CHECK(doc["cases"][3]["mode"] == "wrapper");
    }

    SUBCASE("coverage metrics") {
        const fs::path out = dir / "metrics.json";
        CHECK(run_cli("eval metrics --cases " + fixtures::path("metrics_cases.json") +
                      " --out " + out.string()) == 0);
        const nlohmann::json doc = read_json(out);
        CHECK(doc["productive"] == 2);
        CHECK(doc["total"] == 4);
        CHECK(doc["rate"] == 0.5);
        CHECK(std::abs(doc["mean_line"].get<double>() - 0.175) < 1e-12);
        CHECK(std::abs(doc["mean_branch"].get<double>() - 0.1) < 1e-12);
        /* Medians cover only the cases that built: lines 0.5, 0.0, 0.2. */
        CHECK(std::abs(doc["median_line_built"].get<double>() - 0.2) < 1e-12);
    }

    SUBCASE("rank correlation") {
        write_text(dir / "orders.json",
                   nlohmann::json{{"a", {"v", "w", "x", "y", "z"}},
                                  {"b", {"v", "x", "w", "y", "z"}}}
                       .dump());
        const fs::path out = dir / "rho.json";
        CHECK(run_cli("eval spearman --orders " + (dir / "orders.json").string() + " --out " +
                      out.string()) == 0);
        CHECK(std::abs(read_json(out)["rho"].get<double>() - 0.9) < 1e-9);
    }

    SUBCASE("orderings that are not permutations are bad input") {
        write_text(dir / "mismatch.json",
                   nlohmann::json{{"a", {"v", "w"}}, {"b", {"v", "x"}}}.dump());
        CHECK(run_cli("eval spearman --orders " + (dir / "mismatch.json").string() +
                      " 2>/dev/null") == 2);
    }
}

TEST_CASE("malformed JSON input is reported as bad input") {
    const fs::path dir = scratch("cli_malformed");
    write_text(dir / "broken.json", "{ this is not json");
    CHECK(run_cli("graph --graph " + (dir / "broken.json").string() +
                  " --query callers --symbol x 2>/dev/null") == 2);
}

TEST_CASE("pipeline writes an index and one record per selected group") {
    const fs::path dir = scratch("cli_pipeline");
    const nlohmann::json config = {
        {"project", "toy"},
        {"project_root", fixtures::path("toyproj")},
        {"call_graph", fixtures::path("toy_callgraph.json")},
        {"harness_files", {"harness.c"}},
        {"model", {{"backend", "scripted"}, {"path", fixtures::path("pipeline_model.json")}}},
        {"builder", {{"type", "scripted"}, {"path", fixtures::path("pipeline_builder.json")}}},
        {"executor",
         {{"type", "scripted"}, {"path", fixtures::path("pipeline_executor.json")}}},
    };
    write_text(dir / "config.json", config.dump(2));

    const std::string cmd = "cd " + dir.string() + " && " + HQ_CLI_PATH +
                            " pipeline --config config.json --workers 2 --out runs" +
                            " > stdout.txt";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);

    const nlohmann::json index = read_json(dir / "runs" / "index.json");
    CHECK(index["project"] == "toy");
    CHECK(index["selected"] == 5);
    CHECK(index["invalid_candidates"].size() == 2);
    REQUIRE(index["records"].size() == 5);
    for (const auto& row : index["records"]) {
        CHECK(row["completed"] == true);
        CHECK(row["gate_accepted"] == true);
        const fs::path record_path = dir / row["file"].get<std::string>();
        CHECK(fs::exists(record_path));
        const nlohmann::json record = read_json(record_path);
        CHECK(record["gate"]["accepted"] == true);
        CHECK(record["principles"]["accepted"] == true);
    }

    std::ifstream echoed(dir / "stdout.txt");
    std::string line;
    std::getline(echoed, line);
    CHECK(line == "runs/index.json");
}
