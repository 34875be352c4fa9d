#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hq/audit.hpp"
#include "hq/callgraph.hpp"
#include "hq/danger.hpp"
#include "hq/errors.hpp"
#include "hq/evalkit.hpp"
#include "hq/http_model.hpp"
#include "hq/pipeline.hpp"
#include "hq/probing.hpp"
#include "hq/scripted.hpp"
#include "hq/unsafe.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitEnvironment = 3;

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hq::ConfigError("cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw hq::SchemaError("malformed JSON in " + path + ": " + e.what());
    }
    return doc;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hq::ConfigError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw hq::ConfigError("cannot write " + out_path);
    out << text;
}

hq::UnsafeProfile profile_from(const nlohmann::json& doc) {
    hq::UnsafeProfile profile = hq::default_unsafe_profile();
    if (!doc.is_object()) return profile;
    if (doc.contains("patterns") && doc["patterns"].is_array()) {
        profile.patterns.clear();
        for (const auto& p : doc["patterns"]) profile.patterns.push_back(p.get<std::string>());
    }
    if (doc.contains("per_function") && doc["per_function"].is_object()) {
        for (const auto& [name, count] : doc["per_function"].items()) {
            profile.per_function[name] = count.get<int>();
        }
    }
    return profile;
}

std::vector<hq::LogicGroup> lgs_from(const nlohmann::json& doc) {
    if (!doc.is_array()) throw hq::SchemaError("logic group file must hold an array");
    std::vector<hq::LogicGroup> lgs;
    for (const auto& entry : doc) lgs.push_back(hq::lg_from_json(entry));
    return lgs;
}

std::unique_ptr<hq::ModelBackend> make_model(const nlohmann::json& spec,
                                             const std::string& override_spec) {
    if (!override_spec.empty()) {
        if (override_spec.rfind("scripted:", 0) == 0) {
            return hq::ScriptedModel::from_file(override_spec.substr(9));
        }
        if (override_spec.rfind("http:", 0) == 0) {
            hq::HttpModelOptions options;
            std::string rest = override_spec.substr(5);
            if (auto comma = rest.find(','); comma != std::string::npos) {
                options.model = rest.substr(comma + 1);
                rest = rest.substr(0, comma);
            }
            options.base_url = rest.rfind("http://", 0) == 0 ? rest : "http://" + rest;
            return std::make_unique<hq::HttpModel>(options);
        }
        throw hq::ConfigError("model override must look like scripted:<path> or http:<url>");
    }
    if (!spec.is_object() || !spec.contains("backend")) {
        throw hq::ConfigError("config needs a model backend (or pass --model)");
    }
    const std::string backend = spec["backend"].get<std::string>();
    if (backend == "scripted") {
        return hq::ScriptedModel::from_file(spec.at("path").get<std::string>());
    }
    if (backend == "http") {
        hq::HttpModelOptions options;
        options.base_url = spec.value("base_url", options.base_url);
        options.model = spec.value("model", options.model);
        options.key_env = spec.value("key_env", options.key_env);
        options.path = spec.value("path", options.path);
        options.timeout_s = spec.value("timeout_s", options.timeout_s);
        return std::make_unique<hq::HttpModel>(options);
    }
    throw hq::ConfigError("unknown model backend: " + backend);
}

hq::ExecutorCommands commands_from(const nlohmann::json& spec) {
    hq::ExecutorCommands commands;
    commands.reach_cmd = spec.value("reach_cmd", "");
    commands.run_cmd = spec.value("run_cmd", "");
    commands.coverage_cmd = spec.value("coverage_cmd", "");
    commands.breakpoint_symbol = spec.value("breakpoint_symbol", "");
    commands.timeout_s = spec.value("timeout_s", 600);
    return commands;
}

hq::ExecutorFactory make_executor_factory(const nlohmann::json& spec) {
    if (!spec.is_object() || !spec.contains("type")) {
        throw hq::ConfigError("config needs an executor");
    }
    const std::string type = spec["type"].get<std::string>();
    if (type == "scripted") {
        auto master = std::make_shared<hq::ScriptedExecutor>(
            hq::ScriptedExecutor::from_file(spec.at("path").get<std::string>()));
        return [master] { return master->clone(); };
    }
    if (type == "command") {
        const hq::ExecutorCommands commands = commands_from(spec);
        return [commands] {
            return std::unique_ptr<hq::Executor>(new hq::CommandExecutor(commands));
        };
    }
    throw hq::ConfigError("unknown executor type: " + type);
}

hq::BuilderFactory make_builder_factory(const nlohmann::json& spec) {
    if (!spec.is_object() || !spec.contains("type")) {
        throw hq::ConfigError("config needs a builder");
    }
    const std::string type = spec["type"].get<std::string>();
    if (type == "scripted") {
        auto master = std::make_shared<hq::ScriptedBuilder>(
            hq::ScriptedBuilder::from_file(spec.at("path").get<std::string>()));
        return [master] { return master->clone(); };
    }
    if (type == "command") {
        const std::string cmd = spec.at("build_cmd").get<std::string>();
        const std::string out_dir = spec.value("out_dir", "harness_builds");
        return [cmd, out_dir] {
            return std::unique_ptr<hq::Builder>(new hq::CommandBuilder(cmd, out_dir));
        };
    }
    throw hq::ConfigError("unknown builder type: " + type);
}

std::vector<std::string> harness_files_from(const nlohmann::json& config) {
    std::vector<std::string> files;
    for (const auto& f : config.value("harness_files", nlohmann::json::array())) {
        files.push_back(f.get<std::string>());
    }
    if (files.empty()) files.push_back("harness");
    return files;
}

struct GraphArgs {
    std::string graph_path;
    std::string query;
    std::string symbol;
    int depth = 20;
    std::string out;
};

int cmd_graph(const GraphArgs& args) {
    const hq::CallGraph g = hq::CallGraph::from_json(read_json_file(args.graph_path));
    const std::vector<std::string> ids = g.resolve_symbol(args.symbol);
    if (ids.empty()) throw hq::UnknownFunctionError("unknown symbol: " + args.symbol);

    nlohmann::json out = {{"symbol", args.symbol}, {"ids", ids}};
    if (args.query == "callers") {
        std::set<std::string> merged;
        for (const auto& id : ids) {
            const auto& c = g.callers_of(id);
            merged.insert(c.begin(), c.end());
        }
        out["callers"] = std::vector<std::string>(merged.begin(), merged.end());
    } else if (args.query == "callees") {
        std::set<std::string> merged;
        for (const auto& id : ids) {
            const auto& c = g.callees_of(id);
            merged.insert(c.begin(), c.end());
        }
        out["callees"] = std::vector<std::string>(merged.begin(), merged.end());
    } else if (args.query == "reach") {
        nlohmann::json reach = nlohmann::json::object();
        for (const auto& [id, dist] : g.forward_reach(ids.front(), args.depth)) {
            reach[id] = dist;
        }
        out["reach"] = std::move(reach);
        out["depth"] = args.depth;
    } else if (args.query == "rreach") {
        nlohmann::json reach = nlohmann::json::object();
        for (const auto& [id, info] : g.reverse_reach(ids.front(), args.depth)) {
            reach[id] = {{"distance", info.distance}, {"visibility", to_string(info.visibility)}};
        }
        out["reverse_reach"] = std::move(reach);
        out["depth"] = args.depth;
    } else if (args.query == "entries") {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& entry : g.public_entries_for(ids.front(), args.depth)) {
            entries.push_back({{"id", entry.id}, {"distance", entry.distance}});
        }
        out["entries"] = std::move(entries);
        out["depth"] = args.depth;
    } else {
        throw hq::ConfigError("unknown query: " + args.query);
    }
    emit(args.out, out.dump(2) + "\n");
    return kExitOk;
}

struct RankArgs {
    std::string graph_path;
    std::string lgs_path;
    std::string unsafe_path;
    int depth = 20;
    std::vector<int> sweep;
    int reference = 20;
    std::string out;
};

int cmd_rank(const RankArgs& args) {
    const hq::CallGraph g = hq::CallGraph::from_json(read_json_file(args.graph_path));
    const hq::UnsafeProfile profile =
        args.unsafe_path.empty() ? hq::default_unsafe_profile()
                                 : profile_from(read_json_file(args.unsafe_path));
    std::vector<hq::LogicGroup> lgs;
    if (!args.lgs_path.empty()) lgs = lgs_from(read_json_file(args.lgs_path));

    nlohmann::json out = {{"report", to_json(hq::danger_report(g, lgs, args.depth, profile))}};
    if (!args.sweep.empty()) {
        out["sweep"] =
            to_json(hq::sensitivity_sweep(g, lgs, args.sweep, profile, args.reference));
    }
    emit(args.out, out.dump(2) + "\n");
    return kExitOk;
}

struct ProbeArgs {
    std::string config_path;
    std::string specs_path;
    std::string binary;
    std::string out;
};

int cmd_probe(const ProbeArgs& args) {
    const nlohmann::json config = read_json_file(args.config_path);
    hq::ExecutorFactory factory =
        make_executor_factory(config.value("executor", nlohmann::json::object()));
    std::unique_ptr<hq::Executor> executor = factory();
    const hq::FrameCrashJudge judge(harness_files_from(config));

    const std::string binary = !args.binary.empty() ? args.binary : config.value("binary", "");
    if (binary.empty()) throw hq::ConfigError("no binary given (config or --binary)");
    executor->bind_binary(binary);

    std::vector<hq::ProbeSpec> specs;
    const nlohmann::json spec_doc = read_json_file(args.specs_path);
    if (!spec_doc.is_array()) throw hq::SchemaError("probe spec file must hold an array");
    for (const auto& entry : spec_doc) specs.push_back(hq::probe_spec_from_json(entry));

    const hq::CycleResult cycle =
        hq::run_gate_cycle(specs, *executor, judge, config.value("budget_s", 60));

    std::ostringstream lines;
    for (std::size_t i = 0; i < cycle.outcomes.size(); ++i) {
        lines << hq::probe_log_entry(cycle.outcomes[i], cycle.triages[i]).dump() << "\n";
    }
    hq::GateDecision gate{false, "probe triage reported harness-side failures"};
    if (cycle.coverage) {
        lines << nlohmann::json{{"event", "timed_run"},
                                {"crashed", cycle.fuzz && cycle.fuzz->crashed},
                                {"coverage", to_json(*cycle.coverage)}}
                     .dump()
              << "\n";
        gate = hq::submission_gate(cycle.coverage->line, cycle.coverage->branch,
                                   cycle.coverage->entry_reached, true);
    }
    lines << nlohmann::json{{"event", "gate"},
                            {"accepted", gate.accepted},
                            {"reason", gate.reason}}
                 .dump()
          << "\n";
    emit(args.out, lines.str());
    return gate.accepted ? kExitOk : kExitFindings;
}

struct AuditArgs {
    std::string config_path;
    std::string model_override;
    std::string out;
};

int cmd_audit(const AuditArgs& args) {
    const nlohmann::json config = read_json_file(args.config_path);

    hq::AuditConfig audit_config;
    if (config.contains("harness_source_file")) {
        audit_config.harness_source =
            read_text_file(config["harness_source_file"].get<std::string>());
    } else {
        audit_config.harness_source = config.value("harness_source", "");
    }
    audit_config.binary = config.value("binary", "");
    if (audit_config.binary.empty()) throw hq::ConfigError("audit config needs a binary");
    audit_config.budget_s = config.value("budget_s", 60);
    audit_config.repair_cap = config.value("repair_cap", 5);
    audit_config.metric = config.value("metric", "edges");
    audit_config.context = config.value("context", "audit");

    std::unique_ptr<hq::ModelBackend> model =
        make_model(config.value("model", nlohmann::json::object()), args.model_override);
    std::unique_ptr<hq::Builder> builder =
        make_builder_factory(config.value("builder", nlohmann::json::object()))();
    std::unique_ptr<hq::Executor> executor =
        make_executor_factory(config.value("executor", nlohmann::json::object()))();
    const hq::FrameCrashJudge judge(harness_files_from(config));

    const hq::AuditRecord record =
        hq::audit_harness(audit_config, *model, *builder, *executor, judge);
    emit(args.out, to_json(record).dump(2) + "\n");

    for (const auto& v : record.violations) {
        if (v.confirmed) return kExitFindings;
    }
    return kExitOk;
}

struct PipelineArgs {
    std::string config_path;
    std::string model_override;
    int workers = 10;
    std::string out_dir = "runs";
};

int cmd_pipeline(const PipelineArgs& args) {
    const nlohmann::json config = read_json_file(args.config_path);

    hq::PipelineConfig pc;
    pc.project_name = config.value("project", "project");
    pc.project_root = config.value("project_root", ".");
    pc.depth = config.value("depth", 20);
    pc.top_k = config.value("top_k", 5);
    pc.build_cap = config.value("build_cap", 5);
    pc.stage4_budget_s = config.value("stage4_budget_s", 600);
    pc.audit_budget_s = config.value("audit_budget_s", 60);
    pc.audit_metric = config.value("metric", "edges");
    pc.profile = profile_from(config.value("unsafe", nlohmann::json::object()));
    if (config.contains("existing_lgs")) pc.existing = lgs_from(config["existing_lgs"]);

    const hq::CallGraph g =
        hq::CallGraph::from_json(read_json_file(config.at("call_graph").get<std::string>()));
    std::unique_ptr<hq::ModelBackend> model =
        make_model(config.value("model", nlohmann::json::object()), args.model_override);
    hq::BuilderFactory builders =
        make_builder_factory(config.value("builder", nlohmann::json::object()));
    hq::ExecutorFactory executors =
        make_executor_factory(config.value("executor", nlohmann::json::object()));
    const hq::FrameCrashJudge judge(harness_files_from(config));

    const hq::ProjectRunResult result =
        hq::run_project_pipeline(pc, g, *model, builders, executors, judge, args.workers);

    nlohmann::json index_records = nlohmann::json::array();
    for (const auto& record : result.records) {
        const std::string path = hq::write_run_record(record, args.out_dir);
        index_records.push_back({{"file", path},
                                 {"logic_group", record.lg.name},
                                 {"rank", record.rank},
                                 {"score", record.score},
                                 {"completed", record.completed},
                                 {"gate_accepted", record.gate.accepted}});
    }
    nlohmann::json index = {
        {"project", pc.project_name},
        {"selected", index_records.size()},
        {"invalid_candidates", result.discovery.invalid},
        {"records", std::move(index_records)},
    };
    const std::string index_path = args.out_dir + "/index.json";
    emit(index_path, index.dump(2) + "\n");
    std::cout << index_path << "\n";
    return kExitOk;
}

struct EvalMatchArgs {
    std::string graph_path;
    std::string cases_path;
    std::string out;
};

int cmd_eval_match(const EvalMatchArgs& args) {
    const hq::CallGraph g = hq::CallGraph::from_json(read_json_file(args.graph_path));
    const nlohmann::json cases = read_json_file(args.cases_path);
    if (!cases.is_array()) throw hq::SchemaError("cases file must hold an array");

    int direct = 0, wrapper = 0, none = 0;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& entry : cases) {
        std::vector<std::string> entries;
        for (const auto& e : entry.value("entries", nlohmann::json::array())) {
            entries.push_back(e.get<std::string>());
        }
        const std::string gold = entry.at("gold").get<std::string>();
        const hq::MatchVerdict verdict = hq::lg_matches_gold(g, entries, gold);
        switch (verdict.mode) {
        case hq::MatchMode::DIRECT: ++direct; break;
        case hq::MatchMode::WRAPPER: ++wrapper; break;
        case hq::MatchMode::NONE: ++none; break;
        }
        rows.push_back({{"entries", entries},
                        {"gold", gold},
                        {"matched", verdict.matched},
                        {"mode", to_string(verdict.mode)}});
    }
    nlohmann::json out = {
        {"cases", std::move(rows)},
        {"summary", {{"direct", direct}, {"wrapper", wrapper}, {"none", none}}},
    };
    emit(args.out, out.dump(2) + "\n");
    return kExitOk;
}

struct EvalMetricsArgs {
    std::string cases_path;
    std::string out;
};

int cmd_eval_metrics(const EvalMetricsArgs& args) {
    const nlohmann::json doc = read_json_file(args.cases_path);
    if (!doc.is_array()) throw hq::SchemaError("metrics file must hold an array");
    std::vector<hq::EvalCase> cases;
    std::vector<double> lines, branches;
    for (const auto& entry : doc) {
        hq::EvalCase c;
        c.built = entry.value("built", false);
        c.line = entry.value("line", 0.0);
        c.branch = entry.value("branch", 0.0);
        cases.push_back(c);
        if (c.built) {
            lines.push_back(c.line);
            branches.push_back(c.branch);
        }
    }
    const auto [productive, total] = hq::productive_rate(cases);
    const hq::CoverageMeans means = hq::mean_coverage(cases);
    nlohmann::json out = {
        {"productive", productive},
        {"total", total},
        {"rate", total == 0 ? 0.0 : static_cast<double>(productive) / total},
        {"mean_line", means.mean_line},
        {"mean_branch", means.mean_branch},
    };
    if (!lines.empty()) {
        out["median_line_built"] = hq::median(lines);
        out["median_branch_built"] = hq::median(branches);
    }
    emit(args.out, out.dump(2) + "\n");
    return kExitOk;
}

struct EvalSpearmanArgs {
    std::string orders_path;
    std::string out;
};

int cmd_eval_spearman(const EvalSpearmanArgs& args) {
    const nlohmann::json doc = read_json_file(args.orders_path);
    std::vector<std::string> a, b;
    for (const auto& item : doc.at("a")) a.push_back(item.get<std::string>());
    for (const auto& item : doc.at("b")) b.push_back(item.get<std::string>());
    const double rho = hq::spearman_rho(a, b);
    emit(args.out, nlohmann::json{{"rho", rho}}.dump(2) + "\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fuzz harness quality toolkit"};
    app.require_subcommand(1);

    GraphArgs graph_args;
    CLI::App* graph = app.add_subcommand("graph", "query a call graph");
    graph->add_option("--graph", graph_args.graph_path, "call graph JSON")->required();
    graph->add_option("--query", graph_args.query,
                      "callers, callees, reach, rreach, or entries")
        ->required();
    graph->add_option("--symbol", graph_args.symbol, "id, name, or basename")->required();
    graph->add_option("--depth", graph_args.depth, "traversal depth");
    graph->add_option("--out", graph_args.out, "output path (stdout when omitted)");

    RankArgs rank_args;
    CLI::App* rank = app.add_subcommand("rank", "danger scores and group ranking");
    rank->add_option("--graph", rank_args.graph_path, "call graph JSON")->required();
    rank->add_option("--lgs", rank_args.lgs_path, "logic groups JSON array");
    rank->add_option("--unsafe", rank_args.unsafe_path, "unsafe profile JSON");
    rank->add_option("--depth", rank_args.depth, "reach horizon");
    rank->add_option("--sweep", rank_args.sweep, "depths for the sensitivity sweep");
    rank->add_option("--reference", rank_args.reference, "reference depth for the sweep");
    rank->add_option("--out", rank_args.out, "output path (stdout when omitted)");

    ProbeArgs probe_args;
    CLI::App* probe = app.add_subcommand("probe", "run probe specs against a binary");
    probe->add_option("--config", probe_args.config_path, "executor config JSON")->required();
    probe->add_option("--specs", probe_args.specs_path, "probe specs JSON array")->required();
    probe->add_option("--binary", probe_args.binary, "binary to bind (overrides config)");
    probe->add_option("--out", probe_args.out, "JSONL output path (stdout when omitted)");

    AuditArgs audit_args;
    CLI::App* audit = app.add_subcommand("audit", "audit an existing harness");
    audit->add_option("--config", audit_args.config_path, "audit config JSON")->required();
    audit->add_option("--model", audit_args.model_override,
                      "model override: scripted:<path> or http:<url>");
    audit->add_option("--out", audit_args.out, "record output path (stdout when omitted)");

    PipelineArgs pipeline_args;
    CLI::App* pipeline = app.add_subcommand("pipeline", "full discovery-to-harness run");
    pipeline->add_option("--config", pipeline_args.config_path, "pipeline config JSON")
        ->required();
    pipeline->add_option("--model", pipeline_args.model_override,
                         "model override: scripted:<path> or http:<url>");
    pipeline->add_option("--workers", pipeline_args.workers, "parallel group runs");
    pipeline->add_option("--out", pipeline_args.out_dir, "output directory for run records");

    CLI::App* eval = app.add_subcommand("eval", "evaluation utilities");
    eval->require_subcommand(1);
    EvalMatchArgs match_args;
    CLI::App* match = eval->add_subcommand("match", "compare entries against gold targets");
    match->add_option("--graph", match_args.graph_path, "call graph JSON")->required();
    match->add_option("--cases", match_args.cases_path, "match cases JSON")->required();
    match->add_option("--out", match_args.out, "output path (stdout when omitted)");
    EvalMetricsArgs metrics_args;
    CLI::App* metrics = eval->add_subcommand("metrics", "productive rate and coverage means");
    metrics->add_option("--cases", metrics_args.cases_path, "case results JSON")->required();
    metrics->add_option("--out", metrics_args.out, "output path (stdout when omitted)");
    EvalSpearmanArgs spearman_args;
    CLI::App* spearman = eval->add_subcommand("spearman", "rank correlation of two orderings");
    spearman->add_option("--orders", spearman_args.orders_path, "JSON with arrays a and b")
        ->required();
    spearman->add_option("--out", spearman_args.out, "output path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (graph->parsed()) return cmd_graph(graph_args);
        if (rank->parsed()) return cmd_rank(rank_args);
        if (probe->parsed()) return cmd_probe(probe_args);
        if (audit->parsed()) return cmd_audit(audit_args);
        if (pipeline->parsed()) return cmd_pipeline(pipeline_args);
        if (eval->parsed()) {
            if (match->parsed()) return cmd_eval_match(match_args);
            if (metrics->parsed()) return cmd_eval_metrics(metrics_args);
            if (spearman->parsed()) return cmd_eval_spearman(spearman_args);
        }
    } catch (const hq::ExecutorUnavailableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEnvironment;
    } catch (const hq::TurnCapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFindings;
    } catch (const hq::BuildCapExhaustedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFindings;
    } catch (const hq::NoViableCandidatesError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFindings;
    } catch (const hq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    return kExitBadInput;
}
