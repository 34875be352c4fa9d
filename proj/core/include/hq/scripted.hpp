#ifndef HQ_SCRIPTED_HPP
#define HQ_SCRIPTED_HPP

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hq/agent.hpp"
#include "hq/pipeline.hpp"
#include "hq/probing.hpp"

namespace hq {

/* Replay backends driven by a canned script.  Scripts are keyed by the
 * work item (agent name and context, binary path, build context) rather
 * than by global call order, so runs stay deterministic when several
 * workers interleave. */

/* Script shape:
 * {"agents": {"logic_group": {"<context>": [
 *   {"text": "...", "calls": [{"tool": "...", "args": {...}}]}, ...]}}}
 */
class ScriptedModel : public ModelBackend {
public:
    explicit ScriptedModel(const nlohmann::json& script);
    static std::unique_ptr<ScriptedModel> from_file(const std::string& path);

    ModelReply complete(const ModelRequest& request) override;

private:
    std::map<std::string, std::vector<nlohmann::json>> turns_;
    std::map<std::string, std::size_t> cursor_;
    std::mutex mu_;
};

/* Script shape, per binary path:
 * {"binaries": {"<path>": {
 *   "reach": [{"hit": true, "called_functions": [...]}, ...],
 *   "run": [{"crashed": true, "trace": "...", "exit_status": 1}, ...],
 *   "fuzz": {"crashed": false, "exit_status": 0},
 *   "coverage": {"line": 0.5, "branch": 0.4, "edges": 120, "entry_reached": true}}}}
 *
 * Reach and run entries are queues consumed in order; fuzz and coverage are
 * fixed answers.  Queue state is shared across clones so a worker keeps its
 * place after rebinding. */
class ScriptedExecutor : public Executor {
public:
    explicit ScriptedExecutor(const nlohmann::json& script);
    static ScriptedExecutor from_file(const std::string& path);

    ReachResult reach_check(const ProbeSpec& spec) override;
    RunResult run_check(const ProbeSpec& spec) override;
    FuzzResult timed_fuzz(int budget_seconds) override;
    CoverageResult coverage() override;

    /* A facade over the same queues, for one worker or one rebound binary. */
    std::unique_ptr<Executor> clone() const;

private:
    struct BinaryScript {
        std::vector<nlohmann::json> reach;
        std::vector<nlohmann::json> run;
        std::size_t reach_next = 0;
        std::size_t run_next = 0;
        nlohmann::json fuzz;
        nlohmann::json coverage;
    };
    struct Shared {
        std::map<std::string, BinaryScript> binaries;
        std::mutex mu;
    };

    explicit ScriptedExecutor(std::shared_ptr<Shared> shared) : shared_(std::move(shared)) {}

    BinaryScript& script_at(const std::string& binary);

    std::shared_ptr<Shared> shared_;
};

/* Script shape:
 * {"builds": {"<context>": [
 *   {"result": "success", "binary": "out/h1"},
 *   {"result": "compile_error", "tail": "error: ..."}, ...]}}
 */
class ScriptedBuilder : public Builder {
public:
    explicit ScriptedBuilder(const nlohmann::json& script);
    static ScriptedBuilder from_file(const std::string& path);

    void bind_context(const std::string& key) override { context_ = key; }
    BuildResult build(const std::string& source) override;

    /* Shares queue positions with this instance, for per-worker facades. */
    std::unique_ptr<Builder> clone() const;

private:
    struct Shared {
        std::map<std::string, std::vector<nlohmann::json>> builds;
        std::map<std::string, std::size_t> cursor;
        std::mutex mu;
    };

    explicit ScriptedBuilder(std::shared_ptr<Shared> shared) : shared_(std::move(shared)) {}

    std::shared_ptr<Shared> shared_;
    std::string context_;
};

}  // namespace hq

#endif
