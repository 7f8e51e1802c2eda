#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "dana/creator.hpp"
#include "dana/htp.hpp"
#include "dana/knowledge.hpp"
#include "dana/lm.hpp"
#include "dana/program_store.hpp"
#include "dana/resources.hpp"

#include <nlohmann/json_fwd.hpp>

namespace dana {

enum class OodaPhase { observe, orient, decide, act };

std::string phase_name(OodaPhase phase);

struct OodaStep {
    OodaPhase phase = OodaPhase::observe;
    std::string input_digest;
    std::string output;
    int backend_calls = 0;
    // Wall-clock duration, recorded for inspection only; excluded from
    // equality and from the trace export so identical runs export
    // identical bytes.
    std::chrono::microseconds duration{0};

    bool operator==(const OodaStep& other) const {
        return phase == other.phase && input_digest == other.input_digest &&
               output == other.output && backend_calls == other.backend_calls;
    }
};

struct TaskResult {
    std::string task_id;
    std::string answer;
    bool confident = false;
    std::vector<OodaStep> steps;  // (observe, orient, decide, act)+
    int expansions = 0;

    bool operator==(const TaskResult&) const = default;
};

enum class ProgramSource { found, created };

struct Solution {
    std::string problem;
    std::string answer;
    Htp plan;  // final, post-expansion
    std::vector<TaskResult> trace;  // post_order(plan), one result per node
    ProgramSource program_source = ProgramSource::created;
    // Backend calls spent before execution (finder stage 2 + creator), so the
    // call-accounting identity is checkable from the Solution alone.
    int program_search_backend_calls = 0;
};

struct SolverConfig {
    FinderConfig finder;
    CreatorConfig creator;
    int observe_k = 5;
    int max_expansions = 1;     // per original leaf
    int verdict_retries = 2;    // extra Decide attempts on a malformed verdict
    std::size_t knowledge_char_budget = kDefaultKnowledgeCharBudget;
    bool parallel_siblings = false;
};

struct ExecutionResult {
    std::string answer;
    Htp final_plan;
    std::vector<TaskResult> trace;
};

// Result of one task's OODA loop, including any sub-tasks it grafted.
struct TaskExecution {
    TaskNode final_node;                 // node with post-expansion children
    TaskResult result;                   // this node's own result
    std::vector<TaskResult> trace;       // post-order over final_node's subtree
    std::string answer;
};

// Full pipeline: find_program, else create_program, then execute.
Solution solve(const std::string& problem, const KnowledgeStore& knowledge,
               const ProgramStore& programs, const ResourceSet& resources, LmBackend& backend,
               const SolverConfig& config = {});

// Executes nodes in post order; every parent consolidates its children's
// answers through the same OODA loop. Throws ExecutionError naming the task
// that failed.
ExecutionResult execute_htp(const Htp& plan, const ResourceSet& resources,
                            const KnowledgeStore& knowledge, LmBackend& backend,
                            const SolverConfig& config = {});

// One task's loop. Observe gathers passages and child answers (no backend
// call); Orient is one analysis call; Decide is one constrained-verdict call
// (CONFIDENT/UNCONFIDENT + candidate answer); Act commits the answer or, for
// an unconfident original leaf with expansion budget and depth headroom,
// decomposes, grafts and re-runs the loop with the sub-answers.
TaskExecution execute_task(const TaskNode& task,
                           const std::vector<std::pair<std::string, std::string>>& child_answers,
                           const ResourceSet& resources, const KnowledgeStore& knowledge,
                           LmBackend& backend, const SolverConfig& config = {});

nlohmann::ordered_json solution_to_json(const Solution& solution);
void write_trace(const Solution& solution, const std::filesystem::path& path);

}  // namespace dana
