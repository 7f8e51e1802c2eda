#include "dana/ooda.hpp"

#include <fstream>
#include <future>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "dana/errors.hpp"
#include "dana/logging.hpp"
#include "dana/text.hpp"

namespace dana {

using nlohmann::ordered_json;

std::string phase_name(OodaPhase phase) {
    switch (phase) {
        case OodaPhase::observe: return "observe";
        case OodaPhase::orient: return "orient";
        case OodaPhase::decide: return "decide";
        case OodaPhase::act: return "act";
    }
    return "observe";
}

namespace {

constexpr const char* kOrientInstructions =
    "You are the analysis step of a task executor. Study the observations and knowledge "
    "below and produce a concise analysis of how to complete the task.";

constexpr const char* kDecideInstructions =
    "You are the decision step of a task executor. Reply with first line exactly "
    "CONFIDENT or UNCONFIDENT, followed by the best candidate answer on the next lines.";

struct ExecContext {
    const ResourceSet& resources;
    const KnowledgeStore& knowledge;
    LmBackend& backend;
    const SolverConfig& config;
    const std::unordered_set<std::string>& original_ids;
};

using ChildAnswers = std::vector<std::pair<std::string, std::string>>;

std::string render_child_answers(const ChildAnswers& child_answers) {
    std::string out;
    for (const auto& [task_id, answer] : child_answers) {
        if (!out.empty()) out += "\n";
        out += "[child:" + task_id + "] " + answer;
    }
    return out;
}

std::string render_observations(const std::vector<Passage>& passages,
                                const ChildAnswers& child_answers) {
    std::string out;
    for (const auto& passage : passages) {
        if (!out.empty()) out += "\n\n";
        out += "[doc:" + passage.doc_id + "#" + std::to_string(passage.index) + "] " + passage.text;
    }
    const std::string children = render_child_answers(child_answers);
    if (!children.empty()) {
        if (!out.empty()) out += "\n\n";
        out += children;
    }
    return out;
}

struct Verdict {
    bool confident = false;
    std::string candidate;
    int backend_calls = 0;
    std::string raw_reply;
    std::string verdict_line;
};

Verdict run_decide(const TaskNode& task, const std::string& analysis,
                   const std::string& observations, ExecContext& ctx) {
    std::string prompt = "Task:\n" + task.description + "\n\nAnalysis:\n" + analysis;
    if (!observations.empty()) prompt += "\n\nObservations:\n" + observations;

    LmRequest request;
    request.messages = {{Role::system, kDecideInstructions}, {Role::user, prompt}};

    Verdict verdict;
    const int attempts = 1 + std::max(0, ctx.config.verdict_retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        const LmResponse response = ctx.backend.complete(request);
        ++verdict.backend_calls;
        verdict.raw_reply = response.text;
        const auto lines = text::split_lines(response.text);
        verdict.verdict_line = lines.empty() ? "" : text::trim(lines.front());
        if (verdict.verdict_line == "CONFIDENT" || verdict.verdict_line == "UNCONFIDENT") {
            verdict.confident = verdict.verdict_line == "CONFIDENT";
            std::string candidate;
            for (std::size_t i = 1; i < lines.size(); ++i) {
                if (!candidate.empty()) candidate += "\n";
                candidate += lines[i];
            }
            verdict.candidate = text::trim(candidate);
            return verdict;
        }
        log::debug("decide verdict unparseable (attempt ", attempt + 1, "/", attempts, ")");
    }
    throw VerdictParseError("decide line is neither CONFIDENT nor UNCONFIDENT: '" +
                            verdict.verdict_line + "'");
}

std::string graft_child_id(const TaskNode& parent, int index,
                           const std::unordered_set<std::string>& taken) {
    while (true) {
        std::string candidate = parent.id + "." + std::to_string(index);
        if (!taken.count(candidate)) return candidate;
        ++index;
    }
}

TaskExecution run_task_loop(const TaskNode& node, int depth, ChildAnswers child_answers,
                            bool original_leaf, ExecContext& ctx);

TaskExecution exec_tree(const TaskNode& node, int depth, ExecContext& ctx);

// The OODA loop for one task. `node` already carries its final (executed)
// children when it is a consolidation parent.
TaskExecution run_task_loop(const TaskNode& node, int depth, ChildAnswers child_answers,
                            bool original_leaf, ExecContext& ctx) {
    TaskExecution exec;
    exec.final_node = node;
    TaskResult& result = exec.result;
    result.task_id = node.id;

    std::unordered_set<std::string> grafted_ids;
    std::vector<TaskResult> grafted_trace;

    try {
        while (true) {
            // Observe: symbolic gathering only, no backend involvement.
            auto observe_started = std::chrono::steady_clock::now();
            const auto passages = retrieve(ctx.resources, node.description, ctx.config.observe_k);
            const std::string observations = render_observations(passages, child_answers);
            OodaStep observe;
            observe.phase = OodaPhase::observe;
            observe.input_digest = node.description;
            const std::string children_digest = render_child_answers(child_answers);
            if (!children_digest.empty()) observe.input_digest += "\n" + children_digest;
            observe.output = observations;
            observe.duration = std::chrono::duration_cast<std::chrono::microseconds>(
                std::chrono::steady_clock::now() - observe_started);
            result.steps.push_back(std::move(observe));

            // Orient: one analysis call.
            auto orient_started = std::chrono::steady_clock::now();
            std::string orient_prompt = "Task:\n" + node.description;
            orient_prompt += "\n\nObservations:\n" + (observations.empty() ? "(none)" : observations);
            const std::string rendered = render_relevant(ctx.knowledge, node.description,
                                                         ctx.config.knowledge_char_budget);
            if (!rendered.empty()) orient_prompt += "\n\nRelevant knowledge:\n" + rendered;
            LmRequest orient_request;
            orient_request.messages = {{Role::system, kOrientInstructions},
                                       {Role::user, orient_prompt}};
            const LmResponse analysis = ctx.backend.complete(orient_request);
            OodaStep orient;
            orient.phase = OodaPhase::orient;
            orient.input_digest = orient_prompt;
            orient.output = analysis.text;
            orient.backend_calls = 1;
            orient.duration = std::chrono::duration_cast<std::chrono::microseconds>(
                std::chrono::steady_clock::now() - orient_started);
            result.steps.push_back(std::move(orient));

            // Decide: constrained verdict.
            auto decide_started = std::chrono::steady_clock::now();
            Verdict verdict = run_decide(node, analysis.text, observations, ctx);
            OodaStep decide;
            decide.phase = OodaPhase::decide;
            decide.input_digest = "Task:\n" + node.description + "\n\nAnalysis:\n" + analysis.text;
            decide.output = verdict.raw_reply;
            decide.backend_calls = verdict.backend_calls;
            decide.duration = std::chrono::duration_cast<std::chrono::microseconds>(
                std::chrono::steady_clock::now() - decide_started);
            result.steps.push_back(std::move(decide));

            // Act: commit, or expand an unconfident original leaf.
            auto act_started = std::chrono::steady_clock::now();
            OodaStep act;
            act.phase = OodaPhase::act;
            act.input_digest = verdict.verdict_line;

            const bool may_expand = !verdict.confident && original_leaf &&
                                    result.expansions < ctx.config.max_expansions &&
                                    depth < ctx.config.creator.max_depth;
            if (!may_expand) {
                result.answer = verdict.candidate;
                result.confident = verdict.confident;
                act.output = verdict.candidate;
                act.duration = std::chrono::duration_cast<std::chrono::microseconds>(
                    std::chrono::steady_clock::now() - act_started);
                result.steps.push_back(std::move(act));
                break;
            }

            const std::string context = decomposition_context(
                ctx.knowledge, node.description, {}, ctx.config.knowledge_char_budget);
            CountingBackend counting(ctx.backend);
            std::vector<std::string> sub_descriptions;
            try {
                sub_descriptions =
                    decompose_task(node.description, context, counting, ctx.config.creator);
            } catch (...) {
                act.backend_calls = counting.calls();
                result.steps.push_back(std::move(act));
                throw;
            }
            act.backend_calls = counting.calls();

            if (sub_descriptions.empty()) {
                // The decomposer judged the task atomic; keep the candidate.
                result.answer = verdict.candidate;
                result.confident = false;
                act.output = verdict.candidate;
                act.duration = std::chrono::duration_cast<std::chrono::microseconds>(
                    std::chrono::steady_clock::now() - act_started);
                result.steps.push_back(std::move(act));
                break;
            }

            std::unordered_set<std::string> taken = grafted_ids;
            taken.insert(ctx.original_ids.begin(), ctx.original_ids.end());
            std::vector<TaskNode> new_children;
            int index = static_cast<int>(exec.final_node.sub_tasks.size()) + 1;
            for (const auto& description : sub_descriptions) {
                TaskNode child;
                child.id = graft_child_id(exec.final_node, index, taken);
                child.description = description;
                taken.insert(child.id);
                grafted_ids.insert(child.id);
                new_children.push_back(std::move(child));
                ++index;
            }

            for (auto& child : new_children) {
                TaskExecution child_exec = run_task_loop(child, depth + 1, {}, false, ctx);
                child_answers.emplace_back(child_exec.final_node.id, child_exec.answer);
                for (auto& tr : child_exec.trace) grafted_trace.push_back(std::move(tr));
                exec.final_node.sub_tasks.push_back(std::move(child_exec.final_node));
            }
            ++result.expansions;
            act.output = "expanded into " + std::to_string(new_children.size()) + " sub-tasks";
            act.duration = std::chrono::duration_cast<std::chrono::microseconds>(
                std::chrono::steady_clock::now() - act_started);
            result.steps.push_back(std::move(act));
        }
    } catch (const ExecutionError&) {
        throw;  // already names the failing task
    } catch (const Error& ex) {
        throw ExecutionError(node.id, ex.what());
    }

    exec.answer = result.answer;
    exec.trace = std::move(grafted_trace);
    exec.trace.push_back(result);
    return exec;
}

TaskExecution exec_tree(const TaskNode& node, int depth, ExecContext& ctx) {
    if (node.is_leaf()) {
        return run_task_loop(node, depth, {}, true, ctx);
    }

    std::vector<TaskExecution> child_execs;
    child_execs.reserve(node.sub_tasks.size());
    if (ctx.config.parallel_siblings && node.sub_tasks.size() > 1) {
        std::vector<std::future<TaskExecution>> futures;
        futures.reserve(node.sub_tasks.size());
        for (const auto& child : node.sub_tasks) {
            futures.push_back(std::async(std::launch::async, [&child, depth, &ctx] {
                return exec_tree(child, depth + 1, ctx);
            }));
        }
        for (auto& future : futures) child_execs.push_back(future.get());
    } else {
        for (const auto& child : node.sub_tasks) {
            child_execs.push_back(exec_tree(child, depth + 1, ctx));
        }
    }

    TaskNode consolidated = node;
    consolidated.sub_tasks.clear();
    ChildAnswers child_answers;
    std::vector<TaskResult> trace;
    for (auto& child_exec : child_execs) {
        child_answers.emplace_back(child_exec.final_node.id, child_exec.answer);
        for (auto& tr : child_exec.trace) trace.push_back(std::move(tr));
        consolidated.sub_tasks.push_back(std::move(child_exec.final_node));
    }

    TaskExecution self = run_task_loop(consolidated, depth, std::move(child_answers), false, ctx);
    trace.insert(trace.end(), std::make_move_iterator(self.trace.begin()),
                 std::make_move_iterator(self.trace.end()));
    self.trace = std::move(trace);
    return self;
}

std::unordered_set<std::string> collect_ids(const Htp& plan) {
    std::unordered_set<std::string> ids;
    for (const TaskNode* node : post_order(plan)) ids.insert(node->id);
    return ids;
}

}  // namespace

TaskExecution execute_task(const TaskNode& task,
                           const std::vector<std::pair<std::string, std::string>>& child_answers,
                           const ResourceSet& resources, const KnowledgeStore& knowledge,
                           LmBackend& backend, const SolverConfig& config) {
    std::unordered_set<std::string> ids;
    ids.insert(task.id);
    ExecContext ctx{resources, knowledge, backend, config, ids};
    return run_task_loop(task, 1, child_answers, task.is_leaf(), ctx);
}

ExecutionResult execute_htp(const Htp& plan, const ResourceSet& resources,
                            const KnowledgeStore& knowledge, LmBackend& backend,
                            const SolverConfig& config) {
    const auto ids = collect_ids(plan);
    ExecContext ctx{resources, knowledge, backend, config, ids};
    TaskExecution root = exec_tree(plan.root, 1, ctx);

    ExecutionResult result;
    result.answer = root.answer;
    result.final_plan = Htp{std::move(root.final_node), plan.name};
    result.trace = std::move(root.trace);
    return result;
}

Solution solve(const std::string& problem, const KnowledgeStore& knowledge,
               const ProgramStore& programs, const ResourceSet& resources, LmBackend& backend,
               const SolverConfig& config) {
    if (problem.empty()) throw ValidationError("problem must be non-empty");

    Solution solution;
    solution.problem = problem;

    CountingBackend search_backend(backend);
    Htp plan;
    auto match = find_program(problem, programs, knowledge, search_backend, config.finder);
    if (match) {
        plan = match->entry.plan;
        solution.program_source = ProgramSource::found;
        log::info("program found: '", match->entry.name, "'");
    } else {
        plan = create_program(problem, knowledge, search_backend, config.creator,
                              config.knowledge_char_budget);
        solution.program_source = ProgramSource::created;
        log::info("program created: ", node_count(plan), " tasks");
    }
    solution.program_search_backend_calls = search_backend.calls();

    ExecutionResult executed = execute_htp(plan, resources, knowledge, backend, config);
    solution.answer = executed.answer;
    solution.plan = std::move(executed.final_plan);
    solution.trace = std::move(executed.trace);
    return solution;
}

nlohmann::ordered_json solution_to_json(const Solution& solution) {
    ordered_json doc;
    doc["problem"] = solution.problem;
    doc["answer"] = solution.answer;
    doc["program_source"] = solution.program_source == ProgramSource::found ? "found" : "created";
    doc["program_search_backend_calls"] = solution.program_search_backend_calls;
    doc["plan"] = ordered_json::parse(serialize_htp(solution.plan));
    ordered_json trace = ordered_json::array();
    for (const auto& task_result : solution.trace) {
        ordered_json tr;
        tr["task_id"] = task_result.task_id;
        tr["answer"] = task_result.answer;
        tr["confident"] = task_result.confident;
        tr["expansions"] = task_result.expansions;
        ordered_json steps = ordered_json::array();
        for (const auto& step : task_result.steps) {
            ordered_json s;
            s["phase"] = phase_name(step.phase);
            s["input_digest"] = step.input_digest;
            s["output"] = step.output;
            s["backend_calls"] = step.backend_calls;
            steps.push_back(std::move(s));
        }
        tr["steps"] = std::move(steps);
        trace.push_back(std::move(tr));
    }
    doc["trace"] = std::move(trace);
    return doc;
}

void write_trace(const Solution& solution, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write trace file: " + path.string());
    out << solution_to_json(solution).dump(2) << "\n";
}

}  // namespace dana
