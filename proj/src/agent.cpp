#include "dana/agent.hpp"

#include "dana/errors.hpp"
#include "dana/lm_http.hpp"

namespace dana {

std::unique_ptr<LmBackend> make_backend(const AgentConfig& config) {
    switch (config.backend_kind) {
        case BackendKind::scripted: {
            if (!config.script_path) {
                throw ConfigError("scripted backend requires backend.script_path");
            }
            return std::make_unique<ScriptedBackend>(ScriptedBackend::from_file(*config.script_path));
        }
        case BackendKind::http:
            return std::make_unique<HttpBackend>(config.http);
    }
    throw ConfigError("unknown backend kind");
}

Agent::Agent(AgentConfig config) : config_(std::move(config)) {
    config_.validate_paths();
    if (config_.knowledge_path) knowledge_ = KnowledgeStore::load(*config_.knowledge_path);
    if (config_.programs_path) programs_ = ProgramStore::load(*config_.programs_path);
    if (config_.resources_path) resources_ = ResourceSet::load(*config_.resources_path);
    backend_ = make_backend(config_);
    retrying_ = std::make_unique<RetryBackend>(*backend_, config_.lm_max_attempts);
}

Solution Agent::solve_problem(const std::string& problem) {
    return solve(problem, knowledge_, programs_, resources_, *retrying_, config_.solver);
}

SolveFn Agent::bench_solve_fn() {
    return [this](const ProblemCase& problem_case, int run_index) {
        Solution solution = solve_problem(problem_case.question);
        const auto trace_path =
            config_.trace_dir / (problem_case.id + "-run" + std::to_string(run_index) + ".json");
        write_trace(solution, trace_path);
        SolveOutput output;
        output.answer = solution.answer;
        output.trace_ref = trace_path.generic_string();
        return output;
    };
}

}  // namespace dana
