#pragma once

#include <memory>

#include "dana/bench.hpp"
#include "dana/config.hpp"
#include "dana/ooda.hpp"

namespace dana {

// Wires stores, resources and backend from a resolved config. One Agent per
// process run; solves may execute concurrently against it.
class Agent {
public:
    explicit Agent(AgentConfig config);

    Solution solve_problem(const std::string& problem);

    // Solve function for the benchmark runner; writes one trace per run into
    // trace_dir as <case-id>-run<k>.json.
    SolveFn bench_solve_fn();

    const AgentConfig& config() const { return config_; }
    const KnowledgeStore& knowledge() const { return knowledge_; }
    ProgramStore& programs() { return programs_; }
    const ResourceSet& resources() const { return resources_; }
    LmBackend& backend() { return *retrying_; }

private:
    AgentConfig config_;
    KnowledgeStore knowledge_;
    ProgramStore programs_;
    ResourceSet resources_;
    std::unique_ptr<LmBackend> backend_;
    std::unique_ptr<LmBackend> retrying_;
};

std::unique_ptr<LmBackend> make_backend(const AgentConfig& config);

}  // namespace dana
