#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dana/lm_http.hpp"
#include "dana/ooda.hpp"

namespace dana {

enum class BackendKind { scripted, http };

// Resolved agent configuration. Precedence: config file, then DANA_* env
// vars, then CLI flags.
struct AgentConfig {
    std::string variant = "DANA-NK-NP";  // the only variant implemented
    std::optional<std::filesystem::path> knowledge_path;
    std::optional<std::filesystem::path> programs_path;
    std::optional<std::filesystem::path> resources_path;

    BackendKind backend_kind = BackendKind::scripted;
    std::optional<std::filesystem::path> script_path;  // scripted backend
    HttpBackendConfig http;                            // http backend
    int lm_max_attempts = 3;

    SolverConfig solver;
    std::filesystem::path trace_dir = "traces";

    // Parses the JSON file and applies env overrides. Unknown keys, a wrong
    // variant, or a named-but-missing store path raise ConfigError.
    static AgentConfig load(const std::filesystem::path& path);
    static AgentConfig from_json_text(const std::string& json_text,
                                      const std::filesystem::path& base_dir = ".");

    void apply_env_overrides();
    void validate_paths() const;  // ConfigError naming the missing path
};

}  // namespace dana
