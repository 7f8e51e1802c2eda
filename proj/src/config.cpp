#include "dana/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dana/errors.hpp"

namespace dana {

using nlohmann::json;

namespace {

std::optional<std::string> env_value(const char* name) {
    const char* value = std::getenv(name);
    if (value == nullptr || *value == '\0') return std::nullopt;
    return std::string(value);
}

void check_known_keys(const json& object, std::initializer_list<const char*> known,
                      const std::string& locus) {
    for (const auto& field : object.items()) {
        bool ok = false;
        for (const char* key : known) {
            if (field.key() == key) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ConfigError(locus + ": unknown field '" + field.key() + "'");
    }
}

std::string get_string(const json& object, const char* key, const std::string& locus) {
    if (!object[key].is_string()) throw ConfigError(locus + ": '" + key + "' must be a string");
    return object[key].get<std::string>();
}

int get_int(const json& object, const char* key, const std::string& locus) {
    if (!object[key].is_number_integer()) {
        throw ConfigError(locus + ": '" + key + "' must be an integer");
    }
    return object[key].get<int>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    if (p.is_absolute()) return p;
    return base / p;
}

}  // namespace

AgentConfig AgentConfig::from_json_text(const std::string& json_text,
                                        const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("config: ") + ex.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    check_known_keys(doc,
                     {"variant", "knowledge_path", "programs_path", "resources_path", "backend",
                      "retry_max_attempts", "creator", "finder", "observe_k", "max_expansions",
                      "verdict_retries", "knowledge_char_budget", "parallel_siblings", "trace_dir"},
                     "config");

    AgentConfig config;
    if (doc.contains("variant")) config.variant = get_string(doc, "variant", "config");
    if (config.variant != "DANA-NK-NP") {
        throw ConfigError("unsupported variant '" + config.variant +
                          "' (only DANA-NK-NP is implemented)");
    }
    if (doc.contains("knowledge_path")) {
        config.knowledge_path = resolve(base_dir, get_string(doc, "knowledge_path", "config"));
    }
    if (doc.contains("programs_path")) {
        config.programs_path = resolve(base_dir, get_string(doc, "programs_path", "config"));
    }
    if (doc.contains("resources_path")) {
        config.resources_path = resolve(base_dir, get_string(doc, "resources_path", "config"));
    }
    if (doc.contains("trace_dir")) {
        config.trace_dir = resolve(base_dir, get_string(doc, "trace_dir", "config"));
    }
    if (doc.contains("retry_max_attempts")) {
        config.lm_max_attempts = get_int(doc, "retry_max_attempts", "config");
        if (config.lm_max_attempts < 1) throw ConfigError("retry_max_attempts must be >= 1");
    }

    if (doc.contains("backend")) {
        const json& backend = doc["backend"];
        if (!backend.is_object()) throw ConfigError("config: 'backend' must be an object");
        check_known_keys(backend, {"type", "script_path", "endpoint", "model", "api_key", "timeout_ms"},
                         "config.backend");
        const std::string type = get_string(backend, "type", "config.backend");
        if (type == "scripted") {
            config.backend_kind = BackendKind::scripted;
            if (backend.contains("script_path")) {
                config.script_path =
                    resolve(base_dir, get_string(backend, "script_path", "config.backend"));
            }
        } else if (type == "http") {
            config.backend_kind = BackendKind::http;
            if (backend.contains("endpoint")) {
                config.http.endpoint = get_string(backend, "endpoint", "config.backend");
            }
            if (backend.contains("model")) {
                config.http.model = get_string(backend, "model", "config.backend");
            }
            if (backend.contains("api_key")) {
                config.http.api_key = get_string(backend, "api_key", "config.backend");
            }
            if (backend.contains("timeout_ms")) {
                config.http.timeout =
                    std::chrono::milliseconds(get_int(backend, "timeout_ms", "config.backend"));
            }
        } else {
            throw ConfigError("config.backend: unknown type '" + type + "'");
        }
    }

    if (doc.contains("creator")) {
        const json& creator = doc["creator"];
        if (!creator.is_object()) throw ConfigError("config: 'creator' must be an object");
        check_known_keys(creator, {"max_depth", "max_subtasks", "max_parse_retries"},
                         "config.creator");
        if (creator.contains("max_depth")) {
            config.solver.creator.max_depth = get_int(creator, "max_depth", "config.creator");
        }
        if (creator.contains("max_subtasks")) {
            config.solver.creator.max_subtasks = get_int(creator, "max_subtasks", "config.creator");
        }
        if (creator.contains("max_parse_retries")) {
            config.solver.creator.max_parse_retries =
                get_int(creator, "max_parse_retries", "config.creator");
        }
        if (config.solver.creator.max_depth < 1) throw ConfigError("creator.max_depth must be >= 1");
        if (config.solver.creator.max_subtasks < 1) {
            throw ConfigError("creator.max_subtasks must be >= 1");
        }
        if (config.solver.creator.max_parse_retries < 0) {
            throw ConfigError("creator.max_parse_retries must be >= 0");
        }
    }

    if (doc.contains("finder")) {
        const json& finder = doc["finder"];
        if (!finder.is_object()) throw ConfigError("config: 'finder' must be an object");
        check_known_keys(finder, {"tau1", "top_k"}, "config.finder");
        if (finder.contains("tau1")) {
            if (!finder["tau1"].is_number()) throw ConfigError("config.finder: 'tau1' must be a number");
            config.solver.finder.tau1 = finder["tau1"].get<double>();
        }
        if (finder.contains("top_k")) {
            config.solver.finder.top_k = get_int(finder, "top_k", "config.finder");
            if (config.solver.finder.top_k < 1) throw ConfigError("finder.top_k must be >= 1");
        }
    }

    if (doc.contains("observe_k")) {
        config.solver.observe_k = get_int(doc, "observe_k", "config");
        if (config.solver.observe_k < 1) throw ConfigError("observe_k must be >= 1");
    }
    if (doc.contains("max_expansions")) {
        config.solver.max_expansions = get_int(doc, "max_expansions", "config");
        if (config.solver.max_expansions < 0) throw ConfigError("max_expansions must be >= 0");
    }
    if (doc.contains("verdict_retries")) {
        config.solver.verdict_retries = get_int(doc, "verdict_retries", "config");
        if (config.solver.verdict_retries < 0) throw ConfigError("verdict_retries must be >= 0");
    }
    if (doc.contains("knowledge_char_budget")) {
        const int budget = get_int(doc, "knowledge_char_budget", "config");
        if (budget < 1) throw ConfigError("knowledge_char_budget must be >= 1");
        config.solver.knowledge_char_budget = static_cast<std::size_t>(budget);
        config.solver.finder.knowledge_char_budget = config.solver.knowledge_char_budget;
    }
    if (doc.contains("parallel_siblings")) {
        if (!doc["parallel_siblings"].is_boolean()) {
            throw ConfigError("config: 'parallel_siblings' must be a boolean");
        }
        config.solver.parallel_siblings = doc["parallel_siblings"].get<bool>();
    }
    return config;
}

AgentConfig AgentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    AgentConfig config = from_json_text(
        buffer.str(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
    config.apply_env_overrides();
    return config;
}

void AgentConfig::apply_env_overrides() {
    if (auto endpoint = env_value("DANA_LM_ENDPOINT")) http.endpoint = *endpoint;
    if (auto model = env_value("DANA_LM_MODEL")) http.model = *model;
    if (auto key = env_value("DANA_LM_API_KEY")) http.api_key = *key;
}

void AgentConfig::validate_paths() const {
    auto check = [](const std::optional<std::filesystem::path>& path, const char* what) {
        if (path && !std::filesystem::exists(*path)) {
            throw ConfigError(std::string(what) + " path does not exist: " + path->string());
        }
    };
    check(knowledge_path, "knowledge");
    check(programs_path, "programs");
    check(resources_path, "resources");
    if (backend_kind == BackendKind::scripted) {
        if (!script_path) throw ConfigError("scripted backend requires backend.script_path");
        if (!std::filesystem::exists(*script_path)) {
            throw ConfigError("script path does not exist: " + script_path->string());
        }
    }
}

}  // namespace dana
