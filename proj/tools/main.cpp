// dana: knowledge-first problem solving over hierarchical task plans.
// Subcommands: solve, store (add-knowledge | add-program | list), bench.
// Exit codes: 0 success, 1 runtime/solve error, 2 configuration/usage error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dana/agent.hpp"
#include "dana/bench.hpp"
#include "dana/config.hpp"
#include "dana/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
    std::string config_path;
    std::string knowledge_path;
    std::string programs_path;
    std::string resources_path;
    std::string backend_kind;
    std::string script_path;
    std::string endpoint;
    std::string model;
    std::string trace_dir;
};

void add_common_flags(CLI::App& cmd, CommonFlags& flags) {
    cmd.add_option("--config", flags.config_path, "Agent config file (or $DANA_CONFIG)");
    cmd.add_option("--knowledge", flags.knowledge_path, "Knowledge store file (overrides config)");
    cmd.add_option("--programs", flags.programs_path, "Program store directory (overrides config)");
    cmd.add_option("--resources", flags.resources_path, "Resource directory (overrides config)");
    cmd.add_option("--backend", flags.backend_kind, "Backend kind: scripted | http");
    cmd.add_option("--script", flags.script_path, "Script file for the scripted backend");
    cmd.add_option("--endpoint", flags.endpoint, "HTTP backend endpoint");
    cmd.add_option("--model", flags.model, "HTTP backend model name");
    cmd.add_option("--trace-dir", flags.trace_dir, "Directory for trace files");
}

// File config, then env, then flags.
dana::AgentConfig resolve_config(const CommonFlags& flags) {
    std::string config_path = flags.config_path;
    if (config_path.empty()) {
        if (const char* env = std::getenv("DANA_CONFIG"); env != nullptr && *env != '\0') {
            config_path = env;
        }
    }
    dana::AgentConfig config;
    if (!config_path.empty()) {
        config = dana::AgentConfig::load(config_path);
    } else {
        config.apply_env_overrides();
    }
    if (!flags.knowledge_path.empty()) config.knowledge_path = flags.knowledge_path;
    if (!flags.programs_path.empty()) config.programs_path = flags.programs_path;
    if (!flags.resources_path.empty()) config.resources_path = flags.resources_path;
    if (!flags.backend_kind.empty()) {
        if (flags.backend_kind == "scripted") {
            config.backend_kind = dana::BackendKind::scripted;
        } else if (flags.backend_kind == "http") {
            config.backend_kind = dana::BackendKind::http;
        } else {
            throw dana::ConfigError("--backend must be scripted or http");
        }
    }
    if (!flags.script_path.empty()) config.script_path = flags.script_path;
    if (!flags.endpoint.empty()) config.http.endpoint = flags.endpoint;
    if (!flags.model.empty()) config.http.model = flags.model;
    if (!flags.trace_dir.empty()) config.trace_dir = flags.trace_dir;
    return config;
}

std::string read_stdin() {
    std::string input((std::istreambuf_iterator<char>(std::cin)),
                      std::istreambuf_iterator<char>());
    return input;
}

int cmd_solve(const CommonFlags& flags, std::string problem, const std::string& trace_out) {
    dana::AgentConfig config;
    try {
        config = resolve_config(flags);
    } catch (const dana::Error& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    }

    std::unique_ptr<dana::Agent> agent;
    try {
        agent = std::make_unique<dana::Agent>(std::move(config));
    } catch (const dana::Error& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    }

    if (problem.empty()) problem = read_stdin();
    while (!problem.empty() && (problem.back() == '\n' || problem.back() == '\r')) {
        problem.pop_back();
    }
    if (problem.empty()) {
        std::cerr << "usage error: provide a problem via --problem or stdin\n";
        return kExitConfig;
    }

    try {
        dana::Solution solution = agent->solve_problem(problem);
        std::filesystem::path trace_path = trace_out.empty()
                                               ? agent->config().trace_dir / "solve.json"
                                               : std::filesystem::path(trace_out);
        dana::write_trace(solution, trace_path);
        std::cout << solution.answer << "\n";
        return kExitOk;
    } catch (const dana::Error& ex) {
        std::cerr << "solve error: " << ex.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_store_add_knowledge(const CommonFlags& flags, const std::string& file) {
    dana::AgentConfig config;
    try {
        config = resolve_config(flags);
        if (!config.knowledge_path) {
            throw dana::ConfigError("no knowledge store path configured");
        }
    } catch (const dana::Error& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    }

    try {
        dana::KnowledgeStore store;
        if (std::filesystem::exists(*config.knowledge_path)) {
            store = dana::KnowledgeStore::load(*config.knowledge_path);
        }
        std::ifstream in(file, std::ios::binary);
        if (!in) throw dana::IoError("cannot open item file: " + file);
        std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        dana::KnowledgeStore incoming =
            dana::KnowledgeStore::from_json_text(raw, file, /*allow_single_object=*/true);

        for (const auto& item : incoming.items()) store.add(item);
        store.save(*config.knowledge_path);
        std::cerr << "added " << incoming.size() << " knowledge item(s)\n";
        return kExitOk;
    } catch (const dana::Error& ex) {
        std::cerr << "store error: " << ex.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_store_add_program(const CommonFlags& flags, const std::string& file) {
    dana::AgentConfig config;
    try {
        config = resolve_config(flags);
        if (!config.programs_path) {
            throw dana::ConfigError("no program store path configured");
        }
    } catch (const dana::Error& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    }

    try {
        std::filesystem::create_directories(*config.programs_path);
        dana::ProgramStore store = dana::ProgramStore::load(*config.programs_path);
        store.save_entry(dana::load_program_entry_file(file));
        std::cerr << "added program\n";
        return kExitOk;
    } catch (const dana::Error& ex) {
        std::cerr << "store error: " << ex.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_store_list(const CommonFlags& flags) {
    dana::AgentConfig config;
    try {
        config = resolve_config(flags);
    } catch (const dana::Error& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    }

    try {
        if (config.knowledge_path && std::filesystem::exists(*config.knowledge_path)) {
            auto store = dana::KnowledgeStore::load(*config.knowledge_path);
            std::vector<std::string> ids;
            ids.reserve(store.size());
            for (const auto& item : store.items()) ids.push_back(item.id);
            std::sort(ids.begin(), ids.end());
            for (const auto& id : ids) std::cout << "knowledge\t" << id << "\n";
        }
        if (config.programs_path && std::filesystem::exists(*config.programs_path)) {
            auto store = dana::ProgramStore::load(*config.programs_path);
            for (const auto& name : store.names_sorted()) std::cout << "program\t" << name << "\n";
        }
        return kExitOk;
    } catch (const dana::Error& ex) {
        std::cerr << "store error: " << ex.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_bench(const CommonFlags& flags, const std::string& cases_path, int n, int workers,
              const std::string& report_path) {
    dana::AgentConfig config;
    std::vector<dana::ProblemCase> cases;
    std::unique_ptr<dana::Agent> agent;
    try {
        config = resolve_config(flags);
        cases = dana::load_cases(cases_path);
        agent = std::make_unique<dana::Agent>(std::move(config));
    } catch (const dana::Error& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    }

    try {
        dana::BenchReport report =
            dana::run_benchmark(cases, agent->bench_solve_fn(), n, workers, &agent->backend());
        if (!report_path.empty()) dana::write_report(report, report_path);
        std::cout << dana::format_report_table(report);
        return kExitOk;
    } catch (const dana::Error& ex) {
        std::cerr << "bench error: " << ex.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dana: knowledge-first problem solving over hierarchical task plans"};
    app.require_subcommand(1);

    CommonFlags solve_flags;
    std::string problem;
    std::string trace_out;
    CLI::App* solve = app.add_subcommand("solve", "Solve one problem and print the answer");
    add_common_flags(*solve, solve_flags);
    solve->add_option("--problem", problem, "Problem statement (stdin when omitted)");
    solve->add_option("--trace-out", trace_out, "Trace file path (default <trace-dir>/solve.json)");

    CommonFlags store_flags;
    std::string item_file;
    std::string program_file;
    CLI::App* store = app.add_subcommand("store", "Inspect or extend the stores");
    store->require_subcommand(1);
    CLI::App* add_knowledge =
        store->add_subcommand("add-knowledge", "Validate and persist knowledge items");
    add_common_flags(*add_knowledge, store_flags);
    add_knowledge->add_option("--file", item_file, "JSON file with one item or an array of items")
        ->required();
    CLI::App* add_program = store->add_subcommand("add-program", "Validate and persist a program");
    add_common_flags(*add_program, store_flags);
    add_program->add_option("--file", program_file, "Program entry JSON file")->required();
    CLI::App* list = store->add_subcommand("list", "Print knowledge ids and program names");
    add_common_flags(*list, store_flags);

    CommonFlags bench_flags;
    std::string cases_path;
    std::string report_path;
    int n = 10;
    int workers = 1;
    CLI::App* bench = app.add_subcommand("bench", "Run repeated solves and report the metrics");
    add_common_flags(*bench, bench_flags);
    bench->add_option("--cases", cases_path, "Case file (JSON array)")->required();
    bench->add_option("--n", n, "Solutions generated per case (default 10)");
    bench->add_option("--workers", workers, "Concurrent solve jobs (default 1)");
    bench->add_option("--report", report_path, "Report JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitConfig;
    }

    if (solve->parsed()) return cmd_solve(solve_flags, problem, trace_out);
    if (add_knowledge->parsed()) return cmd_store_add_knowledge(store_flags, item_file);
    if (add_program->parsed()) return cmd_store_add_program(store_flags, program_file);
    if (list->parsed()) return cmd_store_list(store_flags);
    if (bench->parsed()) return cmd_bench(bench_flags, cases_path, n, workers, report_path);
    return kExitConfig;
}
