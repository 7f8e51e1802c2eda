// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion enforces its own wall-clock budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dana/agent.hpp"
#include "dana/bench.hpp"
#include "dana/config.hpp"
#include "dana/errors.hpp"
#include "dana/htp.hpp"
#include "dana/ooda.hpp"
#include "dana/program_store.hpp"

#include "../unit/helpers.hpp"

namespace {

using namespace dana;
namespace fs = std::filesystem;

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw Failure(message);
}

template <typename T>
void require_eq(const T& got, const T& expected, const std::string& what) {
    if (!(got == expected)) {
        std::ostringstream out;
        out << what << ": got " << got << ", expected " << expected;
        throw Failure(out.str());
    }
}

// ---------------------------------------------------------------------------
// 1. Metric exactness

void criterion_metric_exactness() {
    for (int n = 1; n <= 20; ++n) {
        for (int k = 0; k <= n; ++k) {
            const double reference = 2.0 * std::fabs(0.5 - double(k) / double(n));
            const double got = consistency_score(k, n);
            if (got != reference) {
                throw Failure("consistency_score(" + std::to_string(k) + "," + std::to_string(n) +
                              ") = " + std::to_string(got) + " != " + std::to_string(reference));
            }
        }
    }
    require(consistency_score(10, 10) == 1.0, "endpoint (10,10) must be exactly 1.0");
    require(consistency_score(5, 10) == 0.0, "endpoint (5,10) must be exactly 0.0");
}

// ---------------------------------------------------------------------------
// 2. Determinism thesis

void criterion_determinism() {
    dana::testing::TempDir workspace;

    std::string script = R"([
      {"match": ["ATOMIC"], "response": "ATOMIC", "priority": 0},
      {"match": ["analysis step"], "response": "synthetic analysis", "priority": 1},
    )";
    std::vector<ProblemCase> cases;
    std::string cases_json = "[";
    static const DifficultyLevel kSpread[] = {
        DifficultyLevel::retrieve,      DifficultyLevel::compare,
        DifficultyLevel::calc_change,   DifficultyLevel::calc_complex,
        DifficultyLevel::calc_and_judge, DifficultyLevel::explain_factors,
        DifficultyLevel::other_advanced, DifficultyLevel::retrieve,
        DifficultyLevel::calc_complex,  DifficultyLevel::compare,
    };
    for (int i = 0; i < 10; ++i) {
        const std::string question = "synthetic question " + std::to_string(i);
        const std::string answer = "answer-" + std::to_string(i);
        script += R"(  {"match": ["decision step", ")" + question + R"("], "response": "CONFIDENT\n)" +
                  answer + R"(", "priority": )" + std::to_string(10 + i) + "},\n";
        ProblemCase c;
        c.id = "case-" + std::to_string(i);
        c.question = question;
        // Half the suite is graded incorrect on purpose; consistency must
        // still be exactly 1.0 because every run repeats the outcome.
        c.ground_truth = (i % 2 == 0) ? answer : "something else";
        c.level = kSpread[i];
        c.grade_mode = GradeMode::exact;
        cases.push_back(c);
    }
    script += R"(  {"match": ["decision step"], "response": "CONFIDENT\nfallback", "priority": 99}
    ])";

    const auto script_path = workspace.write_file("script.json", script);
    AgentConfig config;
    config.backend_kind = BackendKind::scripted;
    config.script_path = script_path;
    config.trace_dir = workspace.path() / "traces";

    std::string first_report;
    for (int repetition = 0; repetition < 10; ++repetition) {
        Agent agent(config);
        BenchReport report = run_benchmark(cases, agent.bench_solve_fn(), 10, 2);
        require(report.overall.avg_consistency == 1.0, "avg_consistency must be exactly 1.0");
        require(report.overall.avg_accuracy == 0.5, "half the suite is graded correct");
        const std::string bytes = report_to_json(report).dump(2);
        if (repetition == 0) {
            first_report = bytes;
        } else if (bytes != first_report) {
            throw Failure("benchmark report bytes differ between runs");
        }
    }
}

// ---------------------------------------------------------------------------
// 3. Knowledge effect

void criterion_knowledge_effect() {
    ScriptedBackend backend({
        {{"ATOMIC"}, "ATOMIC", 0},
        {{"analysis step", "margin = revenue minus cogs"}, "apply FORMULA-OK now", 1},
        {{"analysis step"}, "no formula available", 2},
        {{"decision step", "FORMULA-OK"}, "CONFIDENT\n42", 3},
        {{"decision step"}, "CONFIDENT\n0", 4},
    });

    KnowledgeItem formula;
    formula.id = "margin-formula";
    formula.kind = KnowledgeKind::formula;
    formula.body = "margin = revenue minus cogs";
    formula.tags = {"margin"};
    const auto with_formula = KnowledgeStore::from_items({formula});
    const KnowledgeStore without_formula;

    std::vector<ProblemCase> cases;
    for (int i = 0; i < 4; ++i) {
        ProblemCase c;
        c.id = "arith-" + std::to_string(i);
        c.question = "compute the margin for quarter " + std::to_string(i);
        c.ground_truth = "42";
        c.level = DifficultyLevel::calc_complex;
        c.grade_mode = GradeMode::exact;
        cases.push_back(c);
    }

    const ProgramStore no_programs;
    const ResourceSet no_resources;
    auto agent_with = [&](const ProblemCase& c, int) {
        return SolveOutput{
            solve(c.question, with_formula, no_programs, no_resources, backend, {}).answer, ""};
    };
    auto agent_without = [&](const ProblemCase& c, int) {
        return SolveOutput{
            solve(c.question, without_formula, no_programs, no_resources, backend, {}).answer, ""};
    };

    BenchReport knowledgeable = run_benchmark(cases, agent_with, 10, 2);
    BenchReport ignorant = run_benchmark(cases, agent_without, 10, 2);
    require(knowledgeable.overall.avg_accuracy == 1.0,
            "knowledge in the store must produce accuracy 1.0, got " +
                std::to_string(knowledgeable.overall.avg_accuracy));
    require(ignorant.overall.avg_accuracy == 0.0,
            "an empty store must produce accuracy 0.0, got " +
                std::to_string(ignorant.overall.avg_accuracy));
    require(knowledgeable.overall.avg_consistency == 1.0, "deterministic agent consistency");
    require(ignorant.overall.avg_consistency == 1.0, "deterministic agent consistency");
}

// ---------------------------------------------------------------------------
// 4. Program-search contract

std::set<std::string> search_oracle_terms(const std::string& s) {
    std::set<std::string> out;
    std::string current;
    for (char raw : s + " ") {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else {
            if (current.size() >= 2) out.insert(current);
            current.clear();
        }
    }
    return out;
}

void criterion_program_search() {
    static const char* kVocabulary[] = {"etch",    "rate",  "gas",    "flow",    "margin",
                                        "revenue", "cogs",  "filing", "balance", "ratio",
                                        "power",   "yield", "cost",   "quarter", "stability"};
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> word(0, 14);

    std::vector<ProgramEntry> entries;
    for (int i = 0; i < 20; ++i) {
        ProgramEntry entry;
        entry.name = "prog-" + std::to_string(i);
        std::string description;
        const int words = 3 + word(rng) % 5;
        for (int w = 0; w < words; ++w) description += std::string(kVocabulary[word(rng)]) + " ";
        entry.problem_description = description;
        if (word(rng) > 7) entry.tags.insert(kVocabulary[word(rng)]);
        entry.plan.root.id = "t";
        entry.plan.root.description = description;
        entries.push_back(entry);
    }
    const auto store = ProgramStore::from_entries(entries);

    FinderConfig full_ranking;
    full_ranking.tau1 = 0.0;
    full_ranking.top_k = 20;

    for (int round = 0; round < 50; ++round) {
        std::string query;
        const int words = 2 + word(rng) % 4;
        for (int w = 0; w < words; ++w) query += std::string(kVocabulary[word(rng)]) + " ";

        // Exhaustive oracle over all 20 entries.
        struct Row {
            std::string name;
            double score;
        };
        std::vector<Row> oracle;
        const auto query_terms = search_oracle_terms(query);
        for (const auto& entry : store.entries()) {
            std::string meta = entry.problem_description;
            for (const auto& tag : entry.tags) meta += " " + tag;
            const auto meta_terms = search_oracle_terms(meta);
            std::size_t inter = 0;
            for (const auto& term : query_terms) inter += meta_terms.count(term);
            const std::size_t uni = query_terms.size() + meta_terms.size() - inter;
            oracle.push_back({entry.name, uni == 0 ? 0.0 : double(inter) / double(uni)});
        }
        std::sort(oracle.begin(), oracle.end(), [](const Row& a, const Row& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.name < b.name;
        });

        const auto candidates = stage_one_candidates(query, store, full_ranking);
        require_eq(candidates.size(), oracle.size(), "stage-1 candidate count");
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            require(candidates[i].entry->name == oracle[i].name,
                    "rank " + std::to_string(i) + " mismatch: " + candidates[i].entry->name +
                        " vs " + oracle[i].name);
            require(std::fabs(candidates[i].lexical_score - oracle[i].score) < 1e-12,
                    "score mismatch at rank " + std::to_string(i));
        }
    }

    // Sub-threshold problems must never reach the backend.
    dana::testing::TrapBackend trap;
    const KnowledgeStore no_knowledge;
    for (int round = 0; round < 10; ++round) {
        const std::string query = "zebra quagga okapi wombat " + std::to_string(round);
        auto match = find_program(query, store, no_knowledge, trap);
        require(!match.has_value(), "disjoint query must find nothing");
    }
    require_eq(trap.calls(), 0, "backend calls for sub-threshold queries");
}

// ---------------------------------------------------------------------------
// 5. HTP properties

void criterion_htp_properties() {
    std::mt19937 rng(20240809);
    for (int round = 0; round < 200; ++round) {
        Htp plan = dana::testing::random_plan(rng, 5, 50);

        const Htp reparsed = parse_htp(serialize_htp(plan));
        require(reparsed == plan, "round " + std::to_string(round) + ": round-trip inequality");

        const auto order = post_order(plan);
        const auto reference = dana::testing::reference_post_order(plan);
        require_eq(order.size(), reference.size(), "post-order length");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < order.size(); ++i) {
            require(order[i] == reference[i], "post-order node mismatch");
            require(seen.insert(order[i]->id).second, "node repeated in post-order");
        }
        require_eq(static_cast<int>(order.size()), node_count(plan), "post-order covers all nodes");
        std::map<std::string, std::size_t> position;
        for (std::size_t i = 0; i < order.size(); ++i) position[order[i]->id] = i;
        for (const TaskNode* node : order) {
            for (const auto& child : node->sub_tasks) {
                require(position[child.id] < position[node->id], "child after parent");
            }
        }

        for (int max_depth : {2, 3, 5}) {
            // Brute-force checker: flat rows, then derive violations.
            struct Row {
                std::string id;
                int depth;
                bool empty;
            };
            std::vector<Row> rows;
            std::function<void(const TaskNode&, int)> walk = [&](const TaskNode& node, int depth) {
                rows.push_back({node.id, depth, node.description.empty()});
                for (const auto& child : node.sub_tasks) walk(child, depth + 1);
            };
            walk(plan.root, 1);
            std::multiset<std::pair<int, std::string>> expected;
            std::map<std::string, int> id_counts;
            for (const auto& row : rows) ++id_counts[row.id];
            std::set<std::string> flagged;
            for (const auto& row : rows) {
                if (id_counts[row.id] > 1 && flagged.insert(row.id).second) {
                    expected.insert({0, row.id});
                }
                if (row.empty) expected.insert({1, row.id});
                if (row.depth > max_depth) expected.insert({2, row.id});
            }
            std::multiset<std::pair<int, std::string>> got;
            for (const auto& violation : validate(plan, max_depth)) {
                got.insert({static_cast<int>(violation.code), violation.node_id});
            }
            require(got == expected, "validate disagrees with the brute-force checker");
        }
    }
}

// ---------------------------------------------------------------------------
// 6. OODA phase discipline and call accounting

void check_discipline_and_accounting(const Solution& solution, int total_backend_calls) {
    int blocks = 0;
    int act_calls = 0;
    for (const auto& result : solution.trace) {
        require(result.steps.size() % 4 == 0 && !result.steps.empty(),
                "steps must be whole OODA blocks");
        for (std::size_t i = 0; i < result.steps.size(); i += 4) {
            require(result.steps[i + 0].phase == OodaPhase::observe, "phase 0 must be observe");
            require(result.steps[i + 1].phase == OodaPhase::orient, "phase 1 must be orient");
            require(result.steps[i + 2].phase == OodaPhase::decide, "phase 2 must be decide");
            require(result.steps[i + 3].phase == OodaPhase::act, "phase 3 must be act");
            require(result.steps[i + 0].backend_calls == 0, "observe makes no backend calls");
            require(result.steps[i + 1].backend_calls == 1, "orient makes exactly one call");
            require(result.steps[i + 2].backend_calls == 1, "decide makes exactly one call");
            act_calls += result.steps[i + 3].backend_calls;
        }
        blocks += static_cast<int>(result.steps.size()) / 4;
    }
    const int expected = 2 * blocks + solution.program_search_backend_calls + act_calls;
    require_eq(total_backend_calls, expected,
               "total backend calls vs 2*blocks + finder/creator calls");
}

void criterion_ooda_accounting() {
    const KnowledgeStore no_knowledge;
    const ResourceSet no_resources;

    {  // Found path.
        ProgramEntry entry;
        entry.name = "stored";
        entry.problem_description = "what is the stored answer";
        entry.plan.root.id = "s1";
        entry.plan.root.description = "what is the stored answer";
        const auto programs = ProgramStore::from_entries({entry});
        ScriptedBackend inner({
            {{"stored program applies"}, "APPLICABLE", 0},
            {{"analysis step"}, "analysis", 1},
            {{"decision step"}, "CONFIDENT\nstored", 2},
        });
        CountingBackend backend(inner);
        const Solution solution =
            solve("what is the stored answer", no_knowledge, programs, no_resources, backend, {});
        require(solution.program_source == ProgramSource::found, "found path expected");
        require_eq(solution.trace.size(), std::size_t{1}, "found-path trace length");
        check_discipline_and_accounting(solution, backend.calls());
    }

    {  // Created path with decomposition and consolidation.
        const ProgramStore no_programs;
        ScriptedBackend inner({
            {{"ATOMIC", "Task:\ncompound problem"}, "1. piece one\n2. piece two", 0},
            {{"ATOMIC"}, "ATOMIC", 1},
            {{"analysis step"}, "analysis", 2},
            {{"decision step", "[child:"}, "CONFIDENT\ncombined", 3},
            {{"decision step"}, "CONFIDENT\npartial", 4},
        });
        CountingBackend backend(inner);
        const Solution solution =
            solve("compound problem", no_knowledge, no_programs, no_resources, backend, {});
        require(solution.program_source == ProgramSource::created, "created path expected");
        require_eq(solution.trace.size(), std::size_t{3}, "created-path trace length");
        require(solution.answer == "combined", "consolidated answer");
        check_discipline_and_accounting(solution, backend.calls());
    }

    {  // One-expansion path, on a stored plan (a freshly created ATOMIC leaf
       // would re-ask the same pure decomposer and stay atomic).
        ProgramEntry entry;
        entry.name = "expandable";
        entry.problem_description = "expanding problem";
        entry.plan.root.id = "e1";
        entry.plan.root.description = "expanding problem";
        const auto programs = ProgramStore::from_entries({entry});
        ScriptedBackend inner({
            {{"stored program applies"}, "APPLICABLE", 0},
            {{"ATOMIC"}, "1. grafted piece", 2},
            {{"analysis step"}, "analysis", 3},
            {{"decision step", "[child:"}, "CONFIDENT\nrecovered", 4},
            {{"decision step", "grafted piece"}, "CONFIDENT\nchild answer", 5},
            {{"decision step"}, "UNCONFIDENT\ndraft", 6},
        });
        CountingBackend backend(inner);
        const Solution solution =
            solve("expanding problem", no_knowledge, programs, no_resources, backend, {});
        require(solution.program_source == ProgramSource::found, "found path expected");
        require_eq(node_count(solution.plan), 2, "plan grew by the grafted child");
        require_eq(solution.trace.size(), std::size_t{2}, "expansion trace length");
        require(solution.trace[1].expansions == 1, "one expansion recorded");
        require(solution.trace[1].steps.size() == 8, "expanded task ran two blocks");
        require(solution.answer == "recovered", "post-expansion answer");
        check_discipline_and_accounting(solution, backend.calls());
    }
}

// ---------------------------------------------------------------------------
// 7. Termination bound

void criterion_termination_bound() {
    const KnowledgeStore no_knowledge;
    const ResourceSet no_resources;
    const ProgramStore no_programs;

    // Adversary: every decomposition request returns a full list and every
    // decision is unconfident.
    ScriptedBackend backend({
        {{"ATOMIC"}, "1. grind a\n2. grind b\n3. grind c", 0},
        {{"analysis step"}, "analysis", 1},
        {{"decision step"}, "UNCONFIDENT\nshrug", 2},
    });

    for (int max_depth = 1; max_depth <= 3; ++max_depth) {
        SolverConfig config;
        config.creator.max_depth = max_depth;
        config.creator.max_subtasks = 3;
        config.max_expansions = 5;  // generous budget; depth must still cap it

        int bound = 0;
        int power = 1;
        for (int d = 0; d < max_depth; ++d) {
            bound += power;
            power *= config.creator.max_subtasks;
        }

        const Solution solution =
            solve("adversarial problem", no_knowledge, no_programs, no_resources, backend, config);
        require(node_count(solution.plan) <= bound,
                "node count " + std::to_string(node_count(solution.plan)) + " exceeds bound " +
                    std::to_string(bound) + " at max_depth " + std::to_string(max_depth));
        require_eq(node_count(solution.plan), bound, "adversary fills the tree exactly");
        require_eq(solution.trace.size(), static_cast<std::size_t>(bound),
                   "one result per plan node");
        require(tree_depth(solution.plan) <= max_depth, "depth within limit");
        require(!solution.trace.empty() && !solution.trace.back().confident,
                "adversarial answers stay flagged unconfident");
    }
}

// ---------------------------------------------------------------------------
// 8. Grading normalization

void criterion_grading_normalization() {
    struct Pair {
        const char* answer;
        const char* truth;
        bool expected;
    };
    // Hand-computed oracle table. Relative error = |a-t| / max(|a|,|t|).
    static const Pair kTable[] = {
        {"25%", "0.25", true},
        {"0.25", "25%", true},
        {"$1,002 million", "1.0 billion", true},    // 1.002e9 vs 1.0e9: 0.2%
        {"1.0 billion", "$1,002 million", true},
        {"(123)", "-123", true},
        {"(123)", "123", false},
        {"($4,510) thousand", "-4510000", true},
        {"-5%", "-0.05", true},
        {"-5%", "0.05", false},
        {"12.5%", "0.125", true},
        {"12.4%", "0.125", true},                    // 0.124 vs 0.125: 0.8% relative error
        {"12.2%", "0.125", false},                   // 2.4% relative error
        {"1,234,567", "1234567", true},
        {"$2.5 million", "2500000", true},
        {"$2.5 million", "2,500,000 dollars", true},
        {"3.5 trillion", "3500000000000", true},
        {"2 thousand", "2000", true},
        {"1999", "2000", true},                      // 0.05%
        {"1900", "2000", false},                     // 5%
        {"0", "0.00", true},
        {"0", "1", false},
        {"about 99 units", "100", true},             // 1.0% exactly
        {"98", "100", false},                        // 2%
        {"7%", "0.07", true},
        {"700%", "7", true},
        {".5", "0.5", true},
        {"42 is the answer", "the answer is 42", true},
    };

    static_assert(sizeof(kTable) / sizeof(kTable[0]) >= 20);
    for (const auto& row : kTable) {
        const bool got = grade(row.answer, row.truth, GradeMode::numeric);
        if (got != row.expected) {
            throw Failure(std::string("grade(\"") + row.answer + "\", \"" + row.truth +
                          "\") = " + (got ? "true" : "false"));
        }
    }
}

// ---------------------------------------------------------------------------

struct Criterion {
    const char* name;
    double budget_seconds;
    void (*run)();
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {"metric-exactness", 1.0, criterion_metric_exactness},
        {"determinism-thesis", 30.0, criterion_determinism},
        {"knowledge-effect", 10.0, criterion_knowledge_effect},
        {"program-search-contract", 5.0, criterion_program_search},
        {"htp-properties", 10.0, criterion_htp_properties},
        {"ooda-discipline-and-accounting", 5.0, criterion_ooda_accounting},
        {"termination-bound", 5.0, criterion_termination_bound},
        {"grading-normalization", 1.0, criterion_grading_normalization},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto started = std::chrono::steady_clock::now();
        std::string error;
        try {
            criterion.run();
        } catch (const std::exception& ex) {
            error = ex.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (error.empty() && elapsed > criterion.budget_seconds) {
            std::ostringstream out;
            out << "exceeded budget: " << elapsed << "s > " << criterion.budget_seconds << "s";
            error = out.str();
        }
        if (error.empty()) {
            std::printf("PASS %-32s (%.2fs)\n", criterion.name, elapsed);
        } else {
            std::printf("FAIL %-32s (%.2fs): %s\n", criterion.name, elapsed, error.c_str());
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}
