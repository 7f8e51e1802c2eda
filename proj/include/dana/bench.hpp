#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dana/lm.hpp"

#include <nlohmann/json_fwd.hpp>

namespace dana {

enum class DifficultyLevel {
    retrieve,
    compare,
    calc_change,
    calc_complex,
    calc_and_judge,
    explain_factors,
    other_advanced,
};

// Case-file token, e.g. "CALC_COMPLEX".
std::string level_name(DifficultyLevel level);
DifficultyLevel level_from_name(const std::string& name);  // ParseError
// Report-table label, e.g. "3-CALC-COMPLEX".
std::string level_display_name(DifficultyLevel level);

enum class GradeMode { exact, numeric, judge };

std::string grade_mode_name(GradeMode mode);
GradeMode grade_mode_from_name(const std::string& name);  // ParseError

struct ProblemCase {
    std::string id;
    std::string question;
    std::string ground_truth;
    DifficultyLevel level = DifficultyLevel::retrieve;
    GradeMode grade_mode = GradeMode::exact;
};

// JSON array of {id, question, ground_truth, level, grade_mode}.
std::vector<ProblemCase> load_cases(const std::filesystem::path& path);

// 2*|0.5 - k/n|: 1 for all-same outcomes, 0 for a 50/50 split.
double consistency_score(int correct_count, int total_runs);

// First numeric value in the text, normalized: "$" stripped, commas removed,
// "%" divides by 100, thousand/million/billion/trillion multiply out,
// parenthesized values are negative. nullopt when no number is present.
std::optional<double> extract_numeric(const std::string& text);

// exact: case-folded whitespace-collapsed equality. numeric: both sides
// normalized, correct iff relative error <= 1% (|a-t| / max(|a|,|t|)).
// judge: one backend call with a CORRECT/INCORRECT first-line verdict.
bool grade(const std::string& answer, const std::string& truth, GradeMode mode,
           LmBackend* judge = nullptr);

struct SolveOutput {
    std::string answer;
    std::string trace_ref;  // recorded in the report; may be empty
};

using SolveFn = std::function<SolveOutput(const ProblemCase&, int run_index)>;

struct CaseRuns {
    std::string case_id;
    DifficultyLevel level = DifficultyLevel::retrieve;
    std::vector<bool> correctness;       // length n
    std::vector<std::string> answers;    // length n
    std::vector<std::string> errors;     // length n; "" when the run was clean
    std::vector<std::string> trace_refs; // length n
    int correct_count = 0;
};

struct LevelStats {
    int case_count = 0;
    double avg_accuracy = 0.0;
    double avg_consistency = 0.0;
};

struct BenchReport {
    int n = 0;
    std::map<DifficultyLevel, LevelStats> per_level;
    LevelStats overall;
    std::vector<CaseRuns> cases;  // sorted by case id
};

// n independent solves per case, graded against ground truth. A run that
// throws counts as incorrect and is recorded; the benchmark never aborts.
// Averages are case-weighted. Up to `workers` (case, run) jobs in flight.
BenchReport run_benchmark(const std::vector<ProblemCase>& cases, const SolveFn& solve_fn,
                          int n = 10, int workers = 1, LmBackend* judge = nullptr);

nlohmann::ordered_json report_to_json(const BenchReport& report);
void write_report(const BenchReport& report, const std::filesystem::path& path);

// Per-level table in the report layout: level, #Qs, accuracy, consistency.
std::string format_report_table(const BenchReport& report);

}  // namespace dana
