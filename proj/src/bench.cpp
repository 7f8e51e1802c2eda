#include "dana/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dana/errors.hpp"
#include "dana/text.hpp"

namespace dana {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kJudgeInstructions =
    "You grade whether a given answer matches the expected answer. "
    "Reply with first line exactly CORRECT or INCORRECT.";

struct LevelInfo {
    DifficultyLevel level;
    const char* name;
    const char* display;
};

constexpr LevelInfo kLevels[] = {
    {DifficultyLevel::retrieve, "RETRIEVE", "0-RETRIEVE"},
    {DifficultyLevel::compare, "COMPARE", "1-COMPARE"},
    {DifficultyLevel::calc_change, "CALC_CHANGE", "2-CALC-CHANGE"},
    {DifficultyLevel::calc_complex, "CALC_COMPLEX", "3-CALC-COMPLEX"},
    {DifficultyLevel::calc_and_judge, "CALC_AND_JUDGE", "4-CALC-AND-JUDGE"},
    {DifficultyLevel::explain_factors, "EXPLAIN_FACTORS", "5-EXPLAIN-FACTORS"},
    {DifficultyLevel::other_advanced, "OTHER_ADVANCED", "6-OTHER-ADVANCED"},
};

}  // namespace

std::string level_name(DifficultyLevel level) {
    for (const auto& info : kLevels) {
        if (info.level == level) return info.name;
    }
    return "RETRIEVE";
}

DifficultyLevel level_from_name(const std::string& name) {
    for (const auto& info : kLevels) {
        if (name == info.name) return info.level;
    }
    throw ParseError("unknown difficulty level: '" + name + "'");
}

std::string level_display_name(DifficultyLevel level) {
    for (const auto& info : kLevels) {
        if (info.level == level) return info.display;
    }
    return "0-RETRIEVE";
}

std::string grade_mode_name(GradeMode mode) {
    switch (mode) {
        case GradeMode::exact: return "exact";
        case GradeMode::numeric: return "numeric";
        case GradeMode::judge: return "judge";
    }
    return "exact";
}

GradeMode grade_mode_from_name(const std::string& name) {
    if (name == "exact") return GradeMode::exact;
    if (name == "numeric") return GradeMode::numeric;
    if (name == "judge") return GradeMode::judge;
    throw ParseError("unknown grade mode: '" + name + "'");
}

std::vector<ProblemCase> load_cases(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open case file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();

    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::exception& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }
    if (!doc.is_array()) throw ParseError(path.string() + ": case file must be a JSON array");

    std::vector<ProblemCase> cases;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& record = doc[i];
        const std::string locus = path.string() + ": case " + std::to_string(i);
        if (!record.is_object()) throw ParseError(locus + ": not an object");
        for (const auto& field : record.items()) {
            const std::string& key = field.key();
            if (key != "id" && key != "question" && key != "ground_truth" && key != "level" &&
                key != "grade_mode") {
                throw ParseError(locus + ": unknown field '" + key + "'");
            }
        }
        auto require_string = [&](const char* key) {
            if (!record.contains(key) || !record[key].is_string()) {
                throw ParseError(locus + ": '" + std::string(key) + "' must be a string");
            }
            return record[key].get<std::string>();
        };
        ProblemCase problem_case;
        problem_case.id = require_string("id");
        if (problem_case.id.empty()) throw ParseError(locus + ": 'id' must be non-empty");
        problem_case.question = require_string("question");
        problem_case.ground_truth = require_string("ground_truth");
        try {
            problem_case.level = level_from_name(require_string("level"));
            problem_case.grade_mode = grade_mode_from_name(require_string("grade_mode"));
        } catch (const ParseError& ex) {
            throw ParseError(locus + ": " + ex.what());
        }
        cases.push_back(std::move(problem_case));
    }
    return cases;
}

double consistency_score(int correct_count, int total_runs) {
    if (total_runs < 1) throw DomainError("total_runs must be >= 1");
    if (correct_count < 0) throw DomainError("correct_count must be >= 0");
    if (correct_count > total_runs) {
        throw DomainError("correct_count " + std::to_string(correct_count) + " exceeds total runs " +
                          std::to_string(total_runs));
    }
    const double proportion = static_cast<double>(correct_count) / static_cast<double>(total_runs);
    return 2.0 * std::abs(0.5 - proportion);
}

std::optional<double> extract_numeric(const std::string& input) {
    const std::size_t n = input.size();
    std::size_t i = 0;
    while (i < n && !std::isdigit(static_cast<unsigned char>(input[i]))) ++i;
    if (i >= n) return std::nullopt;

    // Walk back over the number's allowed prefix: '.', '-', '$', '(' and spaces.
    std::size_t start = i;
    bool negative = false;
    bool open_paren = false;
    {
        std::size_t j = i;
        if (j > 0 && input[j - 1] == '.') --j;  // ".5"
        while (j > 0) {
            const char c = input[j - 1];
            if (c == '-') {
                negative = true;
                --j;
            } else if (c == '$' || c == ' ') {
                --j;
            } else if (c == '(') {
                open_paren = true;
                --j;
                break;
            } else {
                break;
            }
        }
        start = j;
    }

    // Digits with commas and one decimal point.
    std::string digits;
    if (start < i && input[i - 1] == '.') digits = ".";
    bool seen_point = !digits.empty();
    std::size_t end = i;
    while (end < n) {
        const char c = input[end];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
        } else if (c == ',') {
            // thousands separator, skip
        } else if (c == '.' && !seen_point && end + 1 < n &&
                   std::isdigit(static_cast<unsigned char>(input[end + 1]))) {
            seen_point = true;
            digits.push_back('.');
        } else {
            break;
        }
        ++end;
    }
    if (digits.empty() || digits == ".") return std::nullopt;
    double value = std::stod(digits);

    // Tail: %, scale word and closing paren may appear in any order, each once
    // (covers "25%", "$1,002 million", "(3.5%)", "($4,510) thousand").
    std::size_t t = end;
    bool percent_seen = false;
    bool scale_seen = false;
    bool close_seen = false;
    static const std::pair<const char*, double> kScales[] = {
        {"thousand", 1e3}, {"million", 1e6}, {"billion", 1e9}, {"trillion", 1e12}};
    while (true) {
        while (t < n && input[t] == ' ') ++t;
        if (!percent_seen && t < n && input[t] == '%') {
            value /= 100.0;
            percent_seen = true;
            ++t;
            continue;
        }
        if (open_paren && !close_seen && t < n && input[t] == ')') {
            negative = true;
            close_seen = true;
            ++t;
            continue;
        }
        if (!scale_seen) {
            bool matched = false;
            for (const auto& [word, factor] : kScales) {
                const std::size_t len = std::strlen(word);
                if (t + len > n) continue;
                const std::string candidate = text::to_lower(std::string_view(input).substr(t, len));
                const bool word_ends =
                    t + len == n || !std::isalpha(static_cast<unsigned char>(input[t + len]));
                if (candidate == word && word_ends) {
                    value *= factor;
                    t += len;
                    scale_seen = true;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }
        break;
    }
    if (negative) value = -value;
    return value;
}

bool grade(const std::string& answer, const std::string& truth, GradeMode mode, LmBackend* judge) {
    switch (mode) {
        case GradeMode::exact:
            return text::to_lower(text::collapse_whitespace(answer)) ==
                   text::to_lower(text::collapse_whitespace(truth));
        case GradeMode::numeric: {
            const auto a = extract_numeric(answer);
            const auto t = extract_numeric(truth);
            if (!a) throw GradeError("no numeric value in answer: '" + answer + "'");
            if (!t) throw GradeError("no numeric value in ground truth: '" + truth + "'");
            if (*a == 0.0 && *t == 0.0) return true;
            const double scale = std::max(std::abs(*a), std::abs(*t));
            return std::abs(*a - *t) <= 0.01 * scale;
        }
        case GradeMode::judge: {
            if (judge == nullptr) throw GradeError("grade_mode=judge requires a judge backend");
            LmRequest request;
            request.messages = {
                {Role::system, kJudgeInstructions},
                {Role::user, "Expected answer:\n" + truth + "\n\nGiven answer:\n" + answer}};
            const LmResponse response = judge->complete(request);
            const auto lines = text::split_lines(response.text);
            const std::string verdict = lines.empty() ? "" : text::trim(lines.front());
            if (verdict == "CORRECT") return true;
            if (verdict == "INCORRECT") return false;
            throw VerdictParseError("judge verdict is neither CORRECT nor INCORRECT: '" + verdict +
                                    "'");
        }
    }
    return false;
}

BenchReport run_benchmark(const std::vector<ProblemCase>& cases, const SolveFn& solve_fn, int n,
                          int workers, LmBackend* judge) {
    if (cases.empty()) throw ValidationError("case list must be non-empty");
    if (n < 1) throw ValidationError("n must be >= 1");
    if (workers < 1) throw ValidationError("workers must be >= 1");

    // Stable aggregation order regardless of input or scheduling.
    std::vector<const ProblemCase*> ordered;
    ordered.reserve(cases.size());
    for (const auto& problem_case : cases) ordered.push_back(&problem_case);
    std::sort(ordered.begin(), ordered.end(),
              [](const ProblemCase* a, const ProblemCase* b) { return a->id < b->id; });

    struct Slot {
        bool correct = false;
        std::string answer;
        std::string error;
        std::string trace_ref;
    };
    std::vector<std::vector<Slot>> grid(ordered.size(), std::vector<Slot>(static_cast<std::size_t>(n)));

    const std::size_t job_count = ordered.size() * static_cast<std::size_t>(n);
    std::atomic<std::size_t> next_job{0};
    auto run_jobs = [&] {
        while (true) {
            const std::size_t job = next_job.fetch_add(1, std::memory_order_relaxed);
            if (job >= job_count) return;
            const std::size_t case_index = job / static_cast<std::size_t>(n);
            const int run_index = static_cast<int>(job % static_cast<std::size_t>(n));
            const ProblemCase& problem_case = *ordered[case_index];
            Slot& slot = grid[case_index][static_cast<std::size_t>(run_index)];
            try {
                SolveOutput output = solve_fn(problem_case, run_index);
                slot.answer = std::move(output.answer);
                slot.trace_ref = std::move(output.trace_ref);
                slot.correct = grade(slot.answer, problem_case.ground_truth,
                                     problem_case.grade_mode, judge);
            } catch (const std::exception& ex) {
                slot.correct = false;
                slot.error = ex.what();
            }
        }
    };

    if (workers == 1) {
        run_jobs();
    } else {
        std::vector<std::thread> pool;
        const int thread_count = std::min<int>(workers, static_cast<int>(job_count));
        pool.reserve(static_cast<std::size_t>(thread_count));
        for (int i = 0; i < thread_count; ++i) pool.emplace_back(run_jobs);
        for (auto& thread : pool) thread.join();
    }

    BenchReport report;
    report.n = n;
    struct Accumulator {
        int case_count = 0;
        double accuracy_sum = 0.0;
        double consistency_sum = 0.0;
    };
    std::map<DifficultyLevel, Accumulator> level_acc;
    Accumulator overall_acc;

    for (std::size_t c = 0; c < ordered.size(); ++c) {
        const ProblemCase& problem_case = *ordered[c];
        CaseRuns runs;
        runs.case_id = problem_case.id;
        runs.level = problem_case.level;
        for (const Slot& slot : grid[c]) {
            runs.correctness.push_back(slot.correct);
            runs.answers.push_back(slot.answer);
            runs.errors.push_back(slot.error);
            runs.trace_refs.push_back(slot.trace_ref);
            if (slot.correct) ++runs.correct_count;
        }
        const double accuracy = static_cast<double>(runs.correct_count) / static_cast<double>(n);
        const double consistency = consistency_score(runs.correct_count, n);
        auto& acc = level_acc[problem_case.level];
        ++acc.case_count;
        acc.accuracy_sum += accuracy;
        acc.consistency_sum += consistency;
        ++overall_acc.case_count;
        overall_acc.accuracy_sum += accuracy;
        overall_acc.consistency_sum += consistency;
        report.cases.push_back(std::move(runs));
    }

    auto finalize = [](const Accumulator& acc) {
        LevelStats stats;
        stats.case_count = acc.case_count;
        if (acc.case_count > 0) {
            stats.avg_accuracy = acc.accuracy_sum / acc.case_count;
            stats.avg_consistency = acc.consistency_sum / acc.case_count;
        }
        return stats;
    };
    for (const auto& [level, acc] : level_acc) report.per_level[level] = finalize(acc);
    report.overall = finalize(overall_acc);
    return report;
}

nlohmann::ordered_json report_to_json(const BenchReport& report) {
    ordered_json doc;
    doc["n"] = report.n;
    auto stats_json = [](const LevelStats& stats) {
        ordered_json s;
        s["case_count"] = stats.case_count;
        s["avg_accuracy"] = stats.avg_accuracy;
        s["avg_consistency"] = stats.avg_consistency;
        return s;
    };
    doc["overall"] = stats_json(report.overall);
    ordered_json per_level = ordered_json::object();
    for (const auto& [level, stats] : report.per_level) {
        per_level[level_name(level)] = stats_json(stats);
    }
    doc["per_level"] = std::move(per_level);
    ordered_json cases = ordered_json::array();
    for (const auto& runs : report.cases) {
        ordered_json c;
        c["id"] = runs.case_id;
        c["level"] = level_name(runs.level);
        c["correct_count"] = runs.correct_count;
        c["correctness"] = runs.correctness;
        c["answers"] = runs.answers;
        c["errors"] = runs.errors;
        c["trace_refs"] = runs.trace_refs;
        cases.push_back(std::move(c));
    }
    doc["cases"] = std::move(cases);
    return doc;
}

void write_report(const BenchReport& report, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write report file: " + path.string());
    out << report_to_json(report).dump(2) << "\n";
}

std::string format_report_table(const BenchReport& report) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-20s %6s %10s %12s\n", "Difficulty Level", "#Qs",
                  "Accuracy", "Consistency");
    out += line;
    auto add_row = [&](const std::string& label, const LevelStats& stats) {
        std::snprintf(line, sizeof(line), "%-20s %6d %9.1f%% %11.1f%%\n", label.c_str(),
                      stats.case_count, stats.avg_accuracy * 100.0, stats.avg_consistency * 100.0);
        out += line;
    };
    for (const auto& [level, stats] : report.per_level) {
        add_row(level_display_name(level), stats);
    }
    add_row("Overall", report.overall);
    return out;
}

}  // namespace dana
