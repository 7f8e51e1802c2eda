#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dana/htp.hpp"
#include "dana/knowledge.hpp"
#include "dana/lm.hpp"

namespace dana {

// A stored plan plus the descriptive metadata the finder matches against.
struct ProgramEntry {
    std::string name;
    std::string problem_description;
    std::set<std::string> tags;  // lowercase
    Htp plan;

    bool operator==(const ProgramEntry&) const = default;
};

struct ProgramMatch {
    ProgramEntry entry;
    double lexical_score = 0.0;  // in [0, 1]
    bool confirmed = false;
};

struct FinderConfig {
    double tau1 = 0.2;  // stage-1 score floor
    int top_k = 3;      // candidates forwarded to stage 2
    std::size_t knowledge_char_budget = kDefaultKnowledgeCharBudget;
};

// A directory of one-JSON-document-per-entry files:
// {name, problem: string, tags: [strings], htp: <plan document>}.
class ProgramStore {
public:
    ProgramStore() = default;

    // Throws ParseError / DuplicateNameError / ValidationError. Files are
    // read in sorted path order so load is deterministic.
    static ProgramStore load(const std::filesystem::path& dir);
    static ProgramStore from_entries(std::vector<ProgramEntry> entries);

    const std::vector<ProgramEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    std::vector<std::string> names_sorted() const;
    const ProgramEntry* find_by_name(const std::string& name) const;
    const std::optional<std::filesystem::path>& directory() const { return dir_; }

    // Validates, persists one file into the store directory, then adds the
    // entry. Single-writer contract. Throws DuplicateNameError / IoError.
    void save_entry(const ProgramEntry& entry);
    void add(ProgramEntry entry);  // in-memory only

private:
    std::vector<ProgramEntry> entries_;
    std::optional<std::filesystem::path> dir_;
};

// Parses one program-entry document ({name, problem, tags, htp}).
ProgramEntry load_program_entry_file(const std::filesystem::path& path);

// Jaccard overlap of case-folded term sets: problem vs description+tags.
double lexical_match_score(const std::string& problem, const ProgramEntry& entry);

struct StageOneCandidate {
    const ProgramEntry* entry;
    double lexical_score;
};

// Symbolic prefilter: scores every entry, keeps those >= tau1, orders by
// (score desc, name asc), truncates to top_k. Makes no backend calls.
std::vector<StageOneCandidate> stage_one_candidates(const std::string& problem,
                                                    const ProgramStore& store,
                                                    const FinderConfig& config);

// Two-stage finder. Stage 2 asks the backend for a first-line verdict
// APPLICABLE / NOT_APPLICABLE per candidate, in rank order; the first
// APPLICABLE wins. Absent when nothing survives both stages.
std::optional<ProgramMatch> find_program(const std::string& problem, const ProgramStore& store,
                                         const KnowledgeStore& knowledge, LmBackend& backend,
                                         const FinderConfig& config = {});

}  // namespace dana
