#include "dana/program_store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dana/errors.hpp"
#include "dana/logging.hpp"
#include "dana/text.hpp"

namespace dana {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kConfirmInstructions =
    "You judge whether a stored program applies to a posed problem. "
    "Reply with first line exactly APPLICABLE or NOT_APPLICABLE.";

ProgramEntry entry_from_json(const json& doc, const std::string& locus) {
    if (!doc.is_object()) throw ParseError(locus + ": program entry must be an object");
    for (const auto& field : doc.items()) {
        const std::string& key = field.key();
        if (key != "name" && key != "problem" && key != "tags" && key != "htp") {
            throw ParseError(locus + ": unknown field '" + key + "'");
        }
    }
    ProgramEntry entry;
    if (!doc.contains("name") || !doc["name"].is_string()) {
        throw ParseError(locus + ": 'name' must be a string");
    }
    entry.name = doc["name"].get<std::string>();
    if (entry.name.empty()) throw ParseError(locus + ": 'name' must be non-empty");
    if (!doc.contains("problem") || !doc["problem"].is_string()) {
        throw ParseError(locus + ": 'problem' must be a string");
    }
    entry.problem_description = doc["problem"].get<std::string>();
    if (entry.problem_description.empty()) {
        throw ValidationError(locus + ": 'problem' must be non-empty");
    }
    if (!doc.contains("tags") || !doc["tags"].is_array()) {
        throw ParseError(locus + ": 'tags' must be an array of strings");
    }
    for (const auto& tag : doc["tags"]) {
        if (!tag.is_string()) throw ParseError(locus + ": 'tags' must be an array of strings");
        entry.tags.insert(text::to_lower(tag.get<std::string>()));
    }
    if (!doc.contains("htp")) throw ParseError(locus + ": missing 'htp'");
    try {
        entry.plan = parse_htp(doc["htp"].dump());
    } catch (const Error& ex) {
        throw ValidationError(locus + ": " + ex.what());
    }
    return entry;
}

ordered_json entry_to_json(const ProgramEntry& entry) {
    ordered_json doc;
    doc["name"] = entry.name;
    doc["problem"] = entry.problem_description;
    doc["tags"] = entry.tags;
    doc["htp"] = ordered_json::parse(serialize_htp(entry.plan));
    return doc;
}

std::string entry_file_name(const std::string& name) {
    std::string base;
    for (unsigned char c : name) {
        if (std::isalnum(c)) {
            base.push_back(static_cast<char>(std::tolower(c)));
        } else {
            base.push_back('-');
        }
    }
    return base + ".json";
}

std::set<std::string> metadata_terms(const ProgramEntry& entry) {
    auto terms = text::term_set(entry.problem_description);
    for (const auto& tag : entry.tags) {
        auto tag_terms = text::term_set(tag);
        terms.insert(tag_terms.begin(), tag_terms.end());
    }
    return terms;
}

}  // namespace

ProgramStore ProgramStore::load(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir)) throw IoError("program store directory missing: " + dir.string());
    if (!std::filesystem::is_directory(dir)) {
        throw IoError("program store path is not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    ProgramStore store;
    store.dir_ = dir;
    for (const auto& file : files) store.add(load_program_entry_file(file));
    return store;
}

ProgramStore ProgramStore::from_entries(std::vector<ProgramEntry> entries) {
    ProgramStore store;
    for (auto& entry : entries) store.add(std::move(entry));
    return store;
}

std::vector<std::string> ProgramStore::names_sorted() const {
    std::vector<std::string> names;
    names.reserve(entries_.size());
    for (const auto& entry : entries_) names.push_back(entry.name);
    std::sort(names.begin(), names.end());
    return names;
}

const ProgramEntry* ProgramStore::find_by_name(const std::string& name) const {
    for (const auto& entry : entries_) {
        if (entry.name == name) return &entry;
    }
    return nullptr;
}

void ProgramStore::add(ProgramEntry entry) {
    if (find_by_name(entry.name) != nullptr) throw DuplicateNameError(entry.name);
    if (entry.problem_description.empty()) {
        throw ValidationError("program '" + entry.name + "' has an empty problem description");
    }
    auto violations = validate(entry.plan, kParseMaxDepth);
    if (!violations.empty()) {
        throw ValidationError("program '" + entry.name + "': " + violations.front().message);
    }
    entries_.push_back(std::move(entry));
}

void ProgramStore::save_entry(const ProgramEntry& entry) {
    if (!dir_) throw IoError("program store has no backing directory");
    if (find_by_name(entry.name) != nullptr) throw DuplicateNameError(entry.name);
    const auto path = *dir_ / entry_file_name(entry.name);
    if (std::filesystem::exists(path)) {
        throw IoError("program file already exists: " + path.string());
    }
    ProgramEntry copy = entry;
    add(copy);  // validates before any file is written
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write program file: " + path.string());
    out << entry_to_json(entry).dump(2) << "\n";
}

ProgramEntry load_program_entry_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open program file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::exception& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }
    return entry_from_json(doc, path.string());
}

double lexical_match_score(const std::string& problem, const ProgramEntry& entry) {
    const auto problem_terms = text::term_set(problem);
    const auto meta_terms = metadata_terms(entry);
    std::size_t intersection = 0;
    for (const auto& term : problem_terms) intersection += meta_terms.count(term);
    const std::size_t unioned = problem_terms.size() + meta_terms.size() - intersection;
    if (unioned == 0) return 0.0;
    return static_cast<double>(intersection) / static_cast<double>(unioned);
}

std::vector<StageOneCandidate> stage_one_candidates(const std::string& problem,
                                                    const ProgramStore& store,
                                                    const FinderConfig& config) {
    std::vector<StageOneCandidate> candidates;
    for (const auto& entry : store.entries()) {
        const double score = lexical_match_score(problem, entry);
        if (score >= config.tau1) candidates.push_back({&entry, score});
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const StageOneCandidate& a, const StageOneCandidate& b) {
                  if (a.lexical_score != b.lexical_score) return a.lexical_score > b.lexical_score;
                  return a.entry->name < b.entry->name;
              });
    if (candidates.size() > static_cast<std::size_t>(config.top_k)) {
        candidates.resize(static_cast<std::size_t>(config.top_k));
    }
    return candidates;
}

std::optional<ProgramMatch> find_program(const std::string& problem, const ProgramStore& store,
                                         const KnowledgeStore& knowledge, LmBackend& backend,
                                         const FinderConfig& config) {
    if (problem.empty()) throw ValidationError("problem must be non-empty");
    const auto candidates = stage_one_candidates(problem, store, config);
    if (candidates.empty()) return std::nullopt;

    const std::string rendered = render_relevant(knowledge, problem, config.knowledge_char_budget);
    for (const auto& candidate : candidates) {
        const ProgramEntry& entry = *candidate.entry;
        std::string tags;
        for (const auto& tag : entry.tags) {
            if (!tags.empty()) tags += ", ";
            tags += tag;
        }
        std::string prompt = "Problem:\n" + problem + "\n\nCandidate program name: " + entry.name +
                             "\nProblem it solves: " + entry.problem_description + "\nTags: " + tags;
        if (!rendered.empty()) prompt += "\n\nRelevant knowledge:\n" + rendered;

        LmRequest request;
        request.messages = {{Role::system, kConfirmInstructions}, {Role::user, prompt}};
        const LmResponse response = backend.complete(request);
        const auto lines = text::split_lines(response.text);
        const std::string verdict = lines.empty() ? "" : text::trim(lines.front());
        if (verdict == "APPLICABLE") {
            log::debug("finder confirmed program '", entry.name, "' (lexical ",
                       candidate.lexical_score, ")");
            return ProgramMatch{entry, candidate.lexical_score, true};
        }
        if (verdict != "NOT_APPLICABLE") {
            throw VerdictParseError("finder verdict line is neither APPLICABLE nor NOT_APPLICABLE: '" +
                                    verdict + "'");
        }
    }
    return std::nullopt;
}

}  // namespace dana
