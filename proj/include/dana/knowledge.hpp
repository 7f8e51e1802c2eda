#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dana {

enum class KnowledgeKind { definition, fact, formula, heuristic, rule };

std::string kind_name(KnowledgeKind kind);
KnowledgeKind kind_from_name(const std::string& name);  // ParseError on unknown

// One natural-language definition/fact/formula/heuristic/rule.
struct KnowledgeItem {
    std::string id;
    KnowledgeKind kind = KnowledgeKind::fact;
    std::string body;
    std::set<std::string> tags;  // lowercase
    std::optional<std::string> source;
};

inline constexpr std::size_t kDefaultKnowledgeCharBudget = 4000;

// Immutable after load; iteration order is load order.
class KnowledgeStore {
public:
    KnowledgeStore() = default;

    // File format: JSON array of {id, kind, body, tags: [strings], source?}.
    // Unknown fields rejected. Throws ParseError / DuplicateIdError.
    static KnowledgeStore load(const std::filesystem::path& path);
    // Accepts the same array shape; with allow_single_object, a lone item
    // object too (the capture CLI's input convenience).
    static KnowledgeStore from_json_text(const std::string& json_text,
                                         const std::string& origin = "<knowledge>",
                                         bool allow_single_object = false);
    static KnowledgeStore from_items(std::vector<KnowledgeItem> items);

    const std::vector<KnowledgeItem>& items() const { return items_; }
    const std::string& version() const { return version_; }
    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    const KnowledgeItem* find(const std::string& id) const;

    // Store-building helpers for the capture CLI; solves only ever read.
    void add(KnowledgeItem item);  // DuplicateIdError
    void save(const std::filesystem::path& path) const;

private:
    std::vector<KnowledgeItem> items_;
    std::string version_;
};

// Lexical ranking: score = 2*(query terms found in tags) + (query terms found
// in body), case-folded whole-term match. Zero scores drop out; ordering is
// (score desc, id asc); the result is the longest prefix of that ranking whose
// total body length fits char_budget.
std::vector<KnowledgeItem> select_relevant(const KnowledgeStore& store, const std::string& query,
                                           std::size_t char_budget = kDefaultKnowledgeCharBudget);

// Deterministic prompt fragment: "[kind:id] body" blocks separated by blank lines.
std::string render_knowledge(const std::vector<KnowledgeItem>& items);

// select + render in one go; every prompt that wants knowledge uses this.
std::string render_relevant(const KnowledgeStore& store, const std::string& query,
                            std::size_t char_budget = kDefaultKnowledgeCharBudget);

}  // namespace dana
