#include "dana/knowledge.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dana/errors.hpp"
#include "dana/text.hpp"

namespace dana {

using nlohmann::json;
using nlohmann::ordered_json;

std::string kind_name(KnowledgeKind kind) {
    switch (kind) {
        case KnowledgeKind::definition: return "definition";
        case KnowledgeKind::fact: return "fact";
        case KnowledgeKind::formula: return "formula";
        case KnowledgeKind::heuristic: return "heuristic";
        case KnowledgeKind::rule: return "rule";
    }
    return "fact";
}

KnowledgeKind kind_from_name(const std::string& name) {
    if (name == "definition") return KnowledgeKind::definition;
    if (name == "fact") return KnowledgeKind::fact;
    if (name == "formula") return KnowledgeKind::formula;
    if (name == "heuristic") return KnowledgeKind::heuristic;
    if (name == "rule") return KnowledgeKind::rule;
    throw ParseError("unknown knowledge kind: '" + name + "'");
}

namespace {

KnowledgeItem item_from_json(const json& record, const std::string& locus) {
    if (!record.is_object()) throw ParseError(locus + ": not an object");
    for (const auto& field : record.items()) {
        const std::string& key = field.key();
        if (key != "id" && key != "kind" && key != "body" && key != "tags" && key != "source") {
            throw ParseError(locus + ": unknown field '" + key + "'");
        }
    }
    auto require_string = [&](const char* key) {
        if (!record.contains(key) || !record[key].is_string()) {
            throw ParseError(locus + ": '" + key + "' must be a string");
        }
        return record[key].get<std::string>();
    };
    KnowledgeItem item;
    item.id = require_string("id");
    if (item.id.empty()) throw ParseError(locus + ": 'id' must be non-empty");
    try {
        item.kind = kind_from_name(require_string("kind"));
    } catch (const ParseError& ex) {
        throw ParseError(locus + ": " + ex.what());
    }
    item.body = require_string("body");
    if (item.body.empty()) throw ParseError(locus + ": 'body' must be non-empty");
    if (!record.contains("tags") || !record["tags"].is_array()) {
        throw ParseError(locus + ": 'tags' must be an array of strings");
    }
    for (const auto& tag : record["tags"]) {
        if (!tag.is_string()) throw ParseError(locus + ": 'tags' must be an array of strings");
        item.tags.insert(text::to_lower(tag.get<std::string>()));
    }
    if (record.contains("source")) {
        if (!record["source"].is_string()) throw ParseError(locus + ": 'source' must be a string");
        item.source = record["source"].get<std::string>();
    }
    return item;
}

ordered_json item_to_json(const KnowledgeItem& item) {
    ordered_json record;
    record["id"] = item.id;
    record["kind"] = kind_name(item.kind);
    record["body"] = item.body;
    record["tags"] = item.tags;
    if (item.source) record["source"] = *item.source;
    return record;
}

}  // namespace

KnowledgeStore KnowledgeStore::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open knowledge file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str(), path.string());
}

KnowledgeStore KnowledgeStore::from_json_text(const std::string& json_text,
                                              const std::string& origin,
                                              bool allow_single_object) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& ex) {
        throw ParseError(origin + ": " + ex.what());
    }
    if (doc.is_object() && allow_single_object) doc = json::array({doc});
    if (!doc.is_array()) throw ParseError(origin + ": knowledge document must be a JSON array");

    std::vector<KnowledgeItem> items;
    items.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        items.push_back(item_from_json(doc[i], origin + ": record " + std::to_string(i)));
    }
    KnowledgeStore store = from_items(std::move(items));
    store.version_ = text::fingerprint(json_text);
    return store;
}

KnowledgeStore KnowledgeStore::from_items(std::vector<KnowledgeItem> items) {
    KnowledgeStore store;
    for (auto& item : items) store.add(std::move(item));
    std::string joined;
    for (const auto& item : store.items_) {
        joined += item.id;
        joined.push_back('\n');
        joined += item.body;
        joined.push_back('\n');
    }
    store.version_ = text::fingerprint(joined);
    return store;
}

const KnowledgeItem* KnowledgeStore::find(const std::string& id) const {
    for (const auto& item : items_) {
        if (item.id == id) return &item;
    }
    return nullptr;
}

void KnowledgeStore::add(KnowledgeItem item) {
    if (find(item.id) != nullptr) throw DuplicateIdError(item.id);
    items_.push_back(std::move(item));
}

void KnowledgeStore::save(const std::filesystem::path& path) const {
    ordered_json doc = ordered_json::array();
    for (const auto& item : items_) doc.push_back(item_to_json(item));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write knowledge file: " + path.string());
    out << doc.dump(2) << "\n";
}

std::vector<KnowledgeItem> select_relevant(const KnowledgeStore& store, const std::string& query,
                                           std::size_t char_budget) {
    const auto query_terms = text::term_set(query);

    struct Scored {
        const KnowledgeItem* item;
        int score;
    };
    std::vector<Scored> scored;
    for (const auto& item : store.items()) {
        std::set<std::string> tag_terms;
        for (const auto& tag : item.tags) {
            auto tokens = text::term_set(tag);
            tag_terms.insert(tokens.begin(), tokens.end());
        }
        const auto body_terms = text::term_set(item.body);
        int score = 0;
        for (const auto& term : query_terms) {
            if (tag_terms.count(term)) score += 2;
            if (body_terms.count(term)) score += 1;
        }
        if (score > 0) scored.push_back({&item, score});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item->id < b.item->id;
    });

    std::vector<KnowledgeItem> selected;
    std::size_t total = 0;
    for (const auto& entry : scored) {
        if (total + entry.item->body.size() > char_budget) break;
        total += entry.item->body.size();
        selected.push_back(*entry.item);
    }
    return selected;
}

std::string render_knowledge(const std::vector<KnowledgeItem>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += "\n\n";
        out += "[" + kind_name(item.kind) + ":" + item.id + "] " + item.body;
    }
    return out;
}

std::string render_relevant(const KnowledgeStore& store, const std::string& query,
                            std::size_t char_budget) {
    return render_knowledge(select_relevant(store, query, char_budget));
}

}  // namespace dana
