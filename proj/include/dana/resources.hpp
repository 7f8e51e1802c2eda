#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace dana {

struct Passage {
    std::string doc_id;
    int index = 0;
    std::string text;

    bool operator==(const Passage&) const = default;
};

struct Document {
    std::string id;     // path relative to the resource root
    std::string title;  // file stem
    std::string body;
    std::vector<Passage> passages;  // partition body in order
};

inline constexpr std::size_t kDefaultPassageChars = 1500;

// Immutable collection of plain-text documents with a lexical retrieval index.
class ResourceSet {
public:
    ResourceSet() = default;

    // Loads every .txt/.md under dir (recursive, sorted relative paths).
    // Bodies split into passages of <= passage_chars at paragraph boundaries,
    // hard-splitting oversized paragraphs on UTF-8 boundaries; passages
    // concatenate back to the exact body. Throws IoError / EncodingError.
    static ResourceSet load(const std::filesystem::path& dir,
                            std::size_t passage_chars = kDefaultPassageChars);

    const std::vector<Document>& documents() const { return docs_; }
    bool empty() const { return docs_.empty(); }
    std::size_t passage_count() const { return passage_count_; }

    friend std::vector<Passage> retrieve(const ResourceSet& set, const std::string& query, int k);

private:
    struct IndexedPassage {
        const Passage* passage;
        std::unordered_map<std::string, int> term_frequency;
    };

    void build_index();

    std::vector<Document> docs_;
    std::vector<IndexedPassage> index_;
    std::unordered_map<std::string, int> document_frequency_;
    std::size_t passage_count_ = 0;
};

// score(p) = sum over distinct query terms t of tf(t,p) * ln(1 + N/df(t));
// zero scores excluded; order (score desc, doc_id asc, index asc); top k.
std::vector<Passage> retrieve(const ResourceSet& set, const std::string& query, int k);

// Exposed for reuse and tests: exact-coverage paragraph packing.
std::vector<std::string> split_passages(const std::string& body, std::size_t passage_chars);

}  // namespace dana
