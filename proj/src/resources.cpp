#include "dana/resources.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dana/errors.hpp"
#include "dana/text.hpp"

namespace dana {

namespace {

// Segments of body, each a paragraph plus its trailing newline run, whose
// concatenation is exactly body.
std::vector<std::string_view> paragraph_segments(const std::string& body) {
    std::vector<std::string_view> segments;
    std::string_view view(body);
    std::size_t start = 0;
    while (start < view.size()) {
        std::size_t boundary = view.find("\n\n", start);
        std::size_t end;
        if (boundary == std::string_view::npos) {
            end = view.size();
        } else {
            end = boundary;
            while (end < view.size() && view[end] == '\n') ++end;
        }
        segments.push_back(view.substr(start, end - start));
        start = end;
    }
    return segments;
}

}  // namespace

std::vector<std::string> split_passages(const std::string& body, std::size_t passage_chars) {
    std::vector<std::string> passages;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            passages.push_back(std::move(current));
            current.clear();
        }
    };
    for (std::string_view segment : paragraph_segments(body)) {
        if (current.size() + segment.size() <= passage_chars) {
            current += segment;
            continue;
        }
        flush();
        if (segment.size() <= passage_chars) {
            current = std::string(segment);
            continue;
        }
        // Oversized paragraph: hard-split on UTF-8 boundaries.
        while (!segment.empty()) {
            std::size_t take = text::utf8_clip(segment, passage_chars);
            if (take == 0) take = std::min(segment.size(), passage_chars);  // not UTF-8 aligned
            passages.emplace_back(segment.substr(0, take));
            segment.remove_prefix(take);
        }
    }
    flush();
    return passages;
}

ResourceSet ResourceSet::load(const std::filesystem::path& dir, std::size_t passage_chars) {
    if (!std::filesystem::exists(dir)) throw IoError("resource directory missing: " + dir.string());
    if (!std::filesystem::is_directory(dir)) {
        throw IoError("resource path is not a directory: " + dir.string());
    }

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension();
        if (ext == ".txt" || ext == ".md") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    ResourceSet set;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        if (!in) throw IoError("cannot open resource file: " + file.string());
        std::ostringstream buffer;
        buffer << in.rdbuf();

        Document doc;
        doc.id = std::filesystem::relative(file, dir).generic_string();
        doc.title = file.stem().string();
        doc.body = buffer.str();
        if (!text::is_valid_utf8(doc.body)) {
            throw EncodingError("resource file is not valid UTF-8: " + file.string());
        }
        int index = 0;
        for (auto& chunk : split_passages(doc.body, passage_chars)) {
            doc.passages.push_back({doc.id, index, std::move(chunk)});
            ++index;
        }
        set.docs_.push_back(std::move(doc));
    }
    set.build_index();
    return set;
}

void ResourceSet::build_index() {
    index_.clear();
    document_frequency_.clear();
    passage_count_ = 0;
    for (const auto& doc : docs_) {
        for (const auto& passage : doc.passages) {
            IndexedPassage indexed{&passage, text::term_counts(passage.text)};
            for (const auto& [term, count] : indexed.term_frequency) {
                (void)count;
                ++document_frequency_[term];
            }
            index_.push_back(std::move(indexed));
            ++passage_count_;
        }
    }
}

std::vector<Passage> retrieve(const ResourceSet& set, const std::string& query, int k) {
    if (k < 1) throw ValidationError("k must be >= 1");
    const auto query_terms = text::term_set(query);  // ordered: deterministic summation
    const double total = static_cast<double>(set.passage_count_);

    struct Scored {
        const Passage* passage;
        double score;
    };
    std::vector<Scored> scored;
    for (const auto& indexed : set.index_) {
        double score = 0.0;
        for (const auto& term : query_terms) {
            auto tf = indexed.term_frequency.find(term);
            if (tf == indexed.term_frequency.end()) continue;
            const auto df = set.document_frequency_.find(term);
            score += static_cast<double>(tf->second) *
                     std::log(1.0 + total / static_cast<double>(df->second));
        }
        if (score > 0.0) scored.push_back({indexed.passage, score});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.passage->doc_id != b.passage->doc_id) return a.passage->doc_id < b.passage->doc_id;
        return a.passage->index < b.passage->index;
    });
    if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));

    std::vector<Passage> out;
    out.reserve(scored.size());
    for (const auto& entry : scored) out.push_back(*entry.passage);
    return out;
}

}  // namespace dana
