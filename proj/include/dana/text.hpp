#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dana::text {

// ASCII case fold. Retrieval and grading are byte-oriented; multi-byte
// UTF-8 sequences pass through untouched.
std::string to_lower(std::string_view s);

std::string trim(std::string_view s);

// Collapses every run of whitespace to a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

// Term extraction shared by knowledge retrieval, the program finder and
// passage retrieval: split on whitespace/punctuation, case-fold, drop
// terms shorter than 2 bytes. Bytes >= 0x80 count as word characters so
// non-ASCII text stays intact.
std::vector<std::string> terms(std::string_view s);
std::set<std::string> term_set(std::string_view s);
std::unordered_map<std::string, int> term_counts(std::string_view s);

bool is_valid_utf8(std::string_view s);

// Largest prefix of at most max_bytes that does not cut a UTF-8 sequence.
std::size_t utf8_clip(std::string_view s, std::size_t max_bytes);

// FNV-1a 64-bit, hex-encoded. Used as a cheap content fingerprint.
std::string fingerprint(std::string_view bytes);

}  // namespace dana::text
