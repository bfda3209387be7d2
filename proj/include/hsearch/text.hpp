#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Text primitives shared by every module. All offsets are byte offsets
// into the original UTF-8 string.
namespace hsearch {

struct SentenceSpan {
    std::size_t index = 0;
    std::size_t start = 0;  // inclusive
    std::size_t end = 0;    // exclusive

    friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

struct Token {
    std::string surface;
    std::string normalized;
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t sentence_index = 0;

    friend bool operator==(const Token&, const Token&) = default;
};

namespace utf8 {

struct Decoded {
    char32_t codepoint;
    std::size_t length;
};

// Invalid sequences decode as U+FFFD with length 1.
Decoded decode(std::string_view text, std::size_t pos);
void append(std::string& out, char32_t cp);

bool is_word_char(char32_t cp);
bool is_upper(char32_t cp);
char32_t to_lower(char32_t cp);

}  // namespace utf8

std::string to_lower(std::string_view text);

// Lowercase and collapse runs of whitespace into single spaces (trimmed).
std::string normalize_phrase(std::string_view text);

bool is_space(char c);

// Abbreviations (lowercase, without the final period) that never end a sentence.
const std::vector<std::string>& abbreviations();

std::vector<SentenceSpan> segment_sentences(std::string_view text);

// Maximal runs of letters/digits; a hyphen joining two word characters is
// kept inside the token. sentence_index is 0 for every token.
std::vector<Token> tokenize(std::string_view text);

// As above, with each token's sentence_index taken from `sentences`.
std::vector<Token> tokenize(std::string_view text, std::span<const SentenceSpan> sentences);

// Normalized token strings of `text`, convenient for phrase keys.
std::vector<std::string> normalized_words(std::string_view text);

std::string join(std::span<const std::string> parts, std::string_view sep);

bool is_numeric(std::string_view token);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

}  // namespace hsearch
