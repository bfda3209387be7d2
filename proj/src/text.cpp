#include "hsearch/text.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

namespace hsearch {

namespace utf8 {

Decoded decode(std::string_view text, std::size_t pos) {
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
    const unsigned char lead = byte(pos);
    if (lead < 0x80) {
        return {lead, 1};
    }
    std::size_t length = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) {
        length = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        length = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        length = 4;
        cp = lead & 0x07;
    } else {
        return {0xFFFD, 1};
    }
    if (pos + length > text.size()) {
        return {0xFFFD, 1};
    }
    for (std::size_t i = 1; i < length; ++i) {
        const unsigned char cont = byte(pos + i);
        if ((cont & 0xC0) != 0x80) {
            return {0xFFFD, 1};
        }
        cp = (cp << 6) | (cont & 0x3F);
    }
    return {cp, length};
}

void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Without a Unicode database we treat every non-ASCII code point as a
// letter except for the punctuation, symbol and space blocks listed here.
bool is_word_char(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    if (cp < 0xC0) {
        return cp == 0xAA || cp == 0xB2 || cp == 0xB3 || cp == 0xB5 || cp == 0xB9 || cp == 0xBA;
    }
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;
    if (cp >= 0x3000 && cp <= 0x303F) return false;
    if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
    if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
    if (cp >= 0xFF1A && cp <= 0xFF20) return false;
    if (cp == 0xFEFF || cp == 0xFFFD) return false;
    if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;
    return true;
}

bool is_upper(char32_t cp) {
    if (cp < 0x80) return cp >= 'A' && cp <= 'Z';
    if (cp >= 0xC0 && cp <= 0xDE) return cp != 0xD7;
    if (cp >= 0x100 && cp <= 0x17F) return to_lower(cp) != cp;
    if (cp >= 0x391 && cp <= 0x3A9) return cp != 0x3A2;
    if (cp >= 0x400 && cp <= 0x42F) return true;
    return false;
}

char32_t to_lower(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
    }
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp == 0x178) return 0xFF;
    if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
    return cp;
}

}  // namespace utf8

std::string to_lower(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t pos = 0; pos < text.size();) {
        const auto unit = static_cast<unsigned char>(text[pos]);
        if (unit < 0x80) {
            out.push_back(static_cast<char>(utf8::to_lower(unit)));
            ++pos;
            continue;
        }
        const auto [cp, len] = utf8::decode(text, pos);
        if (cp == 0xFFFD && len == 1) {
            out.push_back(text[pos]);
        } else {
            utf8::append(out, utf8::to_lower(cp));
        }
        pos += len;
    }
    return out;
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string normalize_phrase(std::string_view text) {
    std::string lowered = to_lower(text);
    std::string out;
    out.reserve(lowered.size());
    bool pending_space = false;
    for (char c : lowered) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

const std::vector<std::string>& abbreviations() {
    static const std::vector<std::string> list = {
        "approx", "apr", "aug", "ave", "capt", "cf", "co", "corp", "dec", "dept", "dr",
        "e.g", "eg", "est", "etc", "feb", "fig", "ft", "gen", "hr", "i.e", "ie", "inc",
        "jan", "jr", "jul", "jun", "lt", "ltd", "mar", "max", "min", "mr", "mrs", "ms",
        "mt", "no", "nov", "oct", "op", "ops", "prof", "rd", "ref", "sep", "sept", "sgt",
        "sr", "st", "supt", "vs", "approx", "yr",
    };
    return list;
}

namespace {

bool is_abbreviation(std::string_view word) {
    static const std::unordered_set<std::string> set(abbreviations().begin(), abbreviations().end());
    const std::string lowered = to_lower(word);
    if (set.contains(lowered)) {
        return true;
    }
    // Single-letter initials ("J. Smith").
    const auto [cp, len] = utf8::decode(lowered, 0);
    return !lowered.empty() && len == lowered.size() && utf8::is_word_char(cp);
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_ascii_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_ascii_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }

// Skips closing quotes/brackets, including the typographic U+2019 and U+201D.
std::size_t skip_closers(std::string_view text, std::size_t pos) {
    while (pos < text.size()) {
        if (is_ascii_closer(text[pos])) {
            ++pos;
            continue;
        }
        const auto [cp, len] = utf8::decode(text, pos);
        if (cp == 0x2019 || cp == 0x201D) {
            pos += len;
            continue;
        }
        break;
    }
    return pos;
}

std::size_t skip_openers(std::string_view text, std::size_t pos) {
    while (pos < text.size()) {
        if (is_ascii_opener(text[pos])) {
            ++pos;
            continue;
        }
        const auto [cp, len] = utf8::decode(text, pos);
        if (cp == 0x2018 || cp == 0x201C) {
            pos += len;
            continue;
        }
        break;
    }
    return pos;
}

std::size_t skip_space(std::string_view text, std::size_t pos) {
    while (pos < text.size() && is_space(text[pos])) {
        ++pos;
    }
    return pos;
}

// The whitespace-delimited word ending right before the period at `period`,
// stripped of leading openers.
std::string_view word_before(std::string_view text, std::size_t period, std::size_t floor) {
    std::size_t begin = period;
    while (begin > floor && !is_space(text[begin - 1])) {
        --begin;
    }
    begin = skip_openers(text, begin);
    if (begin >= period) {
        return {};
    }
    return text.substr(begin, period - begin);
}

}  // namespace

std::vector<SentenceSpan> segment_sentences(std::string_view text) {
    std::vector<SentenceSpan> spans;
    std::size_t start = skip_space(text, 0);
    if (start == text.size()) {
        return spans;
    }
    const auto emit = [&](std::size_t end) {
        spans.push_back({spans.size(), start, end});
    };

    std::size_t i = start;
    while (i < text.size()) {
        if (!is_terminal(text[i])) {
            ++i;
            continue;
        }
        std::size_t run_end = i;
        while (run_end < text.size() && is_terminal(text[run_end])) {
            ++run_end;
        }
        const std::size_t end = skip_closers(text, run_end);
        if (end < text.size() && !is_space(text[end])) {
            i = run_end;
            continue;
        }
        const std::size_t next = skip_space(text, end);
        if (next == text.size()) {
            emit(end);
            return spans;
        }
        const bool single_period = run_end - i == 1 && text[i] == '.';
        const bool abbreviated = single_period && is_abbreviation(word_before(text, i, start));
        const std::size_t first = skip_openers(text, next);
        const bool upper_next = first < text.size() && utf8::is_upper(utf8::decode(text, first).codepoint);
        if (upper_next && !abbreviated) {
            emit(end);
            start = next;
        }
        i = next;
    }

    std::size_t end = text.size();
    while (end > start && is_space(text[end - 1])) {
        --end;
    }
    if (end > start) {
        emit(end);
    }
    return spans;
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto [cp, len] = utf8::decode(text, pos);
        if (!utf8::is_word_char(cp)) {
            pos += len;
            continue;
        }
        const std::size_t start = pos;
        pos += len;
        while (pos < text.size()) {
            const auto [next, next_len] = utf8::decode(text, pos);
            if (utf8::is_word_char(next)) {
                pos += next_len;
                continue;
            }
            if (next == '-' && pos + 1 < text.size()) {
                const auto after = utf8::decode(text, pos + 1);
                if (utf8::is_word_char(after.codepoint)) {
                    pos += 1 + after.length;
                    continue;
                }
            }
            break;
        }
        Token token;
        token.surface = std::string(text.substr(start, pos - start));
        token.normalized = to_lower(token.surface);
        token.start = start;
        token.end = pos;
        tokens.push_back(std::move(token));
    }
    return tokens;
}

std::vector<Token> tokenize(std::string_view text, std::span<const SentenceSpan> sentences) {
    std::vector<Token> tokens = tokenize(text);
    std::size_t current = 0;
    for (Token& token : tokens) {
        while (current + 1 < sentences.size() && token.start >= sentences[current].end) {
            ++current;
        }
        token.sentence_index = sentences.empty() ? 0 : sentences[current].index;
    }
    return tokens;
}

std::vector<std::string> normalized_words(std::string_view text) {
    std::vector<std::string> words;
    for (Token& token : tokenize(text)) {
        words.push_back(std::move(token.normalized));
    }
    return words;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

bool is_numeric(std::string_view token) {
    return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
        return (c >= '0' && c <= '9') || c == '-';
    });
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
    std::uint64_t hash = seed;
    for (char c : data) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
    return buffer;
}

}  // namespace hsearch
