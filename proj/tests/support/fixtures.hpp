#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hsearch/annotations.hpp"
#include "hsearch/corpus.hpp"

namespace fixtures {

inline hsearch::Corpus corpus(const std::vector<std::pair<std::string, std::string>>& docs) {
    std::vector<hsearch::Document> out;
    for (const auto& [id, text] : docs) out.push_back(hsearch::make_document(id, "", text));
    return hsearch::Corpus(std::move(out));
}

// Every occurrence of `surface` in the document body as a mention.
inline std::vector<hsearch::EntityMention> mentions_of(const hsearch::Document& doc, const std::string& surface,
                                                       const std::string& category) {
    std::vector<hsearch::EntityMention> out;
    for (std::size_t at = doc.body.find(surface); at != std::string::npos; at = doc.body.find(surface, at + 1)) {
        out.push_back({doc.doc_id, category, at, at + surface.size(), surface, hsearch::normalize_phrase(surface)});
    }
    return out;
}

// Small-vocabulary random prose: repeated phrases, stopwords and numbers so
// that n-grams nest and collide.
inline std::string random_text(std::mt19937_64& rng, std::size_t sentences) {
    static const std::vector<std::string> words = {
        "scaffold", "tube",    "fell",  "from",  "the",    "ladder", "wet",     "floor", "worker", "slipped",
        "on",       "knife",   "blade", "cut",   "hand",   "angle",  "grinder", "disc",  "of",     "and",
        "site",     "manager", "12",    "metre", "steel",  "beam",   "crane",   "load",  "fixing", "roof",
    };
    static const std::vector<std::vector<std::string>> phrases = {
        {"scaffold", "tube"}, {"wet", "floor"}, {"knife", "blade"}, {"angle", "grinder", "disc"},
        {"site", "manager"},  {"steel", "beam", "fixing"},
    };
    std::string text;
    for (std::size_t s = 0; s < sentences; ++s) {
        std::vector<std::string> sentence;
        const std::size_t len = 4 + rng() % 9;
        while (sentence.size() < len) {
            if (rng() % 3 == 0) {
                const auto& p = phrases[rng() % phrases.size()];
                sentence.insert(sentence.end(), p.begin(), p.end());
            } else {
                sentence.push_back(words[rng() % words.size()]);
            }
        }
        std::string out = sentence.front();
        out[0] = static_cast<char>(out[0] >= 'a' && out[0] <= 'z' ? out[0] - 'a' + 'A' : out[0]);
        for (std::size_t i = 1; i < sentence.size(); ++i) out += " " + sentence[i];
        if (out[0] >= '0' && out[0] <= '9') out = "Then " + out;
        text += (text.empty() ? "" : " ") + out + ".";
    }
    return text;
}

inline hsearch::Corpus random_corpus(std::uint64_t seed, std::size_t docs, std::size_t max_sentences = 6) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<std::string, std::string>> records;
    for (std::size_t d = 0; d < docs; ++d) {
        char id[16];
        std::snprintf(id, sizeof(id), "d%03zu", d);
        records.emplace_back(id, random_text(rng, 1 + rng() % max_sentences));
    }
    return corpus(records);
}

}  // namespace fixtures
