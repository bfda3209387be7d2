#pragma once

#include <cstdint>
#include <vector>

namespace hsearch {

// Occurrences of one index key in one document. Positions are token indexes.
struct Posting {
    std::uint32_t doc = 0;  // document ordinal, ordinals follow doc_id order
    std::vector<std::uint32_t> positions;

    std::uint32_t tf() const noexcept { return static_cast<std::uint32_t>(positions.size()); }
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
    double w_word = 1.0;
    double w_entity = 1.5;
};

// Smoothed Robertson/Sparck-Jones idf, never negative.
double bm25_idf(std::size_t doc_count, std::size_t doc_frequency);

inline double bm25_term(double idf, double tf, double doc_length, double avg_doc_length, double k1, double b) {
    return idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * doc_length / avg_doc_length));
}

}  // namespace hsearch
