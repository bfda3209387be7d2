#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hsearch/posting.hpp"
#include "hsearch/text.hpp"

// Data-parallel inner loops. Every kernel has a serial reference version and
// an OpenMP version that produce bitwise-identical output; the dispatching
// overloads pick one according to `Execution`.
namespace hsearch::kernels {

enum class Execution { serial, parallel };

Execution default_execution() noexcept;
void set_default_execution(Execution execution) noexcept;
int max_threads() noexcept;

struct AnalyzedText {
    std::vector<SentenceSpan> sentences;
    std::vector<Token> tokens;
};

struct NgramStats {
    std::size_t frequency = 0;
    std::size_t doc_frequency = 0;
    // Occurrences that sit inside an occurrence of a longer admissible n-gram.
    std::size_t nested_frequency = 0;
};

// Key: normalized words joined by single spaces.
using NgramTable = std::unordered_map<std::string, NgramStats>;

struct NgramOptions {
    std::size_t min_length = 2;
    std::size_t max_length = 6;
    const std::unordered_set<std::string>* stoplist = nullptr;
};

using TokenView = std::span<const Token>;

namespace serial {
std::vector<AnalyzedText> analyze(std::span<const std::string_view> texts);
NgramTable count_ngrams(std::span<const TokenView> docs, const NgramOptions& options);
void accumulate_bm25(std::span<const Posting> postings, double idf, std::span<const double> doc_lengths,
                     double avg_doc_length, const Bm25Params& params, std::span<double> scores);
void pagerank_step(std::span<const double> transition, std::span<const double> current, std::span<double> next,
                   double damping, double dangling_mass);
}  // namespace serial

namespace omp {
std::vector<AnalyzedText> analyze(std::span<const std::string_view> texts);
NgramTable count_ngrams(std::span<const TokenView> docs, const NgramOptions& options);
void accumulate_bm25(std::span<const Posting> postings, double idf, std::span<const double> doc_lengths,
                     double avg_doc_length, const Bm25Params& params, std::span<double> scores);
void pagerank_step(std::span<const double> transition, std::span<const double> current, std::span<double> next,
                   double damping, double dangling_mass);
}  // namespace omp

std::vector<AnalyzedText> analyze(std::span<const std::string_view> texts, Execution execution = default_execution());

NgramTable count_ngrams(std::span<const TokenView> docs, const NgramOptions& options,
                        Execution execution = default_execution());

// scores[p.doc] += bm25_term(...) for each posting p.
void accumulate_bm25(std::span<const Posting> postings, double idf, std::span<const double> doc_lengths,
                     double avg_doc_length, const Bm25Params& params, std::span<double> scores,
                     Execution execution = default_execution());

// One weighted PageRank iteration. `transition` is the N x N row-normalized
// weight matrix (row j holds w_ji / out_j, all zero for dangling rows) and
// `dangling_mass` the total rank currently held by dangling nodes.
void pagerank_step(std::span<const double> transition, std::span<const double> current, std::span<double> next,
                   double damping, double dangling_mass, Execution execution = default_execution());

}  // namespace hsearch::kernels
