#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "hsearch/corpus.hpp"
#include "hsearch/kernels.hpp"

namespace hsearch {

using Stoplist = std::unordered_set<std::string>;

// English function words plus a few report boilerplate words.
const Stoplist& default_stoplist();

inline constexpr std::size_t kMinTermWords = 2;
inline constexpr std::size_t kMaxTermWords = 6;

struct CandidateTerm {
    std::vector<std::string> words;
    std::size_t frequency = 0;
    std::size_t doc_frequency = 0;
    // Indexes (into the candidate list) of longer candidates containing this one.
    std::vector<std::size_t> nest_parents;
    std::size_t nested_frequency = 0;

    std::string phrase() const { return join(words, " "); }
};

struct ScoredTerm {
    std::vector<std::string> words;
    double cvalue = 0.0;
    std::size_t frequency = 0;
    std::size_t doc_frequency = 0;

    std::string phrase() const { return join(words, " "); }
};

// Contiguous 2..6-grams inside one sentence with no stopword and no purely
// numeric token. The result is sorted by phrase.
std::vector<CandidateTerm> extract_candidates(std::span<const Document* const> docs, const Stoplist& stoplist,
                                              kernels::Execution execution = kernels::default_execution());
std::vector<CandidateTerm> extract_candidates(const Corpus& corpus, const Stoplist& stoplist);

// log2(|a|) * f(a) for terms with no parent, otherwise
// log2(|a|) * (f(a) - mean f over parents). Sorted by cvalue, then frequency
// (both descending), then phrase; terms scoring <= 0 are dropped.
std::vector<ScoredTerm> cvalue_rank(std::span<const CandidateTerm> candidates);

// C-value ranking restricted to `subset`. EmptySubset when the subset is
// empty, UnknownDocId for ids outside the corpus.
std::vector<ScoredTerm> word_cloud(const Corpus& corpus, std::span<const std::string> subset, std::size_t top_k,
                                   const Stoplist& stoplist = default_stoplist());

}  // namespace hsearch
