#include "hsearch/terms.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "hsearch/error.hpp"

namespace hsearch {

const Stoplist& default_stoplist() {
    static const Stoplist list = {
        "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any", "are", "as",
        "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could",
        "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further", "had", "has",
        "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "i", "if", "in",
        "into", "is", "it", "its", "itself", "just", "me", "more", "most", "my", "myself", "no", "nor", "not",
        "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own",
        "same", "she", "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
        "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too", "under", "until",
        "up", "upon", "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
        "will", "with", "would", "you", "your", "yours", "yourself", "yourselves", "onto", "whilst", "within",
        "without", "via", "per", "approximately", "around", "near", "next",
    };
    return list;
}

namespace {

std::vector<std::string> split_words(const std::string& key) {
    std::vector<std::string> words;
    std::size_t begin = 0;
    while (begin <= key.size()) {
        const std::size_t space = key.find(' ', begin);
        const std::size_t end = space == std::string::npos ? key.size() : space;
        words.push_back(key.substr(begin, end - begin));
        begin = end + 1;
    }
    return words;
}

}  // namespace

std::vector<CandidateTerm> extract_candidates(std::span<const Document* const> docs, const Stoplist& stoplist,
                                              kernels::Execution execution) {
    std::vector<kernels::TokenView> views;
    views.reserve(docs.size());
    for (const Document* doc : docs) {
        views.emplace_back(doc->tokens);
    }
    const kernels::NgramOptions options{kMinTermWords, kMaxTermWords, &stoplist};
    kernels::NgramTable table = kernels::count_ngrams(views, options, execution);

    std::vector<std::pair<std::string, kernels::NgramStats>> sorted(table.begin(), table.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<CandidateTerm> candidates;
    candidates.reserve(sorted.size());
    std::unordered_map<std::string, std::size_t> index_of;
    index_of.reserve(sorted.size());
    for (auto& [key, stats] : sorted) {
        index_of.emplace(key, candidates.size());
        candidates.push_back({split_words(key), stats.frequency, stats.doc_frequency, {}, stats.nested_frequency});
    }

    // Every sub-window of an admissible n-gram is itself admissible, so each
    // proper sub-phrase of length >= 2 is present in the table.
    for (std::size_t parent = 0; parent < candidates.size(); ++parent) {
        const std::vector<std::string>& words = candidates[parent].words;
        std::vector<std::size_t> children;
        for (std::size_t len = kMinTermWords; len < words.size(); ++len) {
            for (std::size_t begin = 0; begin + len <= words.size(); ++begin) {
                const std::string key = join(std::span(words).subspan(begin, len), " ");
                children.push_back(index_of.at(key));
            }
        }
        std::sort(children.begin(), children.end());
        children.erase(std::unique(children.begin(), children.end()), children.end());
        for (std::size_t child : children) {
            candidates[child].nest_parents.push_back(parent);
        }
    }
    return candidates;
}

std::vector<CandidateTerm> extract_candidates(const Corpus& corpus, const Stoplist& stoplist) {
    std::vector<const Document*> docs;
    docs.reserve(corpus.size());
    for (const Document& doc : corpus.documents()) {
        docs.push_back(&doc);
    }
    return extract_candidates(docs, stoplist);
}

std::vector<ScoredTerm> cvalue_rank(std::span<const CandidateTerm> candidates) {
    std::vector<ScoredTerm> scored;
    for (const CandidateTerm& term : candidates) {
        const double length_weight = std::log2(static_cast<double>(term.words.size()));
        double frequency = static_cast<double>(term.frequency);
        if (!term.nest_parents.empty()) {
            double parent_total = 0.0;
            for (std::size_t parent : term.nest_parents) {
                parent_total += static_cast<double>(candidates[parent].frequency);
            }
            frequency -= parent_total / static_cast<double>(term.nest_parents.size());
        }
        const double cvalue = length_weight * frequency;
        if (cvalue > 0.0) {
            scored.push_back({term.words, cvalue, term.frequency, term.doc_frequency});
        }
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
        if (a.cvalue != b.cvalue) return a.cvalue > b.cvalue;
        if (a.frequency != b.frequency) return a.frequency > b.frequency;
        return a.words < b.words;
    });
    return scored;
}

std::vector<ScoredTerm> word_cloud(const Corpus& corpus, std::span<const std::string> subset, std::size_t top_k,
                                   const Stoplist& stoplist) {
    if (subset.empty()) {
        throw Error(ErrorCode::EmptySubset, "word cloud requested for an empty document set");
    }
    if (top_k == 0) {
        throw Error(ErrorCode::InvalidArgument, "top_k must be at least 1");
    }
    std::vector<const Document*> docs;
    docs.reserve(subset.size());
    std::unordered_set<std::string> seen;
    for (const std::string& id : subset) {
        if (seen.insert(id).second) {
            docs.push_back(&corpus.at(id));
        }
    }
    const std::vector<CandidateTerm> candidates = extract_candidates(docs, stoplist);
    std::vector<ScoredTerm> ranked = cvalue_rank(candidates);
    if (ranked.size() > top_k) {
        ranked.resize(top_k);
    }
    return ranked;
}

}  // namespace hsearch
