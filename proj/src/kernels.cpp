#include "hsearch/kernels.hpp"

#include <atomic>
#include <cmath>

#include <omp.h>

namespace hsearch {

double bm25_idf(std::size_t doc_count, std::size_t doc_frequency) {
    const double n = static_cast<double>(doc_count);
    const double df = static_cast<double>(doc_frequency);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

}  // namespace hsearch

namespace hsearch::kernels {

namespace {

std::atomic<Execution> g_execution{Execution::parallel};

AnalyzedText analyze_one(std::string_view text) {
    AnalyzedText out;
    out.sentences = segment_sentences(text);
    out.tokens = tokenize(text, out.sentences);
    return out;
}

// Counts one document's n-grams into `table`, doc frequency included.
void count_document(TokenView tokens, const NgramOptions& options, NgramTable& table) {
    NgramTable local;
    std::vector<char> admissible(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& word = tokens[i].normalized;
        const bool stopped = options.stoplist != nullptr && options.stoplist->contains(word);
        admissible[i] = !stopped && !is_numeric(word);
    }

    std::size_t sentence_begin = 0;
    while (sentence_begin < tokens.size()) {
        std::size_t sentence_end = sentence_begin;
        while (sentence_end < tokens.size() &&
               tokens[sentence_end].sentence_index == tokens[sentence_begin].sentence_index) {
            ++sentence_end;
        }
        for (std::size_t i = sentence_begin; i < sentence_end; ++i) {
            std::string key;
            for (std::size_t len = 1; len <= options.max_length && i + len <= sentence_end; ++len) {
                const std::size_t last = i + len - 1;
                if (!admissible[last]) {
                    break;
                }
                if (len > 1) {
                    key.push_back(' ');
                }
                key += tokens[last].normalized;
                if (len < options.min_length) {
                    continue;
                }
                NgramStats& stats = local[key];
                ++stats.frequency;
                const bool extends_left = i > sentence_begin && admissible[i - 1];
                const bool extends_right = last + 1 < sentence_end && admissible[last + 1];
                if (len < options.max_length && (extends_left || extends_right)) {
                    ++stats.nested_frequency;
                }
            }
        }
        sentence_begin = sentence_end;
    }

    for (auto& [key, stats] : local) {
        NgramStats& target = table[key];
        target.frequency += stats.frequency;
        target.nested_frequency += stats.nested_frequency;
        target.doc_frequency += 1;
    }
}

void merge_into(NgramTable& target, const NgramTable& source) {
    for (const auto& [key, stats] : source) {
        NgramStats& out = target[key];
        out.frequency += stats.frequency;
        out.doc_frequency += stats.doc_frequency;
        out.nested_frequency += stats.nested_frequency;
    }
}

}  // namespace

Execution default_execution() noexcept { return g_execution.load(std::memory_order_relaxed); }

void set_default_execution(Execution execution) noexcept { g_execution.store(execution, std::memory_order_relaxed); }

int max_threads() noexcept { return omp_get_max_threads(); }

namespace serial {

std::vector<AnalyzedText> analyze(std::span<const std::string_view> texts) {
    std::vector<AnalyzedText> out;
    out.reserve(texts.size());
    for (std::string_view text : texts) {
        out.push_back(analyze_one(text));
    }
    return out;
}

NgramTable count_ngrams(std::span<const TokenView> docs, const NgramOptions& options) {
    NgramTable table;
    for (TokenView doc : docs) {
        count_document(doc, options, table);
    }
    return table;
}

void accumulate_bm25(std::span<const Posting> postings, double idf, std::span<const double> doc_lengths,
                     double avg_doc_length, const Bm25Params& params, std::span<double> scores) {
    for (const Posting& posting : postings) {
        scores[posting.doc] +=
            bm25_term(idf, posting.tf(), doc_lengths[posting.doc], avg_doc_length, params.k1, params.b);
    }
}

void pagerank_step(std::span<const double> transition, std::span<const double> current, std::span<double> next,
                   double damping, double dangling_mass) {
    const std::size_t n = current.size();
    const double base = (1.0 - damping) / static_cast<double>(n) + damping * dangling_mass / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double inflow = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            inflow += transition[j * n + i] * current[j];
        }
        next[i] = base + damping * inflow;
    }
}

}  // namespace serial

namespace omp {

std::vector<AnalyzedText> analyze(std::span<const std::string_view> texts) {
    std::vector<AnalyzedText> out(texts.size());
    const auto count = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        out[i] = analyze_one(texts[i]);
    }
    return out;
}

NgramTable count_ngrams(std::span<const TokenView> docs, const NgramOptions& options) {
    std::vector<NgramTable> partial(static_cast<std::size_t>(omp_get_max_threads()));
    const auto count = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel
    {
        NgramTable& mine = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(dynamic, 8)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            count_document(docs[i], options, mine);
        }
    }
    // Integer sums, so the merge order does not affect the result.
    NgramTable table = std::move(partial.front());
    for (std::size_t t = 1; t < partial.size(); ++t) {
        merge_into(table, partial[t]);
    }
    return table;
}

void accumulate_bm25(std::span<const Posting> postings, double idf, std::span<const double> doc_lengths,
                     double avg_doc_length, const Bm25Params& params, std::span<double> scores) {
    // Documents are distinct within one posting list, so writes never collide.
    const auto count = static_cast<std::ptrdiff_t>(postings.size());
#pragma omp parallel for schedule(static) if (count > 4096)
    for (std::ptrdiff_t p = 0; p < count; ++p) {
        const Posting& posting = postings[p];
        scores[posting.doc] +=
            bm25_term(idf, posting.tf(), doc_lengths[posting.doc], avg_doc_length, params.k1, params.b);
    }
}

void pagerank_step(std::span<const double> transition, std::span<const double> current, std::span<double> next,
                   double damping, double dangling_mass) {
    const std::size_t n = current.size();
    const double base = (1.0 - damping) / static_cast<double>(n) + damping * dangling_mass / static_cast<double>(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (count > 64)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        double inflow = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            inflow += transition[j * n + static_cast<std::size_t>(i)] * current[j];
        }
        next[i] = base + damping * inflow;
    }
}

}  // namespace omp

std::vector<AnalyzedText> analyze(std::span<const std::string_view> texts, Execution execution) {
    return execution == Execution::parallel ? omp::analyze(texts) : serial::analyze(texts);
}

NgramTable count_ngrams(std::span<const TokenView> docs, const NgramOptions& options, Execution execution) {
    return execution == Execution::parallel ? omp::count_ngrams(docs, options) : serial::count_ngrams(docs, options);
}

void accumulate_bm25(std::span<const Posting> postings, double idf, std::span<const double> doc_lengths,
                     double avg_doc_length, const Bm25Params& params, std::span<double> scores, Execution execution) {
    if (execution == Execution::parallel) {
        omp::accumulate_bm25(postings, idf, doc_lengths, avg_doc_length, params, scores);
    } else {
        serial::accumulate_bm25(postings, idf, doc_lengths, avg_doc_length, params, scores);
    }
}

void pagerank_step(std::span<const double> transition, std::span<const double> current, std::span<double> next,
                   double damping, double dangling_mass, Execution execution) {
    if (execution == Execution::parallel) {
        omp::pagerank_step(transition, current, next, damping, dangling_mass);
    } else {
        serial::pagerank_step(transition, current, next, damping, dangling_mass);
    }
}

}  // namespace hsearch::kernels
