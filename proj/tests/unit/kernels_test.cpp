#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "hsearch/kernels.hpp"

using namespace hsearch;

TEST(Kernels, AnalyzeSerialEqualsParallel) {
    std::mt19937_64 rng(1);
    std::vector<std::string> texts;
    for (int i = 0; i < 200; ++i) texts.push_back(fixtures::random_text(rng, 1 + rng() % 8));
    texts.push_back("");
    texts.push_back("Crème brûlée. Ünïcode façade!");
    const std::vector<std::string_view> views(texts.begin(), texts.end());
    const auto a = kernels::serial::analyze(views);
    const auto b = kernels::omp::analyze(views);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].tokens.size(), b[i].tokens.size());
        for (std::size_t t = 0; t < a[i].tokens.size(); ++t) {
            EXPECT_EQ(a[i].tokens[t].normalized, b[i].tokens[t].normalized);
            EXPECT_EQ(a[i].tokens[t].start, b[i].tokens[t].start);
            EXPECT_EQ(a[i].tokens[t].sentence_index, b[i].tokens[t].sentence_index);
        }
        ASSERT_EQ(a[i].sentences.size(), b[i].sentences.size());
    }
}

TEST(Kernels, NgramCountsSerialEqualsParallel) {
    const Corpus corpus = fixtures::random_corpus(2, 120, 8);
    std::vector<kernels::TokenView> docs;
    for (const Document& d : corpus.documents()) docs.emplace_back(d.tokens);
    kernels::NgramOptions options;
    const auto a = kernels::serial::count_ngrams(docs, options);
    const auto b = kernels::omp::count_ngrams(docs, options);
    ASSERT_EQ(a.size(), b.size());
    for (const auto& [key, stats] : a) {
        const auto it = b.find(key);
        ASSERT_NE(it, b.end()) << key;
        EXPECT_EQ(stats.frequency, it->second.frequency);
        EXPECT_EQ(stats.doc_frequency, it->second.doc_frequency);
        EXPECT_EQ(stats.nested_frequency, it->second.nested_frequency);
    }
}

TEST(Kernels, Bm25AccumulationIsBitwiseEqual) {
    std::mt19937_64 rng(3);
    const std::size_t n = 5000;
    std::vector<double> lengths(n);
    for (double& l : lengths) l = static_cast<double>(1 + rng() % 200);
    std::vector<Posting> postings;
    for (std::uint32_t d = 0; d < n; d += 1 + static_cast<std::uint32_t>(rng() % 3)) {
        Posting p{d, {}};
        const std::size_t tf = 1 + rng() % 4;
        for (std::size_t k = 0; k < tf; ++k) p.positions.push_back(static_cast<std::uint32_t>(k));
        postings.push_back(p);
    }
    std::vector<double> a(n, 0.5), b(n, 0.5);
    kernels::serial::accumulate_bm25(postings, 1.7, lengths, 100.0, Bm25Params{}, a);
    kernels::omp::accumulate_bm25(postings, 1.7, lengths, 100.0, Bm25Params{}, b);
    EXPECT_EQ(a, b);
}

TEST(Kernels, PagerankStepIsBitwiseEqual) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const std::size_t n = 300;
    std::vector<double> transition(n * n), current(n, 1.0 / n), a(n), b(n);
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += transition[j * n + i] = dist(rng);
        for (std::size_t i = 0; i < n; ++i) transition[j * n + i] /= sum;
    }
    kernels::serial::pagerank_step(transition, current, a, 0.85, 0.0);
    kernels::omp::pagerank_step(transition, current, b, 0.85, 0.0);
    EXPECT_EQ(a, b);
}

TEST(Kernels, DefaultExecutionSwitch) {
    const auto before = kernels::default_execution();
    kernels::set_default_execution(kernels::Execution::serial);
    EXPECT_EQ(kernels::default_execution(), kernels::Execution::serial);
    kernels::set_default_execution(before);
    EXPECT_GE(kernels::max_threads(), 1);
}
