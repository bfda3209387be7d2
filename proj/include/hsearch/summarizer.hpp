#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsearch/annotations.hpp"
#include "hsearch/corpus.hpp"
#include "hsearch/embeddings.hpp"
#include "hsearch/kernels.hpp"
#include "hsearch/terms.hpp"

namespace hsearch {

struct SummaryConfig {
    double damping = 0.85;
    double pagerank_epsilon = 1e-6;  // L1 change between iterations
    std::size_t max_iterations = 100;
    double mmr_lambda = 0.7;
    std::size_t summary_size = 3;
    std::size_t min_doc_sentences = 5;
    double edge_threshold = 0.1;

    void validate() const;  // InvalidArgument
};

struct SentenceNode {
    std::size_t sentence_index = 0;
    std::vector<double> vector;
    std::vector<std::string> enriched_units;
};

// Symmetric weights in [0, 1] with a zero diagonal, stored row-major.
struct SentenceGraph {
    std::vector<SentenceNode> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
    double weight(std::size_t i, std::size_t j) const { return weights[i * nodes.size() + j]; }
};

// Phrase units (entity mentions and C-value terms) occurring in one sentence.
std::vector<std::string> sentence_units(const Document& doc, std::size_t sentence_index,
                                        std::span<const EntityMention> doc_mentions,
                                        std::span<const ScoredTerm> terms);

SentenceGraph build_graph(const Document& doc, std::span<const EntityMention> mentions,
                          std::span<const ScoredTerm> terms, const EmbeddingModel& model, const SummaryConfig& config);

// Graph from precomputed node vectors: max(0, cosine), zeroed below threshold.
SentenceGraph graph_from_nodes(std::vector<SentenceNode> nodes, double edge_threshold);

struct PageRankResult {
    std::vector<double> scores;
    std::size_t iterations = 0;
    bool converged = false;
};

// Weighted PageRank with uniform redistribution of dangling mass, iterated
// from the uniform vector until the L1 change drops below epsilon.
PageRankResult pagerank(const SentenceGraph& graph, const SummaryConfig& config,
                        kernels::Execution execution = kernels::default_execution());

// Greedy maximal marginal relevance: repeatedly picks the sentence with the
// largest lambda * relevance - (1 - lambda) * max similarity to the picks so
// far; ties go to the smaller sentence index.
std::vector<std::size_t> mmr_select(std::span<const std::pair<std::size_t, double>> candidates,
                                    const SentenceGraph& graph, const SummaryConfig& config);

struct Summary {
    std::vector<std::size_t> sentence_indexes;  // document order
    std::vector<std::string> sentences;
    bool bypassed = false;
};

Summary summarize(const Document& doc, std::span<const EntityMention> mentions, std::span<const ScoredTerm> terms,
                  const EmbeddingModel& model, const SummaryConfig& config);

}  // namespace hsearch
