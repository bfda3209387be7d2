#include "hsearch/summarizer.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "hsearch/error.hpp"

namespace hsearch {

void SummaryConfig::validate() const {
    if (!(damping > 0.0 && damping < 1.0) || !(mmr_lambda >= 0.0 && mmr_lambda <= 1.0) || summary_size == 0 ||
        !(pagerank_epsilon > 0.0) || max_iterations == 0) {
        throw Error(ErrorCode::InvalidArgument, "invalid summary configuration");
    }
}

std::vector<std::string> sentence_units(const Document& doc, std::size_t sentence_index,
                                        std::span<const EntityMention> doc_mentions,
                                        std::span<const ScoredTerm> terms) {
    const SentenceSpan& span = doc.sentences.at(sentence_index);
    std::vector<std::string> units;
    for (const EntityMention& mention : doc_mentions) {
        if (mention.doc_id == doc.doc_id && mention.start >= span.start && mention.end <= span.end) {
            units.push_back(phrase_unit(normalized_words(mention.surface)));
        }
    }

    std::unordered_map<std::string, std::string> wanted;
    std::size_t longest = 0;
    for (const ScoredTerm& term : terms) {
        wanted.emplace(term.phrase(), phrase_unit(term.words));
        longest = std::max(longest, term.words.size());
    }
    std::vector<const Token*> tokens;
    for (const Token& token : doc.tokens) {
        if (token.sentence_index == sentence_index) tokens.push_back(&token);
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string key = tokens[i]->normalized;
        for (std::size_t len = 2; len <= longest && i + len <= tokens.size(); ++len) {
            key += ' ';
            key += tokens[i + len - 1]->normalized;
            if (const auto it = wanted.find(key); it != wanted.end()) units.push_back(it->second);
        }
    }
    return units;
}

SentenceGraph graph_from_nodes(std::vector<SentenceNode> nodes, double edge_threshold) {
    SentenceGraph graph;
    graph.nodes = std::move(nodes);
    const std::size_t n = graph.nodes.size();
    graph.weights.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double similarity = std::max(0.0, cosine(std::span<const double>(graph.nodes[i].vector),
                                                           std::span<const double>(graph.nodes[j].vector)));
            const double weight = similarity >= edge_threshold ? similarity : 0.0;
            graph.weights[i * n + j] = weight;
            graph.weights[j * n + i] = weight;
        }
    }
    return graph;
}

SentenceGraph build_graph(const Document& doc, std::span<const EntityMention> mentions,
                          std::span<const ScoredTerm> terms, const EmbeddingModel& model,
                          const SummaryConfig& config) {
    std::vector<SentenceNode> nodes;
    nodes.reserve(doc.sentences.size());
    std::vector<std::vector<std::string>> words(doc.sentences.size());
    for (const Token& token : doc.tokens) {
        words[token.sentence_index].push_back(token.normalized);
    }
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
        SentenceNode node;
        node.sentence_index = s;
        node.enriched_units = sentence_units(doc, s, mentions, terms);
        node.vector = sentence_vector(model, words[s], node.enriched_units);
        nodes.push_back(std::move(node));
    }
    return graph_from_nodes(std::move(nodes), config.edge_threshold);
}

PageRankResult pagerank(const SentenceGraph& graph, const SummaryConfig& config, kernels::Execution execution) {
    const std::size_t n = graph.size();
    PageRankResult result;
    if (n == 0) {
        result.converged = true;
        return result;
    }
    std::vector<double> transition(n * n, 0.0);
    std::vector<char> dangling(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        double out = 0.0;
        for (std::size_t k = 0; k < n; ++k) out += graph.weight(j, k);
        if (out > 0.0) {
            for (std::size_t k = 0; k < n; ++k) transition[j * n + k] = graph.weight(j, k) / out;
        } else {
            dangling[j] = 1;
        }
    }

    std::vector<double> current(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n, 0.0);
    while (result.iterations < config.max_iterations) {
        double dangling_mass = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (dangling[j]) dangling_mass += current[j];
        }
        kernels::pagerank_step(transition, current, next, config.damping, dangling_mass, execution);
        ++result.iterations;
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - current[i]);
        current.swap(next);
        if (change < config.pagerank_epsilon) {
            result.converged = true;
            break;
        }
    }
    result.scores = std::move(current);
    return result;
}

std::vector<std::size_t> mmr_select(std::span<const std::pair<std::size_t, double>> candidates,
                                    const SentenceGraph& graph, const SummaryConfig& config) {
    const double lambda = config.mmr_lambda;
    std::vector<std::pair<std::size_t, double>> remaining(candidates.begin(), candidates.end());
    std::vector<std::size_t> selected;
    while (selected.size() < config.summary_size && !remaining.empty()) {
        std::size_t best = 0;
        double best_score = 0.0;
        for (std::size_t r = 0; r < remaining.size(); ++r) {
            const auto [index, relevance] = remaining[r];
            double redundancy = 0.0;
            for (std::size_t chosen : selected) redundancy = std::max(redundancy, graph.weight(index, chosen));
            const double score = lambda * relevance - (1.0 - lambda) * redundancy;
            if (r == 0 || score > best_score || (score == best_score && index < remaining[best].first)) {
                best = r;
                best_score = score;
            }
        }
        selected.push_back(remaining[best].first);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return selected;
}

Summary summarize(const Document& doc, std::span<const EntityMention> mentions, std::span<const ScoredTerm> terms,
                  const EmbeddingModel& model, const SummaryConfig& config) {
    config.validate();
    Summary summary;
    if (doc.sentences.size() < config.min_doc_sentences) {
        summary.bypassed = true;
        for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
            summary.sentence_indexes.push_back(s);
            summary.sentences.emplace_back(doc.sentence_text(s));
        }
        return summary;
    }

    const SentenceGraph graph = build_graph(doc, mentions, terms, model, config);
    const PageRankResult ranks = pagerank(graph, config);

    // PageRank mass is ~1/N per sentence; rescale so the top sentence has
    // relevance 1 and lambda trades off against similarities in [0, 1].
    const double top = *std::max_element(ranks.scores.begin(), ranks.scores.end());
    std::vector<std::pair<std::size_t, double>> candidates;
    for (std::size_t s = 0; s < ranks.scores.size(); ++s) {
        candidates.emplace_back(s, top > 0.0 ? ranks.scores[s] / top : 0.0);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    summary.sentence_indexes = mmr_select(candidates, graph, config);
    std::sort(summary.sentence_indexes.begin(), summary.sentence_indexes.end());
    for (std::size_t s : summary.sentence_indexes) {
        summary.sentences.emplace_back(doc.sentence_text(s));
    }
    return summary;
}

}  // namespace hsearch
