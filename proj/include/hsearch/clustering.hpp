#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsearch/annotations.hpp"
#include "hsearch/corpus.hpp"
#include "hsearch/terms.hpp"

namespace hsearch {

struct ClusteringConfig {
    std::size_t min_support = 3;
    std::size_t max_clusters = 8;
    double alpha = 0.5;  // penalty per already-covered document
    double min_fraction = 0.02;
    std::size_t label_terms = 50;  // C-value terms offered as labels
};

struct LabelCandidate {
    std::string phrase;
    std::vector<std::string> docs;  // sorted, unique
};

struct Cluster {
    std::string cluster_id;
    std::string label;
    std::vector<std::string> members;  // in result order
};

struct ClusterSet {
    std::vector<Cluster> clusters;
    std::string residual_id;
    std::vector<std::string> residual;  // in result order

    const Cluster* find(std::string_view cluster_id) const;
};

inline constexpr std::string_view kResidualLabel = "other";

// Hex FNV-1a of the normalized query and the label.
std::string cluster_id(std::string_view query, std::string_view label);

// Entity surfaces and C-value term phrases found in the result documents,
// each with the exact set of result documents containing it. Phrases in
// fewer than min_support documents are dropped. Sorted by phrase.
std::vector<LabelCandidate> candidate_labels(const Corpus& corpus, std::span<const std::string> result_docs,
                                             std::span<const EntityMention> mentions,
                                             std::span<const ScoredTerm> terms, const ClusteringConfig& config);

// max(min_support, ceil(min_fraction * result size)).
std::size_t stopping_threshold(std::size_t result_size, const ClusteringConfig& config);

// Greedy selection by coverage gain with a size-adaptive stopping threshold,
// then a hard assignment of each document to its earliest selected label.
ClusterSet select_clusters(std::string_view query, std::span<const LabelCandidate> candidates,
                           std::span<const std::string> result_docs, const ClusteringConfig& config);

// Subsequence of `ranked` restricted to the cluster (or the residual).
// UnknownClusterId if the id belongs to neither.
std::vector<std::string> filter_by_cluster(std::span<const std::string> ranked, const ClusterSet& clusters,
                                           std::string_view cluster_id);

}  // namespace hsearch
