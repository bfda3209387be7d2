#include "hsearch/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "hsearch/error.hpp"

namespace hsearch {

const Cluster* ClusterSet::find(std::string_view id) const {
    for (const Cluster& cluster : clusters) {
        if (cluster.cluster_id == id) return &cluster;
    }
    return nullptr;
}

std::string cluster_id(std::string_view query, std::string_view label) {
    std::uint64_t hash = fnv1a64(normalize_phrase(query));
    hash = fnv1a64(std::string_view("\x1f", 1), hash);
    hash = fnv1a64(label, hash);
    return hex64(hash);
}

std::vector<LabelCandidate> candidate_labels(const Corpus& corpus, std::span<const std::string> result_docs,
                                             std::span<const EntityMention> mentions,
                                             std::span<const ScoredTerm> terms, const ClusteringConfig& config) {
    const std::unordered_set<std::string> in_result(result_docs.begin(), result_docs.end());
    std::map<std::string, std::set<std::string>> containing;

    for (const EntityMention& mention : mentions) {
        if (in_result.contains(mention.doc_id)) {
            containing[join(normalized_words(mention.surface), " ")].insert(mention.doc_id);
        }
    }

    const std::size_t term_count = std::min(terms.size(), config.label_terms);
    std::unordered_map<std::string, std::string> term_keys;
    std::size_t longest = 0;
    for (std::size_t t = 0; t < term_count; ++t) {
        term_keys.emplace(terms[t].phrase(), terms[t].phrase());
        longest = std::max(longest, terms[t].words.size());
    }
    if (!term_keys.empty()) {
        for (const std::string& id : in_result) {
            const Document& doc = corpus.at(id);
            for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
                std::string key = doc.tokens[i].normalized;
                for (std::size_t len = 2; len <= longest && i + len <= doc.tokens.size(); ++len) {
                    const Token& last = doc.tokens[i + len - 1];
                    if (last.sentence_index != doc.tokens[i].sentence_index) break;
                    key += ' ';
                    key += last.normalized;
                    if (term_keys.contains(key)) containing[key].insert(id);
                }
            }
        }
    }

    std::vector<LabelCandidate> out;
    for (auto& [phrase, docs] : containing) {
        if (docs.size() >= config.min_support) {
            out.push_back({phrase, std::vector<std::string>(docs.begin(), docs.end())});
        }
    }
    return out;
}

std::size_t stopping_threshold(std::size_t result_size, const ClusteringConfig& config) {
    const auto adaptive = static_cast<std::size_t>(std::ceil(config.min_fraction * static_cast<double>(result_size)));
    return std::max(config.min_support, adaptive);
}

ClusterSet select_clusters(std::string_view query, std::span<const LabelCandidate> candidates,
                           std::span<const std::string> result_docs, const ClusteringConfig& config) {
    std::unordered_map<std::string, std::size_t> position;
    std::vector<std::string> ordered;
    for (const std::string& id : result_docs) {
        if (position.emplace(id, ordered.size()).second) ordered.push_back(id);
    }

    // Each candidate's documents as result positions.
    std::vector<std::vector<std::size_t>> members(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        for (const std::string& id : candidates[c].docs) {
            if (const auto it = position.find(id); it != position.end()) members[c].push_back(it->second);
        }
    }

    const double threshold = static_cast<double>(stopping_threshold(ordered.size(), config));
    std::vector<char> covered(ordered.size(), 0);
    std::vector<char> used(candidates.size(), 0);
    std::vector<std::size_t> chosen;
    while (chosen.size() < config.max_clusters) {
        std::size_t best = candidates.size();
        double best_gain = 0.0;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (used[c]) continue;
            std::size_t fresh = 0;
            for (std::size_t p : members[c]) fresh += covered[p] ? 0 : 1;
            const double gain =
                static_cast<double>(fresh) - config.alpha * static_cast<double>(members[c].size() - fresh);
            // Candidates arrive sorted by phrase, so keeping the first of equal
            // gains and sizes breaks ties lexicographically.
            const bool better = best == candidates.size() || gain > best_gain ||
                                (gain == best_gain && members[c].size() > members[best].size());
            if (better) {
                best = c;
                best_gain = gain;
            }
        }
        if (best == candidates.size() || best_gain < threshold) break;
        used[best] = 1;
        chosen.push_back(best);
        for (std::size_t p : members[best]) covered[p] = 1;
    }

    ClusterSet set;
    set.residual_id = cluster_id(query, kResidualLabel);
    std::vector<std::size_t> owner(ordered.size(), chosen.size());
    for (std::size_t k = chosen.size(); k-- > 0;) {
        for (std::size_t p : members[chosen[k]]) owner[p] = k;
    }
    for (std::size_t k = 0; k < chosen.size(); ++k) {
        const std::string& label = candidates[chosen[k]].phrase;
        set.clusters.push_back({cluster_id(query, label), label, {}});
    }
    for (std::size_t p = 0; p < ordered.size(); ++p) {
        if (owner[p] == chosen.size()) {
            set.residual.push_back(ordered[p]);
        } else {
            set.clusters[owner[p]].members.push_back(ordered[p]);
        }
    }
    return set;
}

std::vector<std::string> filter_by_cluster(std::span<const std::string> ranked, const ClusterSet& clusters,
                                           std::string_view id) {
    const std::vector<std::string>* members = nullptr;
    if (const Cluster* cluster = clusters.find(id)) {
        members = &cluster->members;
    } else if (id == clusters.residual_id) {
        members = &clusters.residual;
    } else {
        throw Error(ErrorCode::UnknownClusterId, "unknown cluster id '" + std::string(id) + "'");
    }
    const std::unordered_set<std::string> keep(members->begin(), members->end());
    std::vector<std::string> out;
    for (const std::string& id_in_rank : ranked) {
        if (keep.contains(id_in_rank)) out.push_back(id_in_rank);
    }
    return out;
}

}  // namespace hsearch
