#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hsearch/annotations.hpp"
#include "hsearch/corpus.hpp"
#include "hsearch/kernels.hpp"
#include "hsearch/posting.hpp"

namespace hsearch {

inline constexpr std::string_view kIndexFormat = "hsearch-index/1";
inline constexpr std::size_t kSnippetWidth = 240;

enum class SearchMode { word, entity, hybrid };

std::string_view to_string(SearchMode mode);
SearchMode parse_search_mode(std::string_view name);  // InvalidArgument

struct QueryFilters {
    std::optional<std::string> cluster_id;
    // Members of `cluster_id`, resolved by the caller that owns the clusters.
    std::optional<std::vector<std::string>> cluster_members;
    std::optional<std::string> entity_category;
    std::optional<std::string> entity_surface;

    bool any() const { return cluster_id || cluster_members || entity_category || entity_surface; }
};

struct Query {
    std::string text;
    QueryFilters filters;
    std::size_t page = 1;
    std::size_t page_size = 10;
};

struct LinkedEntity {
    std::string category;
    std::string key;  // normalized words joined by spaces
};

// A query split into index keys. Terms are unique and sorted; residual
// terms are the tokens not covered by a linked entity.
struct AnalyzedQuery {
    std::vector<std::string> word_terms;
    std::vector<LinkedEntity> entities;
    std::vector<std::string> residual_terms;
};

struct Highlight {
    std::size_t start = 0;  // relative to the snippet text
    std::size_t end = 0;
};

struct Snippet {
    std::string text;
    std::size_t offset = 0;  // byte offset of `text` in the document body
    std::vector<Highlight> highlights;
};

struct SearchHit {
    std::string doc_id;
    double score = 0.0;
    Snippet snippet;
    std::vector<std::pair<std::string, std::string>> matched_entities;  // (category, surface)
};

struct SearchResult {
    std::size_t total = 0;
    std::vector<SearchHit> hits;
    // The full filtered ranking, for facet computation.
    std::vector<std::string> result_docs;
    std::vector<double> result_scores;
};

struct RunQuery {
    std::string query_id;
    Query query;
};

// The surface of an entity mention as an index key.
std::string entity_key(std::string_view surface);

class InvertedIndex {
public:
    InvertedIndex() = default;

    static InvertedIndex build(Corpus corpus, std::vector<EntityMention> mentions, Gazetteer gazetteer = {},
                               Bm25Params params = {});

    const Corpus& corpus() const noexcept { return corpus_; }
    const std::vector<EntityMention>& mentions() const noexcept { return mentions_; }
    const Gazetteer& gazetteer() const noexcept { return gazetteer_; }
    const Bm25Params& params() const noexcept { return params_; }

    std::size_t doc_count() const noexcept { return ordinals_.size(); }
    double avg_doc_length() const noexcept { return avg_doc_length_; }
    std::span<const double> doc_lengths() const noexcept { return doc_lengths_; }
    const std::string& doc_id(std::uint32_t ordinal) const;
    std::optional<std::uint32_t> ordinal(std::string_view doc_id) const;
    const Document& document(std::uint32_t ordinal) const;

    const std::unordered_map<std::string, std::vector<Posting>>& word_postings() const noexcept { return words_; }
    // Keyed by category + '\t' + entity key.
    const std::unordered_map<std::string, std::vector<Posting>>& entity_postings() const noexcept { return entities_; }
    const std::vector<Posting>* find_word(std::string_view term) const;
    const std::vector<Posting>* find_entity(std::string_view category, std::string_view key) const;

    std::span<const EntityMention> mentions_of(std::uint32_t ordinal) const;

    AnalyzedQuery analyze(std::string_view text) const;

    // UnknownDoc when doc_id is not indexed.
    double bm25_score(const AnalyzedQuery& query, std::string_view doc_id, SearchMode mode) const;

    // InvalidPage for page or page_size 0; InvalidArgument for an empty
    // query without filters.
    SearchResult search(const Query& query, SearchMode mode,
                        kernels::Execution execution = kernels::default_execution()) const;

    // "qid Q0 docid rank score tag" lines, at most `depth` per query.
    void export_run(std::span<const RunQuery> queries, SearchMode mode, std::size_t depth, std::string_view tag,
                    std::ostream& out) const;

    nlohmann::json to_json() const;
    static InvertedIndex from_json(const nlohmann::json& snapshot);
    void save(const std::filesystem::path& path) const;
    static InvertedIndex load(const std::filesystem::path& path);

private:
    static InvertedIndex from_json_unchecked(const nlohmann::json& snapshot);
    void finalize();
    Snippet make_snippet(const Document& doc, std::span<const EntityMention> doc_mentions,
                         const AnalyzedQuery& query) const;

    Corpus corpus_;
    std::vector<EntityMention> mentions_;
    Gazetteer gazetteer_;
    Bm25Params params_;

    std::vector<std::size_t> ordinals_;  // ordinal -> position in corpus_, doc_id order
    std::unordered_map<std::string, std::uint32_t> ordinal_of_;
    std::vector<double> doc_lengths_;
    double avg_doc_length_ = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> mention_ranges_;  // per ordinal
    std::unordered_map<std::string, std::vector<Posting>> words_;
    std::unordered_map<std::string, std::vector<Posting>> entities_;
};

}  // namespace hsearch
