#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace hsearch {

struct Judgment {
    std::string query_id;
    std::string doc_id;
    int relevance = 0;  // 0, 1 or 2
    std::string assessor_id;

    bool operator==(const Judgment&) const = default;
};

struct RunEntry {
    std::string query_id;
    std::string doc_id;
    std::size_t rank = 0;  // 1-based
    double score = 0.0;
    std::string tag;

    bool operator==(const RunEntry&) const = default;
};

// "qid Q0 docid rank score tag". ParseError with line numbers on malformed
// lines, non-contiguous ranks or increasing scores within a query.
std::vector<RunEntry> parse_run(std::istream& in);
std::vector<RunEntry> load_run(const std::filesystem::path& path);
void write_run(std::span<const RunEntry> entries, std::ostream& out);

// "qid 0 docid rel [assessor]". A missing assessor column takes
// `default_assessor`.
std::vector<Judgment> parse_qrels(std::istream& in, std::string_view default_assessor = "");
std::vector<Judgment> load_qrels(const std::filesystem::path& path, std::string_view default_assessor = "");
void write_qrels(std::span<const Judgment> judgments, std::ostream& out, bool with_assessor = false);

using RelevanceMap = std::unordered_map<std::string, int>;

// nDCG@k with gain 2^rel - 1 and discount log2(i + 1). Unjudged documents
// count as 0. Empty when no judged document is relevant.
std::optional<double> ndcg(std::span<const std::string> ranking, const RelevanceMap& judged, std::size_t k = 10);

// Fraction of the top k with relevance > 0, always divided by k.
double p_at_k(std::span<const std::string> ranking, const RelevanceMap& judged, std::size_t k = 5);

// Rows are items, columns are categories, cells are rater counts. Every row
// must sum to the same r >= 2. Perfect agreement in a single category is
// 1.0 by convention.
double fleiss_kappa(const std::vector<std::vector<int>>& counts);

// Tau-b over paired scores; larger score means ranked higher.
// DegenerateAgreement when either side is entirely tied.
double kendall_tau(std::span<const double> a, std::span<const double> b);
// Tau-b between two orderings of the same documents. DomainMismatch when
// the sets differ.
double kendall_tau(std::span<const std::string> ranking_a, std::span<const std::string> ranking_b);

struct EvalConfig {
    std::size_t ndcg_cutoff = 10;
    std::size_t precision_k = 5;
};

struct SystemScores {
    std::string system;
    std::map<std::string, std::optional<double>> ndcg;  // by query id
    std::map<std::string, double> precision;
    double mean_ndcg = 0.0;
    double mean_precision = 0.0;
};

struct AssessorScores {
    std::string assessor;
    std::vector<SystemScores> systems;
};

struct EvalReport {
    EvalConfig config;
    std::vector<std::string> systems;
    std::vector<std::string> assessors;
    std::vector<std::string> queries;
    std::vector<AssessorScores> per_assessor;
    // Pooled over every (assessor, query) value, per system.
    std::vector<double> avg_ndcg;
    std::vector<double> avg_precision;
    std::optional<double> kappa;
    std::size_t kappa_items = 0;
    std::map<std::string, double> tau_per_query;
    std::optional<double> tau;

    nlohmann::json to_json() const;
    std::string to_tsv() const;
};

using NamedRun = std::pair<std::string, std::vector<RunEntry>>;
using NamedQrels = std::pair<std::string, std::vector<Judgment>>;

// Queries are those present in every run and judged by every assessor
// (EmptyIntersection otherwise). Kappa pools items judged by all assessors.
// Tau compares each pair of systems per query over the union of their
// documents, a document missing from one run tying at the bottom.
EvalReport evaluate(const std::vector<NamedRun>& runs, const std::vector<NamedQrels>& qrels,
                    const EvalConfig& config = {});

}  // namespace hsearch
