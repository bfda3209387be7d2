#include "hsearch/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "hsearch/error.hpp"

namespace hsearch {

using nlohmann::json;

namespace {

std::vector<std::string> fields_of(const std::string& line) {
    std::istringstream stream(line);
    std::vector<std::string> fields;
    for (std::string field; stream >> field;) fields.push_back(std::move(field));
    return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    return ec == std::errc() && ptr == text.data() + text.size();
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    }
    return in;
}

double mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

std::string fixed(double value, int precision = 4) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", precision, value);
    return buffer;
}

// Scores for tau over the union of two rankings: earlier is higher, absent
// documents tie below the last ranked one.
std::optional<double> union_tau(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> domain(a.begin(), a.end());
    domain.insert(domain.end(), b.begin(), b.end());
    std::sort(domain.begin(), domain.end());
    domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
    if (domain.size() < 2) return std::nullopt;
    const auto scores_for = [&](const std::vector<std::string>& ranking) {
        std::unordered_map<std::string, double> position;
        for (std::size_t i = 0; i < ranking.size(); ++i) position.emplace(ranking[i], -static_cast<double>(i));
        std::vector<double> scores;
        scores.reserve(domain.size());
        for (const std::string& doc : domain) {
            const auto it = position.find(doc);
            scores.push_back(it == position.end() ? -static_cast<double>(ranking.size()) : it->second);
        }
        return scores;
    };
    try {
        return kendall_tau(scores_for(a), scores_for(b));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::DegenerateAgreement) return std::nullopt;
        throw;
    }
}

}  // namespace

std::vector<RunEntry> parse_run(std::istream& in) {
    std::vector<RunEntry> entries;
    std::unordered_map<std::string, std::pair<std::size_t, double>> last;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::vector<std::string> f = fields_of(line);
        if (f.empty()) continue;
        if (f.size() != 6) {
            throw Error(ErrorCode::ParseError, "run line needs 6 fields, got " + std::to_string(f.size()), line_no);
        }
        RunEntry entry{f[0], f[2], 0, 0.0, f[5]};
        if (!parse_number(f[3], entry.rank) || entry.rank == 0) {
            throw Error(ErrorCode::ParseError, "invalid rank '" + f[3] + "'", line_no);
        }
        if (!parse_number(f[4], entry.score) || !std::isfinite(entry.score)) {
            throw Error(ErrorCode::ParseError, "invalid score '" + f[4] + "'", line_no);
        }
        const auto it = last.find(entry.query_id);
        const std::size_t expected = it == last.end() ? 1 : it->second.first + 1;
        if (entry.rank != expected) {
            throw Error(ErrorCode::ParseError,
                        "rank " + f[3] + " for query " + entry.query_id + " should be " + std::to_string(expected),
                        line_no);
        }
        if (it != last.end() && entry.score > it->second.second) {
            throw Error(ErrorCode::ParseError, "score increases within query " + entry.query_id, line_no);
        }
        last[entry.query_id] = {entry.rank, entry.score};
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<RunEntry> load_run(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    return parse_run(in);
}

void write_run(std::span<const RunEntry> entries, std::ostream& out) {
    for (const RunEntry& e : entries) {
        out << e.query_id << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << fixed(e.score, 6) << ' ' << e.tag << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing run");
    }
}

std::vector<Judgment> parse_qrels(std::istream& in, std::string_view default_assessor) {
    std::vector<Judgment> judgments;
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::vector<std::string> f = fields_of(line);
        if (f.empty()) continue;
        if (f.size() != 4 && f.size() != 5) {
            throw Error(ErrorCode::ParseError, "qrels line needs 4 or 5 fields, got " + std::to_string(f.size()),
                        line_no);
        }
        Judgment j{f[0], f[2], 0, f.size() == 5 ? f[4] : std::string(default_assessor)};
        if (!parse_number(f[3], j.relevance) || j.relevance < 0 || j.relevance > 2) {
            throw Error(ErrorCode::ParseError, "relevance must be 0, 1 or 2, got '" + f[3] + "'", line_no);
        }
        if (!seen.emplace(j.assessor_id, j.query_id, j.doc_id).second) {
            throw Error(ErrorCode::ParseError, "duplicate judgment for " + j.query_id + " " + j.doc_id, line_no);
        }
        judgments.push_back(std::move(j));
    }
    return judgments;
}

std::vector<Judgment> load_qrels(const std::filesystem::path& path, std::string_view default_assessor) {
    std::ifstream in = open_input(path);
    return parse_qrels(in, default_assessor);
}

void write_qrels(std::span<const Judgment> judgments, std::ostream& out, bool with_assessor) {
    for (const Judgment& j : judgments) {
        out << j.query_id << " 0 " << j.doc_id << ' ' << j.relevance;
        if (with_assessor) out << ' ' << j.assessor_id;
        out << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing qrels");
    }
}

std::optional<double> ndcg(std::span<const std::string> ranking, const RelevanceMap& judged, std::size_t k) {
    if (k == 0) {
        throw Error(ErrorCode::InvalidArgument, "nDCG cutoff must be at least 1");
    }
    const auto gain = [](int rel) { return std::exp2(static_cast<double>(rel)) - 1.0; };
    std::vector<int> ideal;
    for (const auto& [doc, rel] : judged) {
        if (rel > 0) ideal.push_back(rel);
    }
    if (ideal.empty()) return std::nullopt;
    std::sort(ideal.begin(), ideal.end(), std::greater<>());

    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal.size() && i < k; ++i) idcg += gain(ideal[i]) / std::log2(static_cast<double>(i + 2));
    double dcg = 0.0;
    for (std::size_t i = 0; i < ranking.size() && i < k; ++i) {
        const auto it = judged.find(ranking[i]);
        if (it != judged.end()) dcg += gain(it->second) / std::log2(static_cast<double>(i + 2));
    }
    return dcg / idcg;
}

double p_at_k(std::span<const std::string> ranking, const RelevanceMap& judged, std::size_t k) {
    if (k == 0) {
        throw Error(ErrorCode::InvalidArgument, "P@k needs k >= 1");
    }
    std::size_t relevant = 0;
    for (std::size_t i = 0; i < ranking.size() && i < k; ++i) {
        const auto it = judged.find(ranking[i]);
        if (it != judged.end() && it->second > 0) ++relevant;
    }
    return static_cast<double>(relevant) / static_cast<double>(k);
}

double fleiss_kappa(const std::vector<std::vector<int>>& counts) {
    if (counts.empty() || counts.front().empty()) {
        throw Error(ErrorCode::DegenerateAgreement, "kappa needs at least one item and one category");
    }
    const std::size_t categories = counts.front().size();
    long raters = -1;
    std::vector<double> totals(categories, 0.0);
    double p_bar = 0.0;
    for (const auto& row : counts) {
        if (row.size() != categories) {
            throw Error(ErrorCode::InvalidArgument, "kappa rows must have the same number of categories");
        }
        long r = 0;
        double agreeing = 0.0;
        for (std::size_t j = 0; j < categories; ++j) {
            if (row[j] < 0) {
                throw Error(ErrorCode::InvalidArgument, "kappa counts must be non-negative");
            }
            r += row[j];
            totals[j] += row[j];
            agreeing += static_cast<double>(row[j]) * static_cast<double>(row[j] - 1);
        }
        if (raters < 0) raters = r;
        if (r != raters || r < 2) {
            throw Error(ErrorCode::InvalidArgument, "every item must be rated by the same r >= 2 raters");
        }
        p_bar += agreeing / (static_cast<double>(r) * static_cast<double>(r - 1));
    }
    const double n = static_cast<double>(counts.size());
    p_bar /= n;
    double p_e = 0.0;
    for (double total : totals) {
        const double p = total / (n * static_cast<double>(raters));
        p_e += p * p;
    }
    if (p_e >= 1.0) {
        // Every rating fell in one category.
        return 1.0;
    }
    return (p_bar - p_e) / (1.0 - p_e);
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DomainMismatch, "tau needs paired scores of equal length");
    }
    if (a.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "tau needs at least 2 items");
    }
    double concordant = 0.0;
    double discordant = 0.0;
    double ties_a = 0.0;
    double ties_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double da = a[i] - a[j];
            const double db = b[i] - b[j];
            if (da == 0.0) ties_a += 1.0;
            if (db == 0.0) ties_b += 1.0;
            if (da == 0.0 || db == 0.0) continue;
            ((da > 0.0) == (db > 0.0) ? concordant : discordant) += 1.0;
        }
    }
    const double n0 = static_cast<double>(a.size()) * static_cast<double>(a.size() - 1) / 2.0;
    const double denominator = std::sqrt((n0 - ties_a) * (n0 - ties_b));
    if (denominator == 0.0) {
        throw Error(ErrorCode::DegenerateAgreement, "tau is undefined when one ranking is entirely tied");
    }
    return (concordant - discordant) / denominator;
}

double kendall_tau(std::span<const std::string> ranking_a, std::span<const std::string> ranking_b) {
    std::unordered_map<std::string, double> position;
    for (std::size_t i = 0; i < ranking_a.size(); ++i) {
        if (!position.emplace(ranking_a[i], -static_cast<double>(i)).second) {
            throw Error(ErrorCode::DomainMismatch, "ranking lists '" + ranking_a[i] + "' twice");
        }
    }
    if (ranking_b.size() != ranking_a.size()) {
        throw Error(ErrorCode::DomainMismatch, "rankings cover different item sets");
    }
    std::vector<double> a;
    std::vector<double> b;
    std::set<std::string_view> seen;
    for (std::size_t i = 0; i < ranking_b.size(); ++i) {
        const auto it = position.find(ranking_b[i]);
        if (it == position.end() || !seen.insert(ranking_b[i]).second) {
            throw Error(ErrorCode::DomainMismatch, "rankings cover different item sets");
        }
        a.push_back(it->second);
        b.push_back(-static_cast<double>(i));
    }
    return kendall_tau(a, b);
}

EvalReport evaluate(const std::vector<NamedRun>& runs, const std::vector<NamedQrels>& qrels, const EvalConfig& config) {
    if (runs.empty() || qrels.empty()) {
        throw Error(ErrorCode::InvalidArgument, "evaluation needs at least one run and one qrels set");
    }
    EvalReport report;
    report.config = config;

    std::vector<std::map<std::string, std::vector<std::string>>> rankings(runs.size());
    for (std::size_t s = 0; s < runs.size(); ++s) {
        report.systems.push_back(runs[s].first);
        std::vector<RunEntry> entries = runs[s].second;
        std::stable_sort(entries.begin(), entries.end(), [](const RunEntry& x, const RunEntry& y) {
            return std::tie(x.query_id, x.rank) < std::tie(y.query_id, y.rank);
        });
        for (const RunEntry& e : entries) rankings[s][e.query_id].push_back(e.doc_id);
    }
    std::vector<std::map<std::string, RelevanceMap>> judged(qrels.size());
    for (std::size_t a = 0; a < qrels.size(); ++a) {
        report.assessors.push_back(qrels[a].first);
        for (const Judgment& j : qrels[a].second) judged[a][j.query_id][j.doc_id] = j.relevance;
    }

    for (const auto& [qid, ranking] : rankings.front()) {
        bool shared = true;
        for (const auto& run : rankings) shared = shared && run.contains(qid);
        for (const auto& assessor : judged) shared = shared && assessor.contains(qid);
        if (shared) report.queries.push_back(qid);
    }
    if (report.queries.empty()) {
        throw Error(ErrorCode::EmptyIntersection, "runs and qrels share no query ids");
    }

    std::vector<std::vector<double>> pooled_ndcg(runs.size());
    std::vector<std::vector<double>> pooled_precision(runs.size());
    for (std::size_t a = 0; a < qrels.size(); ++a) {
        AssessorScores block{qrels[a].first, {}};
        for (std::size_t s = 0; s < runs.size(); ++s) {
            SystemScores scores;
            scores.system = runs[s].first;
            std::vector<double> defined;
            std::vector<double> precisions;
            for (const std::string& qid : report.queries) {
                const std::vector<std::string>& ranking = rankings[s].at(qid);
                const RelevanceMap& rel = judged[a].at(qid);
                const std::optional<double> n = ndcg(ranking, rel, config.ndcg_cutoff);
                const double p = p_at_k(ranking, rel, config.precision_k);
                scores.ndcg[qid] = n;
                scores.precision[qid] = p;
                if (n) {
                    defined.push_back(*n);
                    pooled_ndcg[s].push_back(*n);
                }
                precisions.push_back(p);
                pooled_precision[s].push_back(p);
            }
            scores.mean_ndcg = mean(defined);
            scores.mean_precision = mean(precisions);
            block.systems.push_back(std::move(scores));
        }
        report.per_assessor.push_back(std::move(block));
    }
    for (std::size_t s = 0; s < runs.size(); ++s) {
        report.avg_ndcg.push_back(mean(pooled_ndcg[s]));
        report.avg_precision.push_back(mean(pooled_precision[s]));
    }

    if (qrels.size() >= 2) {
        std::vector<std::vector<int>> counts;
        for (const auto& [qid, docs] : judged.front()) {
            for (const auto& [doc, rel0] : docs) {
                std::vector<int> row(3, 0);
                bool everyone = true;
                for (const auto& assessor : judged) {
                    const auto q = assessor.find(qid);
                    if (q == assessor.end()) {
                        everyone = false;
                        break;
                    }
                    const auto d = q->second.find(doc);
                    if (d == q->second.end()) {
                        everyone = false;
                        break;
                    }
                    ++row[static_cast<std::size_t>(d->second)];
                }
                if (everyone) counts.push_back(std::move(row));
            }
        }
        report.kappa_items = counts.size();
        if (!counts.empty()) report.kappa = fleiss_kappa(counts);
    }

    if (runs.size() >= 2) {
        std::vector<double> per_query;
        for (const std::string& qid : report.queries) {
            std::vector<double> pairs;
            for (std::size_t s = 0; s < runs.size(); ++s) {
                for (std::size_t t = s + 1; t < runs.size(); ++t) {
                    if (const auto tau = union_tau(rankings[s].at(qid), rankings[t].at(qid))) pairs.push_back(*tau);
                }
            }
            if (!pairs.empty()) {
                report.tau_per_query[qid] = mean(pairs);
                per_query.push_back(report.tau_per_query[qid]);
            }
        }
        if (!per_query.empty()) report.tau = mean(per_query);
    }
    return report;
}

json EvalReport::to_json() const {
    const auto optional_number = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json rows = json::array();
    for (std::size_t s = 0; s < systems.size(); ++s) {
        json columns = json::array();
        for (const AssessorScores& block : per_assessor) {
            const SystemScores& scores = block.systems[s];
            columns.push_back({{"assessor", block.assessor},
                               {"ndcg", scores.mean_ndcg},
                               {"p_at_k", scores.mean_precision}});
        }
        rows.push_back({{"system", systems[s]},
                        {"assessors", std::move(columns)},
                        {"avg", {{"ndcg", avg_ndcg[s]}, {"p_at_k", avg_precision[s]}}}});
    }
    json per_query = json::object();
    for (const AssessorScores& block : per_assessor) {
        json by_system = json::object();
        for (const SystemScores& scores : block.systems) {
            json by_query = json::object();
            for (const auto& [qid, n] : scores.ndcg) {
                by_query[qid] = {{"ndcg", optional_number(n)}, {"p_at_k", scores.precision.at(qid)}};
            }
            by_system[scores.system] = std::move(by_query);
        }
        per_query[block.assessor] = std::move(by_system);
    }
    return {
        {"config", {{"ndcg_cutoff", config.ndcg_cutoff}, {"precision_k", config.precision_k}}},
        {"systems", systems},
        {"assessors", assessors},
        {"queries", queries},
        {"table", std::move(rows)},
        {"per_query", std::move(per_query)},
        {"kappa", optional_number(kappa)},
        {"kappa_items", kappa_items},
        {"tau", optional_number(tau)},
        {"tau_per_query", tau_per_query},
    };
}

std::string EvalReport::to_tsv() const {
    const std::string p_label = "P@" + std::to_string(config.precision_k);
    std::string out = "system";
    for (const std::string& assessor : assessors) out += "\t" + assessor + " nDCG\t" + assessor + " " + p_label;
    out += "\tAVG nDCG\tAVG " + p_label + "\n";
    for (std::size_t s = 0; s < systems.size(); ++s) {
        out += systems[s];
        for (const AssessorScores& block : per_assessor) {
            out += "\t" + fixed(block.systems[s].mean_ndcg) + "\t" + fixed(block.systems[s].mean_precision);
        }
        out += "\t" + fixed(avg_ndcg[s]) + "\t" + fixed(avg_precision[s]) + "\n";
    }
    out += "kappa\t" + (kappa ? fixed(*kappa) : std::string("NA")) + "\n";
    out += "tau\t" + (tau ? fixed(*tau) : std::string("NA")) + "\n";
    return out;
}

}  // namespace hsearch
