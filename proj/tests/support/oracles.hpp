#pragma once

// Brute-force reference implementations used only by tests. They share no
// code with the library beyond the data types and tokenizer output.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hsearch/annotations.hpp"
#include "hsearch/corpus.hpp"
#include "hsearch/index.hpp"
#include "hsearch/posting.hpp"
#include "hsearch/text.hpp"

namespace oracle {

using hsearch::Document;
using hsearch::Token;

// ---------------------------------------------------------------- C-value

struct Term {
    std::vector<std::string> words;
    double cvalue = 0.0;
    std::size_t frequency = 0;
    std::size_t doc_frequency = 0;
};

inline bool numeric(const std::string& w) {
    if (w.empty()) return false;
    for (char c : w) {
        if (!((c >= '0' && c <= '9') || c == '-')) return false;
    }
    return true;
}

inline std::vector<std::vector<std::string>> sentences_of(const Document& doc) {
    std::vector<std::vector<std::string>> out(doc.sentences.size());
    for (const Token& t : doc.tokens) out[t.sentence_index].push_back(t.normalized);
    return out;
}

inline bool contains_run(const std::vector<std::string>& longer, const std::vector<std::string>& shorter) {
    if (shorter.size() >= longer.size()) return false;
    for (std::size_t i = 0; i + shorter.size() <= longer.size(); ++i) {
        if (std::equal(shorter.begin(), shorter.end(), longer.begin() + static_cast<std::ptrdiff_t>(i))) return true;
    }
    return false;
}

struct Candidate {
    std::size_t frequency = 0;
    std::set<std::size_t> docs;
    std::size_t nested = 0;
};

// Every window of 2..6 admissible words in a sentence, counted by direct
// enumeration; nest sets found by pairwise containment tests.
inline std::map<std::vector<std::string>, Candidate> candidates(const std::vector<const Document*>& docs,
                                                                const std::unordered_set<std::string>& stop) {
    std::map<std::vector<std::string>, Candidate> out;
    const auto ok = [&](const std::string& w) { return !stop.count(w) && !numeric(w); };
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& sentence : sentences_of(*docs[d])) {
            for (std::size_t i = 0; i < sentence.size(); ++i) {
                for (std::size_t len = 2; len <= 6 && i + len <= sentence.size(); ++len) {
                    bool admissible = true;
                    for (std::size_t k = i; k < i + len; ++k) admissible = admissible && ok(sentence[k]);
                    if (!admissible) continue;
                    std::vector<std::string> window(sentence.begin() + static_cast<std::ptrdiff_t>(i),
                                                    sentence.begin() + static_cast<std::ptrdiff_t>(i + len));
                    Candidate& c = out[window];
                    ++c.frequency;
                    c.docs.insert(d);
                    const bool left = i > 0 && ok(sentence[i - 1]);
                    const bool right = i + len < sentence.size() && ok(sentence[i + len]);
                    if (len < 6 && (left || right)) ++c.nested;
                }
            }
        }
    }
    return out;
}

inline std::vector<Term> cvalue(const std::vector<const Document*>& docs, const std::unordered_set<std::string>& stop) {
    const auto cands = candidates(docs, stop);
    std::vector<Term> out;
    for (const auto& [words, c] : cands) {
        double parent_sum = 0.0;
        std::size_t parents = 0;
        for (const auto& [other, oc] : cands) {
            if (contains_run(other, words)) {
                parent_sum += static_cast<double>(oc.frequency);
                ++parents;
            }
        }
        double f = static_cast<double>(c.frequency);
        if (parents > 0) f -= parent_sum / static_cast<double>(parents);
        const double score = std::log2(static_cast<double>(words.size())) * f;
        if (score > 0.0) out.push_back({words, score, c.frequency, c.docs.size()});
    }
    std::sort(out.begin(), out.end(), [](const Term& a, const Term& b) {
        return std::make_tuple(-a.cvalue, -static_cast<double>(a.frequency), a.words) <
               std::make_tuple(-b.cvalue, -static_cast<double>(b.frequency), b.words);
    });
    return out;
}

// ------------------------------------------------------------- gazetteer

struct Match {
    std::size_t first = 0;
    std::size_t end = 0;
    std::string category;
};

// At each position try every span length from the longest down.
inline std::vector<Match> gazetteer_matches(const std::vector<Token>& tokens,
                                            const std::map<std::string, std::string>& phrases) {
    std::vector<Match> out;
    std::size_t i = 0;
    while (i < tokens.size()) {
        std::optional<Match> found;
        for (std::size_t end = tokens.size(); end > i && !found; --end) {
            if (tokens[end - 1].sentence_index != tokens[i].sentence_index) continue;
            std::string key;
            for (std::size_t k = i; k < end; ++k) key += (k == i ? "" : " ") + tokens[k].normalized;
            const auto it = phrases.find(key);
            if (it != phrases.end()) found = Match{i, end, it->second};
        }
        if (found) {
            out.push_back(*found);
            i = found->end;
        } else {
            ++i;
        }
    }
    return out;
}

// -------------------------------------------------------------------- BM25

struct LinearScan {
    const hsearch::Corpus* corpus = nullptr;
    const std::vector<hsearch::EntityMention>* mentions = nullptr;
    std::map<std::string, std::string> gazetteer;  // key -> category
    hsearch::Bm25Params params;

    std::size_t n() const { return corpus->size(); }

    double avg_length() const {
        double total = 0.0;
        for (const Document& d : corpus->documents()) total += static_cast<double>(d.tokens.size());
        return total / static_cast<double>(n());
    }

    double term(double tf, double df, double len) const {
        const double idf = std::log(1.0 + (static_cast<double>(n()) - df + 0.5) / (df + 0.5));
        return idf * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * len / avg_length()));
    }

    static std::size_t word_tf(const Document& d, const std::string& w) {
        std::size_t tf = 0;
        for (const Token& t : d.tokens) tf += t.normalized == w ? 1 : 0;
        return tf;
    }

    static std::string key_of(const std::string& surface) {
        return hsearch::join(hsearch::normalized_words(surface), " ");
    }

    std::size_t entity_tf(const Document& d, const std::string& category, const std::string& key) const {
        std::size_t tf = 0;
        for (const auto& m : *mentions) {
            if (m.doc_id == d.doc_id && m.category == category && key_of(m.surface) == key) ++tf;
        }
        return tf;
    }

    double word_score(const Document& d, const std::vector<std::string>& words) const {
        double s = 0.0;
        for (const std::string& w : words) {
            const double tf = static_cast<double>(word_tf(d, w));
            if (tf == 0.0) continue;
            double df = 0.0;
            for (const Document& o : corpus->documents()) df += word_tf(o, w) > 0 ? 1.0 : 0.0;
            s += term(tf, df, static_cast<double>(d.tokens.size()));
        }
        return s;
    }

    double entity_score(const Document& d, const std::vector<std::pair<std::string, std::string>>& ents) const {
        double s = 0.0;
        for (const auto& [category, key] : ents) {
            const double tf = static_cast<double>(entity_tf(d, category, key));
            if (tf == 0.0) continue;
            double df = 0.0;
            for (const Document& o : corpus->documents()) df += entity_tf(o, category, key) > 0 ? 1.0 : 0.0;
            s += term(tf, df, static_cast<double>(d.tokens.size()));
        }
        return s;
    }

    struct Parsed {
        std::vector<std::string> words;
        std::vector<std::pair<std::string, std::string>> entities;
        std::vector<std::string> residual;
    };

    Parsed parse(const std::string& text) const {
        const std::vector<Token> tokens = hsearch::tokenize(text, hsearch::segment_sentences(text));
        Parsed p;
        std::set<std::string> words;
        std::set<std::string> residual;
        std::set<std::pair<std::string, std::string>> ents;
        std::vector<bool> covered(tokens.size(), false);
        for (const Match& m : gazetteer_matches(tokens, gazetteer)) {
            std::string key;
            for (std::size_t k = m.first; k < m.end; ++k) {
                key += (k == m.first ? "" : " ") + tokens[k].normalized;
                covered[k] = true;
            }
            ents.emplace(m.category, key);
        }
        for (std::size_t k = 0; k < tokens.size(); ++k) {
            words.insert(tokens[k].normalized);
            if (!covered[k]) residual.insert(tokens[k].normalized);
        }
        p.words.assign(words.begin(), words.end());
        p.entities.assign(ents.begin(), ents.end());
        p.residual.assign(residual.begin(), residual.end());
        return p;
    }

    double score(const Document& d, const Parsed& q, hsearch::SearchMode mode) const {
        switch (mode) {
            case hsearch::SearchMode::word: return word_score(d, q.words);
            case hsearch::SearchMode::entity: return entity_score(d, q.entities) + word_score(d, q.residual);
            case hsearch::SearchMode::hybrid:
                return params.w_word * word_score(d, q.words) + params.w_entity * entity_score(d, q.entities);
        }
        return 0.0;
    }

    bool matches_any(const Document& d, const Parsed& q, hsearch::SearchMode mode) const {
        const auto has_word = [&](const std::vector<std::string>& ws) {
            for (const auto& w : ws) {
                if (word_tf(d, w) > 0) return true;
            }
            return false;
        };
        bool ent = false;
        for (const auto& [c, k] : q.entities) ent = ent || entity_tf(d, c, k) > 0;
        switch (mode) {
            case hsearch::SearchMode::word: return has_word(q.words);
            case hsearch::SearchMode::entity: return ent || has_word(q.residual);
            case hsearch::SearchMode::hybrid: return ent || has_word(q.words);
        }
        return false;
    }

    // Ranked (doc_id, score) for the query, filters applied.
    std::vector<std::pair<std::string, double>> search(const std::string& text, hsearch::SearchMode mode,
                                                       const std::optional<std::string>& category = std::nullopt,
                                                       const std::optional<std::string>& surface = std::nullopt) const {
        const Parsed q = parse(text);
        std::vector<std::pair<std::string, double>> out;
        for (const Document& d : corpus->documents()) {
            if (!q.words.empty() && !matches_any(d, q, mode)) continue;
            if (category || surface) {
                bool ok = false;
                for (const auto& m : *mentions) {
                    if (m.doc_id != d.doc_id) continue;
                    if (category && m.category != *category) continue;
                    if (surface && key_of(m.surface) != key_of(*surface)) continue;
                    ok = true;
                }
                if (!ok) continue;
            }
            out.emplace_back(d.doc_id, q.words.empty() ? 0.0 : score(d, q, mode));
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            return a.second != b.second ? a.second > b.second : a.first < b.first;
        });
        return out;
    }
};

// ---------------------------------------------------------------- PageRank

using Matrix = std::vector<std::vector<double>>;

// Column-stochastic Google matrix with uniform dangling columns.
inline Matrix google_matrix(const Matrix& w, double damping) {
    const std::size_t n = w.size();
    Matrix g(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        double out = 0.0;
        for (std::size_t k = 0; k < n; ++k) out += w[j][k];
        for (std::size_t i = 0; i < n; ++i) {
            const double link = out > 0.0 ? w[j][i] / out : 1.0 / static_cast<double>(n);
            g[i][j] = damping * link + (1.0 - damping) / static_cast<double>(n);
        }
    }
    return g;
}

inline std::vector<double> power_iteration(const Matrix& w, double damping, double epsilon, std::size_t max_iter) {
    const std::size_t n = w.size();
    const Matrix g = google_matrix(w, damping);
    std::vector<double> p(n, 1.0 / static_cast<double>(n));
    for (std::size_t it = 0; it < max_iter; ++it) {
        std::vector<double> q(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) q[i] += g[i][j] * p[j];
        }
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change += std::abs(q[i] - p[i]);
        p = q;
        if (change < epsilon) break;
    }
    return p;
}

// Stationary vector by Gaussian elimination on (G - I) p = 0, sum p = 1.
inline std::vector<double> stationary(const Matrix& w, double damping) {
    const std::size_t n = w.size();
    Matrix a = google_matrix(w, damping);
    for (std::size_t i = 0; i < n; ++i) a[i][i] -= 1.0;
    std::vector<double> rhs(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1.0;
    rhs[n - 1] = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
        }
        std::swap(a[c], a[pivot]);
        std::swap(rhs[c], rhs[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            rhs[r] -= f * rhs[c];
        }
    }
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = rhs[i] / a[i][i];
    return p;
}

// -------------------------------------------------------------------- MMR

// Greedy MMR written from the definition, over explicit similarity rows.
inline std::vector<std::size_t> mmr(const std::vector<double>& relevance, const Matrix& sim, double lambda,
                                    std::size_t k) {
    std::vector<std::size_t> chosen;
    std::vector<bool> taken(relevance.size(), false);
    while (chosen.size() < k && chosen.size() < relevance.size()) {
        std::optional<std::size_t> best;
        double best_value = 0.0;
        for (std::size_t i = 0; i < relevance.size(); ++i) {
            if (taken[i]) continue;
            double red = 0.0;
            for (std::size_t c : chosen) red = std::max(red, sim[i][c]);
            const double v = lambda * relevance[i] - (1.0 - lambda) * red;
            if (!best || v > best_value) {
                best = i;
                best_value = v;
            }
        }
        taken[*best] = true;
        chosen.push_back(*best);
    }
    return chosen;
}

// ----------------------------------------------------------------- metrics

inline double dcg(const std::vector<int>& rels, std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i < rels.size() && i < k; ++i) {
        s += (std::pow(2.0, rels[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }
    return s;
}

// Ideal DCG as the maximum over every permutation of the judged pool.
inline double ideal_dcg_by_permutation(std::vector<int> pool, std::size_t k) {
    std::sort(pool.begin(), pool.end());
    double best = 0.0;
    do {
        best = std::max(best, dcg(pool, k));
    } while (std::next_permutation(pool.begin(), pool.end()));
    return best;
}

inline std::optional<double> ndcg(const std::vector<std::string>& ranking, const std::map<std::string, int>& judged,
                                  std::size_t k) {
    std::vector<int> pool;
    for (const auto& [doc, rel] : judged) pool.push_back(rel);
    const double ideal = ideal_dcg_by_permutation(pool, k);
    if (ideal == 0.0) return std::nullopt;
    std::vector<int> rels;
    for (const auto& doc : ranking) {
        const auto it = judged.find(doc);
        rels.push_back(it == judged.end() ? 0 : it->second);
    }
    return dcg(rels, k) / ideal;
}

inline double precision(const std::vector<std::string>& ranking, const std::map<std::string, int>& judged,
                        std::size_t k) {
    double hits = 0.0;
    for (std::size_t i = 0; i < k && i < ranking.size(); ++i) {
        const auto it = judged.find(ranking[i]);
        if (it != judged.end() && it->second > 0) hits += 1.0;
    }
    return hits / static_cast<double>(k);
}

// Fleiss' kappa from raw labels: ratings[item][rater].
inline double kappa(const std::vector<std::vector<int>>& ratings, int categories) {
    const double n = static_cast<double>(ratings.size());
    const double r = static_cast<double>(ratings.front().size());
    double agreement = 0.0;
    std::vector<double> share(static_cast<std::size_t>(categories), 0.0);
    for (const auto& item : ratings) {
        double agreeing_pairs = 0.0;
        for (std::size_t a = 0; a < item.size(); ++a) {
            share[static_cast<std::size_t>(item[a])] += 1.0;
            for (std::size_t b = 0; b < item.size(); ++b) {
                if (a != b && item[a] == item[b]) agreeing_pairs += 1.0;
            }
        }
        agreement += agreeing_pairs / (r * (r - 1.0));
    }
    agreement /= n;
    double chance = 0.0;
    for (double s : share) chance += (s / (n * r)) * (s / (n * r));
    if (chance == 1.0) return 1.0;
    return (agreement - chance) / (1.0 - chance);
}

inline int sign(double v) { return (v > 0.0) - (v < 0.0); }

// Tau-b as a normalized inner product of pairwise sign matrices.
inline double tau_b(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0;
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (i == j) continue;
            const int x = sign(a[i] - a[j]);
            const int y = sign(b[i] - b[j]);
            num += x * y;
            sa += x * x;
            sb += y * y;
        }
    }
    return num / std::sqrt(sa * sb);
}

}  // namespace oracle
