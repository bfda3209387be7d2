#include "hsearch/index.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_set>

#include "hsearch/error.hpp"

namespace hsearch {

using nlohmann::json;

std::string_view to_string(SearchMode mode) {
    switch (mode) {
        case SearchMode::word: return "word";
        case SearchMode::entity: return "entity";
        case SearchMode::hybrid: return "hybrid";
    }
    return "hybrid";
}

SearchMode parse_search_mode(std::string_view name) {
    if (name == "word") return SearchMode::word;
    if (name == "entity") return SearchMode::entity;
    if (name == "hybrid") return SearchMode::hybrid;
    throw Error(ErrorCode::InvalidArgument, "unknown search mode '" + std::string(name) + "'");
}

std::string entity_key(std::string_view surface) { return join(normalized_words(surface), " "); }

namespace {

std::string entity_index_key(std::string_view category, std::string_view key) {
    std::string out(category);
    out.push_back('\t');
    out += key;
    return out;
}

// Index of the token containing or following byte offset `offset`.
std::uint32_t token_at(const Document& doc, std::size_t offset) {
    const auto it = std::lower_bound(doc.tokens.begin(), doc.tokens.end(), offset,
                                     [](const Token& token, std::size_t value) { return token.end <= value; });
    const auto index = static_cast<std::size_t>(it - doc.tokens.begin());
    return static_cast<std::uint32_t>(std::min(index, doc.tokens.size() - 1));
}

void add_position(std::vector<Posting>& list, std::uint32_t doc, std::uint32_t position) {
    if (list.empty() || list.back().doc != doc) {
        list.push_back({doc, {}});
    }
    list.back().positions.push_back(position);
}

bool is_continuation(const std::string& text, std::size_t pos) {
    return pos < text.size() && (static_cast<unsigned char>(text[pos]) & 0xC0) == 0x80;
}

json postings_to_json(const std::unordered_map<std::string, std::vector<Posting>>& table) {
    std::vector<const std::string*> keys;
    keys.reserve(table.size());
    for (const auto& [key, list] : table) keys.push_back(&key);
    std::sort(keys.begin(), keys.end(), [](const std::string* a, const std::string* b) { return *a < *b; });
    json out = json::object();
    for (const std::string* key : keys) {
        json list = json::array();
        for (const Posting& posting : table.at(*key)) list.push_back(json::array({posting.doc, posting.positions}));
        out[*key] = std::move(list);
    }
    return out;
}

std::unordered_map<std::string, std::vector<Posting>> postings_from_json(const json& object, std::size_t doc_count) {
    std::unordered_map<std::string, std::vector<Posting>> table;
    for (const auto& [key, list] : object.items()) {
        std::vector<Posting> postings;
        for (const json& entry : list) {
            Posting posting{entry.at(0).get<std::uint32_t>(), entry.at(1).get<std::vector<std::uint32_t>>()};
            if (posting.doc >= doc_count || posting.positions.empty() ||
                (!postings.empty() && postings.back().doc >= posting.doc)) {
                throw Error(ErrorCode::IncompatibleSnapshot, "posting list for '" + key + "' is not valid");
            }
            postings.push_back(std::move(posting));
        }
        table.emplace(key, std::move(postings));
    }
    return table;
}

}  // namespace

InvertedIndex InvertedIndex::build(Corpus corpus, std::vector<EntityMention> mentions, Gazetteer gazetteer,
                                   Bm25Params params) {
    InvertedIndex index;
    index.corpus_ = std::move(corpus);
    index.gazetteer_ = std::move(gazetteer);
    index.params_ = params;
    index.mentions_ = std::move(mentions);
    for (const EntityMention& mention : index.mentions_) {
        if (!index.corpus_.contains(mention.doc_id)) {
            throw Error(ErrorCode::UnknownDocId, "mention refers to unknown document '" + mention.doc_id + "'");
        }
    }
    std::stable_sort(index.mentions_.begin(), index.mentions_.end(), [](const EntityMention& a, const EntityMention& b) {
        return std::tie(a.doc_id, a.start) < std::tie(b.doc_id, b.start);
    });
    index.finalize();

    for (std::uint32_t ord = 0; ord < index.ordinals_.size(); ++ord) {
        const Document& doc = index.document(ord);
        for (std::size_t p = 0; p < doc.tokens.size(); ++p) {
            add_position(index.words_[doc.tokens[p].normalized], ord, static_cast<std::uint32_t>(p));
        }
        for (const EntityMention& mention : index.mentions_of(ord)) {
            add_position(index.entities_[entity_index_key(mention.category, entity_key(mention.surface))], ord,
                         token_at(doc, mention.start));
        }
    }
    return index;
}

void InvertedIndex::finalize() {
    const auto& docs = corpus_.documents();
    ordinals_.resize(docs.size());
    std::iota(ordinals_.begin(), ordinals_.end(), std::size_t{0});
    std::sort(ordinals_.begin(), ordinals_.end(),
              [&](std::size_t a, std::size_t b) { return docs[a].doc_id < docs[b].doc_id; });

    ordinal_of_.clear();
    doc_lengths_.assign(docs.size(), 0.0);
    double total = 0.0;
    for (std::uint32_t ord = 0; ord < ordinals_.size(); ++ord) {
        const Document& doc = docs[ordinals_[ord]];
        if (doc.tokens.empty()) {
            throw Error(ErrorCode::InvalidArgument, "document '" + doc.doc_id + "' has no tokens");
        }
        ordinal_of_.emplace(doc.doc_id, ord);
        doc_lengths_[ord] = static_cast<double>(doc.tokens.size());
        total += doc_lengths_[ord];
    }
    avg_doc_length_ = total / static_cast<double>(docs.size());

    mention_ranges_.assign(docs.size(), {0, 0});
    std::size_t m = 0;
    for (std::uint32_t ord = 0; ord < ordinals_.size(); ++ord) {
        const std::string& id = docs[ordinals_[ord]].doc_id;
        while (m < mentions_.size() && mentions_[m].doc_id < id) ++m;
        const std::size_t begin = m;
        while (m < mentions_.size() && mentions_[m].doc_id == id) ++m;
        mention_ranges_[ord] = {begin, m};
    }
}

const std::string& InvertedIndex::doc_id(std::uint32_t ordinal) const { return document(ordinal).doc_id; }

std::optional<std::uint32_t> InvertedIndex::ordinal(std::string_view doc_id) const {
    const auto it = ordinal_of_.find(std::string(doc_id));
    if (it == ordinal_of_.end()) return std::nullopt;
    return it->second;
}

const Document& InvertedIndex::document(std::uint32_t ordinal) const {
    return corpus_.documents()[ordinals_.at(ordinal)];
}

const std::vector<Posting>* InvertedIndex::find_word(std::string_view term) const {
    const auto it = words_.find(std::string(term));
    return it == words_.end() ? nullptr : &it->second;
}

const std::vector<Posting>* InvertedIndex::find_entity(std::string_view category, std::string_view key) const {
    const auto it = entities_.find(entity_index_key(category, key));
    return it == entities_.end() ? nullptr : &it->second;
}

std::span<const EntityMention> InvertedIndex::mentions_of(std::uint32_t ordinal) const {
    const auto [begin, end] = mention_ranges_.at(ordinal);
    return std::span<const EntityMention>(mentions_).subspan(begin, end - begin);
}

AnalyzedQuery InvertedIndex::analyze(std::string_view text) const {
    AnalyzedQuery out;
    const std::vector<Token> tokens = tokenize(text, segment_sentences(text));
    std::set<std::string> words;
    for (const Token& token : tokens) words.insert(token.normalized);
    out.word_terms.assign(words.begin(), words.end());

    std::vector<char> covered(tokens.size(), 0);
    std::set<std::pair<std::string, std::string>> linked;
    if (!gazetteer_.empty()) {
        for (const GazetteerMatch& match : match_gazetteer(tokens, gazetteer_)) {
            linked.emplace(match.category, match.key);
            for (std::size_t t = match.first_token; t < match.end_token; ++t) covered[t] = 1;
        }
    }
    for (const auto& [category, key] : linked) out.entities.push_back({category, key});

    std::set<std::string> residual;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        if (!covered[t]) residual.insert(tokens[t].normalized);
    }
    out.residual_terms.assign(residual.begin(), residual.end());
    return out;
}

double InvertedIndex::bm25_score(const AnalyzedQuery& query, std::string_view doc_id, SearchMode mode) const {
    const auto ord = ordinal(doc_id);
    if (!ord) {
        throw Error(ErrorCode::UnknownDoc, "unknown document '" + std::string(doc_id) + "'");
    }
    const auto contribution = [&](const std::vector<Posting>* list) {
        if (list == nullptr) return 0.0;
        const auto it = std::lower_bound(list->begin(), list->end(), *ord,
                                         [](const Posting& p, std::uint32_t doc) { return p.doc < doc; });
        if (it == list->end() || it->doc != *ord) return 0.0;
        return bm25_term(bm25_idf(doc_count(), list->size()), it->tf(), doc_lengths_[*ord], avg_doc_length_,
                         params_.k1, params_.b);
    };
    const auto words_score = [&](const std::vector<std::string>& terms) {
        double sum = 0.0;
        for (const std::string& term : terms) sum += contribution(find_word(term));
        return sum;
    };
    double entity_score = 0.0;
    for (const LinkedEntity& entity : query.entities) entity_score += contribution(find_entity(entity.category, entity.key));

    switch (mode) {
        case SearchMode::word: return words_score(query.word_terms);
        case SearchMode::entity: return entity_score + words_score(query.residual_terms);
        case SearchMode::hybrid: return params_.w_word * words_score(query.word_terms) + params_.w_entity * entity_score;
    }
    return 0.0;
}

SearchResult InvertedIndex::search(const Query& query, SearchMode mode, kernels::Execution execution) const {
    if (query.page == 0 || query.page_size == 0) {
        throw Error(ErrorCode::InvalidPage, "page and page_size must be at least 1");
    }
    const AnalyzedQuery analyzed = analyze(query.text);
    const bool has_text = !analyzed.word_terms.empty();
    if (!has_text && !query.filters.any()) {
        throw Error(ErrorCode::InvalidArgument, "query has no searchable text and no filters");
    }

    const std::size_t n = doc_count();
    std::vector<char> candidate(n, has_text ? 0 : 1);
    const auto accumulate = [&](const std::vector<std::string>& terms, std::vector<double>& scores) {
        scores.assign(n, 0.0);
        for (const std::string& term : terms) {
            const std::vector<Posting>* list = find_word(term);
            if (list == nullptr) continue;
            kernels::accumulate_bm25(*list, bm25_idf(n, list->size()), doc_lengths_, avg_doc_length_, params_,
                                     scores, execution);
            for (const Posting& posting : *list) candidate[posting.doc] = 1;
        }
    };
    const auto accumulate_entities = [&](std::vector<double>& scores) {
        scores.assign(n, 0.0);
        for (const LinkedEntity& entity : analyzed.entities) {
            const std::vector<Posting>* list = find_entity(entity.category, entity.key);
            if (list == nullptr) continue;
            kernels::accumulate_bm25(*list, bm25_idf(n, list->size()), doc_lengths_, avg_doc_length_, params_,
                                     scores, execution);
            for (const Posting& posting : *list) candidate[posting.doc] = 1;
        }
    };

    std::vector<double> scores(n, 0.0);
    if (has_text) {
        std::vector<double> word_part;
        std::vector<double> entity_part;
        switch (mode) {
            case SearchMode::word:
                accumulate(analyzed.word_terms, scores);
                break;
            case SearchMode::entity:
                accumulate_entities(entity_part);
                accumulate(analyzed.residual_terms, word_part);
                for (std::size_t d = 0; d < n; ++d) scores[d] = entity_part[d] + word_part[d];
                break;
            case SearchMode::hybrid:
                accumulate(analyzed.word_terms, word_part);
                accumulate_entities(entity_part);
                for (std::size_t d = 0; d < n; ++d) {
                    scores[d] = params_.w_word * word_part[d] + params_.w_entity * entity_part[d];
                }
                break;
        }
    }

    const QueryFilters& filters = query.filters;
    if (filters.cluster_members) {
        std::vector<char> allowed(n, 0);
        for (const std::string& id : *filters.cluster_members) {
            if (const auto ord = ordinal(id)) allowed[*ord] = 1;
        }
        for (std::size_t d = 0; d < n; ++d) candidate[d] &= allowed[d];
    }
    if (filters.entity_category || filters.entity_surface) {
        const std::optional<std::string> wanted_key =
            filters.entity_surface ? std::optional<std::string>(entity_key(*filters.entity_surface)) : std::nullopt;
        for (std::uint32_t d = 0; d < n; ++d) {
            if (!candidate[d]) continue;
            bool match = false;
            for (const EntityMention& mention : mentions_of(d)) {
                if (filters.entity_category && mention.category != *filters.entity_category) continue;
                if (wanted_key && entity_key(mention.surface) != *wanted_key) continue;
                match = true;
                break;
            }
            candidate[d] = match ? 1 : 0;
        }
    }

    std::vector<std::uint32_t> ranked;
    for (std::uint32_t d = 0; d < n; ++d) {
        if (candidate[d]) ranked.push_back(d);
    }
    std::sort(ranked.begin(), ranked.end(), [&](std::uint32_t a, std::uint32_t b) {
        return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
    });

    SearchResult result;
    result.total = ranked.size();
    result.result_docs.reserve(ranked.size());
    result.result_scores.reserve(ranked.size());
    for (std::uint32_t d : ranked) {
        result.result_docs.push_back(doc_id(d));
        result.result_scores.push_back(scores[d]);
    }

    const std::size_t first = (query.page - 1) * query.page_size;
    for (std::size_t r = first; r < ranked.size() && r < first + query.page_size; ++r) {
        const std::uint32_t d = ranked[r];
        SearchHit hit;
        hit.doc_id = doc_id(d);
        hit.score = scores[d];
        std::set<std::pair<std::string, std::string>> matched;
        for (const EntityMention& mention : mentions_of(d)) {
            const std::string key = entity_key(mention.surface);
            bool linked = std::any_of(analyzed.entities.begin(), analyzed.entities.end(), [&](const LinkedEntity& e) {
                return e.category == mention.category && e.key == key;
            });
            if (filters.entity_surface && key == entity_key(*filters.entity_surface) &&
                (!filters.entity_category || *filters.entity_category == mention.category)) {
                linked = true;
            }
            if (linked) matched.emplace(mention.category, mention.surface);
        }
        hit.matched_entities.assign(matched.begin(), matched.end());
        // Entities matched only through a filter still anchor the snippet.
        AnalyzedQuery anchors = analyzed;
        for (const auto& [category, surface] : matched) anchors.entities.push_back({category, entity_key(surface)});
        hit.snippet = make_snippet(document(d), mentions_of(d), anchors);
        result.hits.push_back(std::move(hit));
    }
    return result;
}

Snippet InvertedIndex::make_snippet(const Document& doc, std::span<const EntityMention> doc_mentions,
                                    const AnalyzedQuery& query) const {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    const std::unordered_set<std::string> terms(query.word_terms.begin(), query.word_terms.end());
    for (const Token& token : doc.tokens) {
        if (terms.contains(token.normalized)) spans.emplace_back(token.start, token.end);
    }
    for (const EntityMention& mention : doc_mentions) {
        const std::string key = entity_key(mention.surface);
        for (const LinkedEntity& entity : query.entities) {
            if (entity.category == mention.category && entity.key == key) spans.emplace_back(mention.start, mention.end);
        }
    }
    std::sort(spans.begin(), spans.end());
    std::vector<std::pair<std::size_t, std::size_t>> merged;
    for (const auto& span : spans) {
        if (!merged.empty() && span.first <= merged.back().second) {
            merged.back().second = std::max(merged.back().second, span.second);
        } else {
            merged.push_back(span);
        }
    }

    const std::string& body = doc.body;
    std::size_t focus_begin = 0;
    std::size_t focus_end = 0;
    if (!merged.empty()) {
        // Densest run of matches fitting in one window; earliest wins ties.
        std::size_t best_count = 0;
        std::size_t j = 0;
        for (std::size_t i = 0; i < merged.size(); ++i) {
            j = std::max(j, i);
            while (j + 1 < merged.size() && merged[j + 1].second - merged[i].first <= kSnippetWidth) ++j;
            if (j - i + 1 > best_count) {
                best_count = j - i + 1;
                focus_begin = merged[i].first;
                focus_end = std::min(merged[j].second, merged[i].first + kSnippetWidth);
            }
        }
    }

    std::size_t start = 0;
    std::size_t end = std::min(body.size(), kSnippetWidth);
    if (focus_end > focus_begin) {
        const std::size_t slack = kSnippetWidth - (focus_end - focus_begin);
        start = focus_begin > slack / 2 ? focus_begin - slack / 2 : 0;
        end = std::min(body.size(), start + kSnippetWidth);
        start = end > kSnippetWidth ? std::max<std::size_t>(0, end - kSnippetWidth) : 0;
        start = std::min(start, focus_begin);
        // Snap to word boundaries without cutting into the focus.
        if (start > 0 && !is_space(body[start - 1])) {
            std::size_t s = start;
            while (s < focus_begin && !is_space(body[s])) ++s;
            if (s < focus_begin) start = s + 1;
        }
        if (end < body.size() && !is_space(body[end])) {
            std::size_t e = end;
            while (e > focus_end && !is_space(body[e - 1])) --e;
            if (e > focus_end) end = e;
        }
    } else if (end < body.size()) {
        std::size_t e = end;
        while (e > 0 && !is_space(body[e - 1])) --e;
        if (e > 0) end = e;
    }
    while (start > 0 && is_continuation(body, start)) --start;
    while (end < body.size() && is_continuation(body, end)) --end;
    while (start < end && is_space(body[start])) ++start;
    while (end > start && is_space(body[end - 1])) --end;

    Snippet snippet;
    snippet.offset = start;
    snippet.text = body.substr(start, end - start);
    for (const auto& [s, e] : merged) {
        if (s >= start && e <= end) snippet.highlights.push_back({s - start, e - start});
    }
    return snippet;
}

void InvertedIndex::export_run(std::span<const RunQuery> queries, SearchMode mode, std::size_t depth,
                               std::string_view tag, std::ostream& out) const {
    char score[64];
    for (const RunQuery& run_query : queries) {
        Query query = run_query.query;
        query.page = 1;
        query.page_size = 1;
        const SearchResult result = search(query, mode);
        const std::size_t count = std::min(depth, result.result_docs.size());
        for (std::size_t r = 0; r < count; ++r) {
            std::snprintf(score, sizeof(score), "%.6f", result.result_scores[r]);
            out << run_query.query_id << " Q0 " << result.result_docs[r] << ' ' << (r + 1) << ' ' << score << ' '
                << tag << '\n';
        }
    }
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing run file");
    }
}

json InvertedIndex::to_json() const {
    json mentions = json::array();
    for (const EntityMention& m : mentions_) {
        mentions.push_back(json::array({m.doc_id, m.category, m.start, m.end}));
    }
    json gazetteer = json::array();
    for (const auto& [key, category] : gazetteer_.entries()) gazetteer.push_back(json::array({key, category}));
    return {
        {"format", kIndexFormat},
        {"params", {{"k1", params_.k1}, {"b", params_.b}, {"w_word", params_.w_word}, {"w_entity", params_.w_entity}}},
        {"stats", {{"documents", doc_count()}, {"avg_doc_length", avg_doc_length_}}},
        {"corpus", corpus_to_json(corpus_)},
        {"mentions", std::move(mentions)},
        {"gazetteer", std::move(gazetteer)},
        {"word_postings", postings_to_json(words_)},
        {"entity_postings", postings_to_json(entities_)},
    };
}

InvertedIndex InvertedIndex::from_json(const json& snapshot) {
    if (!snapshot.is_object() || snapshot.value("format", "") != kIndexFormat) {
        throw Error(ErrorCode::IncompatibleSnapshot,
                    "expected index snapshot format '" + std::string(kIndexFormat) + "'");
    }
    try {
        return from_json_unchecked(snapshot);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IncompatibleSnapshot, std::string("malformed index snapshot: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::IncompatibleSnapshot) throw;
        throw Error(ErrorCode::IncompatibleSnapshot, "inconsistent index snapshot: " + e.message());
    }
}

InvertedIndex InvertedIndex::from_json_unchecked(const json& snapshot) {
    InvertedIndex index;
    index.corpus_ = corpus_from_json(snapshot.at("corpus"));
    const json& params = snapshot.at("params");
    index.params_ = {params.at("k1").get<double>(), params.at("b").get<double>(), params.at("w_word").get<double>(),
                     params.at("w_entity").get<double>()};
    for (const json& entry : snapshot.at("gazetteer")) {
        index.gazetteer_.add(entry.at(0).get<std::string>(), entry.at(1).get<std::string>());
    }
    for (const json& entry : snapshot.at("mentions")) {
        EntityMention m;
        m.doc_id = entry.at(0).get<std::string>();
        m.category = entry.at(1).get<std::string>();
        m.start = entry.at(2).get<std::size_t>();
        m.end = entry.at(3).get<std::size_t>();
        const Document& doc = index.corpus_.at(m.doc_id);
        if (m.start >= m.end || m.end > doc.body.size()) {
            throw Error(ErrorCode::IncompatibleSnapshot, "mention offsets out of bounds in '" + m.doc_id + "'");
        }
        m.surface = doc.body.substr(m.start, m.end - m.start);
        m.normalized = normalize_phrase(m.surface);
        index.mentions_.push_back(std::move(m));
    }
    index.finalize();
    index.words_ = postings_from_json(snapshot.at("word_postings"), index.doc_count());
    index.entities_ = postings_from_json(snapshot.at("entity_postings"), index.doc_count());

    for (const auto& [term, list] : index.words_) {
        for (const Posting& posting : list) {
            const Document& doc = index.document(posting.doc);
            for (std::uint32_t p : posting.positions) {
                if (p >= doc.tokens.size() || doc.tokens[p].normalized != term) {
                    throw Error(ErrorCode::IncompatibleSnapshot, "word posting for '" + term + "' does not match the corpus");
                }
            }
        }
    }
    return index;
}

void InvertedIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out << to_json().dump() << '\n';
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    }
    json snapshot;
    try {
        snapshot = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::IncompatibleSnapshot, std::string("index snapshot is not valid JSON: ") + e.what());
    }
    return from_json(snapshot);
}

}  // namespace hsearch
