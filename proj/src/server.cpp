#include "hsearch/server.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <unordered_set>

#include <httplib.h>

#include "hsearch/error.hpp"
#include "hsearch/summarizer.hpp"

#ifndef HSEARCH_VERSION
#define HSEARCH_VERSION "0.0.0"
#endif

namespace hsearch::server {

using nlohmann::json;

namespace {

// Thrown inside handlers and turned into an error response.
struct ApiFailure {
    int status;
    std::string code;
    std::string message;
};

struct Request {
    std::string text;
    QueryFilters filters;
    SearchMode mode = SearchMode::hybrid;
    std::size_t page = 1;
    std::size_t page_size = 10;
    std::optional<std::string> category;  // /api/entities only
};

ApiFailure invalid_body(const std::string& message) { return {400, "invalid_body", message}; }

std::optional<std::string> optional_string(const json& object, const char* key) {
    if (!object.contains(key) || object[key].is_null()) return std::nullopt;
    if (!object[key].is_string()) throw invalid_body(std::string("'") + key + "' must be a string");
    return object[key].get<std::string>();
}

std::size_t positive(const json& object, const char* key, std::size_t fallback) {
    if (!object.contains(key) || object[key].is_null()) return fallback;
    if (!object[key].is_number_integer() || object[key].get<long long>() < 1) {
        throw invalid_body(std::string("'") + key + "' must be a positive integer");
    }
    return object[key].get<std::size_t>();
}

Request parse_request(std::string_view body, const AppState& state) {
    json object;
    try {
        object = json::parse(body);
    } catch (const json::parse_error& e) {
        throw invalid_body(std::string("body is not valid JSON: ") + e.what());
    }
    if (!object.is_object()) throw invalid_body("body must be a JSON object");

    Request request;
    request.mode = state.config.mode;
    request.page_size = state.config.page_size;
    request.text = optional_string(object, "query").value_or("");
    if (const auto mode = optional_string(object, "mode")) {
        try {
            request.mode = parse_search_mode(*mode);
        } catch (const Error& e) {
            throw invalid_body(e.what());
        }
    }
    request.page = positive(object, "page", 1);
    request.page_size = positive(object, "page_size", request.page_size);
    if (object.contains("filters") && !object["filters"].is_null()) {
        const json& filters = object["filters"];
        if (!filters.is_object()) throw invalid_body("'filters' must be an object");
        for (const auto& [key, value] : filters.items()) {
            if (key != "cluster_id" && key != "entity_category" && key != "entity_surface") {
                throw invalid_body("unknown filter '" + key + "'");
            }
        }
        request.filters.cluster_id = optional_string(filters, "cluster_id");
        request.filters.entity_category = optional_string(filters, "entity_category");
        request.filters.entity_surface = optional_string(filters, "entity_surface");
    }
    request.category = optional_string(object, "category");
    for (const auto* category : {&request.filters.entity_category, &request.category}) {
        if (*category && !state.categories.contains(**category)) {
            throw ApiFailure{400, "unknown_category", "unknown entity category '" + **category + "'"};
        }
    }
    if (normalized_words(request.text).empty() && !request.filters.any()) {
        throw ApiFailure{422, "empty_query", "query is empty and no filters are set"};
    }
    return request;
}

std::string facet_key(const Request& request) {
    const auto part = [](const std::optional<std::string>& v) { return v ? "1" + *v : std::string("0"); };
    return std::string(to_string(request.mode)) + '\x1f' + join(normalized_words(request.text), " ") + '\x1f' +
           part(request.filters.cluster_id) + '\x1f' + part(request.filters.entity_category) + '\x1f' +
           part(request.filters.entity_surface);
}

json filters_json(const QueryFilters& filters) {
    json out = json::object();
    if (filters.cluster_id) out["cluster_id"] = *filters.cluster_id;
    if (filters.entity_category) out["entity_category"] = *filters.entity_category;
    if (filters.entity_surface) out["entity_surface"] = *filters.entity_surface;
    return out;
}

ApiResponse from_error(const Error& e) {
    switch (e.code()) {
        case ErrorCode::UnknownDoc:
        case ErrorCode::UnknownDocId: return api_error(404, to_string(e.code()), e.what());
        case ErrorCode::InvalidPage:
        case ErrorCode::UnknownCategory:
        case ErrorCode::UnknownClusterId: return api_error(400, to_string(e.code()), e.what());
        case ErrorCode::InvalidArgument:
        case ErrorCode::EmptySubset: return api_error(422, to_string(e.code()), e.what());
        default: return api_error(500, to_string(e.code()), e.what());
    }
}

template <typename F>
ApiResponse guarded(F&& handler) {
    try {
        return handler();
    } catch (const ApiFailure& f) {
        return api_error(f.status, f.code, f.message);
    } catch (const Error& e) {
        return from_error(e);
    } catch (const std::exception& e) {
        return api_error(500, "internal_error", e.what());
    }
}

}  // namespace

ApiResponse api_error(int status, std::string_view code, std::string_view message) {
    return {status, {{"status", status}, {"code", code}, {"message", message}}};
}

std::shared_ptr<const AppState> make_state(AppConfig config, InvertedIndex index, std::optional<EmbeddingModel> model) {
    auto state = std::make_shared<AppState>();
    std::vector<ScoredTerm> terms = cvalue_rank(extract_candidates(index.corpus(), default_stoplist()));
    if (terms.size() > config.facets.summary_terms) terms.resize(config.facets.summary_terms);
    state->config = std::move(config);
    state->index = std::move(index);
    state->model = std::move(model);
    state->summary_terms = std::move(terms);
    return state;
}

std::shared_ptr<const AppState> load_state(const AppConfig& config) {
    if (config.artifacts.index.empty()) {
        throw Error(ErrorCode::InvalidArgument, "artifacts.index is not configured");
    }
    InvertedIndex index = InvertedIndex::load(config.artifacts.index);
    std::optional<EmbeddingModel> model;
    if (!config.artifacts.model.empty()) model = EmbeddingModel::load(std::filesystem::path(config.artifacts.model));
    return make_state(config, std::move(index), std::move(model));
}

Api::Loaded::Loaded(std::shared_ptr<const AppState> s)
    : state(std::move(s)),
      clusters(state->config.server.cache_capacity),
      wordclouds(state->config.server.cache_capacity),
      summaries(state->config.server.cache_capacity) {}

void Api::install(std::shared_ptr<const AppState> state) {
    auto loaded = std::make_shared<const Loaded>(std::move(state));
    std::lock_guard lock(mutex_);
    loaded_ = std::move(loaded);
}

bool Api::ready() const { return current() != nullptr; }

std::shared_ptr<const Api::Loaded> Api::current() const {
    std::lock_guard lock(mutex_);
    return loaded_;
}

Api::CacheCounters Api::cache_counters() const {
    CacheCounters out;
    if (const auto loaded = current()) {
        out.hits = loaded->clusters.hits() + loaded->wordclouds.hits() + loaded->summaries.hits();
        out.misses = loaded->clusters.misses() + loaded->wordclouds.misses() + loaded->summaries.misses();
    }
    return out;
}

namespace {

// Search for the full ranked result set of a request, resolving a cluster
// filter against the clusters of the same request without that filter.
SearchResult run_search(const AppState& state, LruCache<ClusterSet>& cache, Request request);

ClusterSet cluster_set(const AppState& state, LruCache<ClusterSet>& cache, const Request& request) {
    const std::string key = facet_key(request);
    if (auto hit = cache.get(key)) return std::move(*hit);
    Request full = request;
    full.page = 1;
    const SearchResult result = run_search(state, cache, full);
    if (result.result_docs.empty()) {
        throw ApiFailure{422, "empty_result", "the query matches no documents"};
    }
    const ClusteringConfig& config = state.config.clustering;
    const std::vector<ScoredTerm> terms =
        word_cloud(state.index.corpus(), result.result_docs, config.label_terms, default_stoplist());
    const std::vector<LabelCandidate> candidates =
        candidate_labels(state.index.corpus(), result.result_docs, state.index.mentions(), terms, config);
    ClusterSet set = select_clusters(request.text, candidates, result.result_docs, config);
    cache.put(key, set);
    return set;
}

SearchResult run_search(const AppState& state, LruCache<ClusterSet>& cache, Request request) {
    if (request.filters.cluster_id) {
        Request base = request;
        base.filters.cluster_id.reset();
        if (normalized_words(base.text).empty() && !base.filters.any()) {
            throw ApiFailure{422, "empty_query", "a cluster filter needs the query it was computed for"};
        }
        const ClusterSet set = cluster_set(state, cache, base);
        std::vector<std::string> ranked;
        for (const Cluster& c : set.clusters) ranked.insert(ranked.end(), c.members.begin(), c.members.end());
        ranked.insert(ranked.end(), set.residual.begin(), set.residual.end());
        request.filters.cluster_members = filter_by_cluster(ranked, set, *request.filters.cluster_id);
    }
    Query query{request.text, request.filters, request.page, request.page_size};
    return state.index.search(query, request.mode);
}

}  // namespace

ApiResponse Api::health() const {
    const auto loaded = current();
    if (!loaded) return api_error(503, "not_ready", "the index has not been loaded yet");
    const AppState& state = *loaded->state;
    return {200,
            {{"status", "ok"},
             {"corpus_size", state.index.doc_count()},
             {"index_mode", to_string(state.config.mode)},
             {"version", HSEARCH_VERSION},
             {"model_loaded", state.model.has_value()}}};
}

#define HSEARCH_REQUIRE_STATE(loaded)                                                        \
    const auto loaded = current();                                                           \
    if (!loaded) return api_error(503, "not_ready", "the index has not been loaded yet")

ApiResponse Api::search(std::string_view body) const {
    HSEARCH_REQUIRE_STATE(loaded);
    return guarded([&] {
        const AppState& state = *loaded->state;
        const Request request = parse_request(body, state);
        const SearchResult result = run_search(state, loaded->clusters, request);
        json hits = json::array();
        for (const SearchHit& hit : result.hits) {
            json highlights = json::array();
            for (const Highlight& h : hit.snippet.highlights) highlights.push_back({h.start, h.end});
            json matched = json::array();
            for (const auto& [category, surface] : hit.matched_entities) {
                matched.push_back({{"category", category}, {"surface", surface}});
            }
            hits.push_back({{"doc_id", hit.doc_id},
                            {"title", state.index.corpus().at(hit.doc_id).title},
                            {"score", hit.score},
                            {"snippet", {{"text", hit.snippet.text}, {"offset", hit.snippet.offset},
                                         {"highlights", std::move(highlights)}}},
                            {"matched_entities", std::move(matched)}});
        }
        return ApiResponse{200,
                           {{"total", result.total},
                            {"page", request.page},
                            {"page_size", request.page_size},
                            {"mode", to_string(request.mode)},
                            {"hits", std::move(hits)},
                            {"applied_filters", filters_json(request.filters)}}};
    });
}

ApiResponse Api::wordcloud(std::string_view body) const {
    HSEARCH_REQUIRE_STATE(loaded);
    return guarded([&] {
        const AppState& state = *loaded->state;
        const Request request = parse_request(body, state);
        const std::string key = facet_key(request);
        if (auto hit = loaded->wordclouds.get(key)) return ApiResponse{200, std::move(*hit)};
        const SearchResult result = run_search(state, loaded->clusters, request);
        if (result.result_docs.empty()) {
            throw ApiFailure{422, "empty_result", "the query matches no documents"};
        }
        json terms = json::array();
        for (const ScoredTerm& t :
             word_cloud(state.index.corpus(), result.result_docs, state.config.facets.wordcloud_top_k)) {
            terms.push_back({{"term", t.phrase()},
                             {"cvalue", t.cvalue},
                             {"frequency", t.frequency},
                             {"doc_frequency", t.doc_frequency}});
        }
        json out = {{"terms", std::move(terms)}, {"result_size", result.result_docs.size()}};
        loaded->wordclouds.put(key, out);
        return ApiResponse{200, std::move(out)};
    });
}

ApiResponse Api::clusters(std::string_view body) const {
    HSEARCH_REQUIRE_STATE(loaded);
    return guarded([&] {
        const AppState& state = *loaded->state;
        const Request request = parse_request(body, state);
        const ClusterSet set = cluster_set(state, loaded->clusters, request);
        json clusters = json::array();
        std::size_t total = set.residual.size();
        for (const Cluster& c : set.clusters) {
            clusters.push_back({{"cluster_id", c.cluster_id}, {"label", c.label}, {"size", c.members.size()}});
            total += c.members.size();
        }
        return ApiResponse{200,
                           {{"clusters", std::move(clusters)},
                            {"residual_id", set.residual_id},
                            {"residual_size", set.residual.size()},
                            {"result_size", total}}};
    });
}

ApiResponse Api::entities(std::string_view body) const {
    HSEARCH_REQUIRE_STATE(loaded);
    return guarded([&] {
        const AppState& state = *loaded->state;
        const Request request = parse_request(body, state);
        const SearchResult result = run_search(state, loaded->clusters, request);
        if (result.result_docs.empty()) {
            throw ApiFailure{422, "empty_result", "the query matches no documents"};
        }
        const std::unordered_set<std::string> docs(result.result_docs.begin(), result.result_docs.end());
        std::map<std::string, std::size_t> per_category;
        json entities = json::array();
        for (const EntityCount& e : entity_aggregate(state.index.mentions(), docs, request.category)) {
            if (per_category[e.category]++ >= state.config.facets.entities_top_k) continue;
            entities.push_back({{"surface", e.normalized},
                                {"category", e.category},
                                {"color", state.categories.color(e.category)},
                                {"mention_count", e.mention_count},
                                {"doc_count", e.doc_count}});
        }
        return ApiResponse{200, {{"entities", std::move(entities)}, {"result_size", result.result_docs.size()}}};
    });
}

ApiResponse Api::document(std::string_view doc_id) const {
    HSEARCH_REQUIRE_STATE(loaded);
    return guarded([&] {
        const AppState& state = *loaded->state;
        const auto ordinal = state.index.ordinal(doc_id);
        if (!ordinal) throw ApiFailure{404, "unknown_doc", "unknown document '" + std::string(doc_id) + "'"};
        const Document& doc = state.index.document(*ordinal);
        json entities = json::array();
        for (const EntityMention& m : state.index.mentions_of(*ordinal)) {
            entities.push_back({{"category", m.category},
                                {"start", m.start},
                                {"end", m.end},
                                {"surface", m.surface},
                                {"color", state.categories.color(m.category)}});
        }
        json sentences = json::array();
        for (const SentenceSpan& s : doc.sentences) {
            sentences.push_back({{"index", s.index}, {"start", s.start}, {"end", s.end},
                                 {"text", doc.sentence_text(s.index)}});
        }
        return ApiResponse{200,
                           {{"doc_id", doc.doc_id},
                            {"title", doc.title},
                            {"text", doc.body},
                            {"entities", std::move(entities)},
                            {"sentences", std::move(sentences)}}};
    });
}

ApiResponse Api::summary(std::string_view doc_id) const {
    HSEARCH_REQUIRE_STATE(loaded);
    return guarded([&] {
        const AppState& state = *loaded->state;
        const auto ordinal = state.index.ordinal(doc_id);
        if (!ordinal) throw ApiFailure{404, "unknown_doc", "unknown document '" + std::string(doc_id) + "'"};
        const std::string key(doc_id);
        if (auto hit = loaded->summaries.get(key)) return ApiResponse{200, std::move(*hit)};
        if (!state.model) throw ApiFailure{503, "model_unavailable", "no embedding model is loaded"};
        const Summary summary = summarize(state.index.document(*ordinal), state.index.mentions_of(*ordinal),
                                          state.summary_terms, *state.model, state.config.summary);
        json out = {{"doc_id", key},
                    {"sentences", summary.sentences},
                    {"sentence_indexes", summary.sentence_indexes},
                    {"bypassed", summary.bypassed}};
        loaded->summaries.put(key, out);
        return ApiResponse{200, std::move(out)};
    });
}

#undef HSEARCH_REQUIRE_STATE

struct HttpServer::Impl {
    Impl(Api& a, ServerSettings s) : api(a), settings(std::move(s)) {}

    Api& api;
    ServerSettings settings;
    httplib::Server server;
};

namespace {

void reply(httplib::Response& res, const ApiResponse& response) {
    res.status = response.status;
    res.set_content(response.body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

}  // namespace

HttpServer::HttpServer(Api& api, ServerSettings settings) : impl_(std::make_unique<Impl>(api, std::move(settings))) {
    httplib::Server& server = impl_->server;
    Api* a = &api;
    const std::size_t threads = std::max<std::size_t>(1, impl_->settings.threads);
    server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };

    server.Get("/api/health", [a](const httplib::Request&, httplib::Response& res) { reply(res, a->health()); });
    server.Post("/api/search",
                [a](const httplib::Request& req, httplib::Response& res) { reply(res, a->search(req.body)); });
    server.Post("/api/wordcloud",
                [a](const httplib::Request& req, httplib::Response& res) { reply(res, a->wordcloud(req.body)); });
    server.Post("/api/clusters",
                [a](const httplib::Request& req, httplib::Response& res) { reply(res, a->clusters(req.body)); });
    server.Post("/api/entities",
                [a](const httplib::Request& req, httplib::Response& res) { reply(res, a->entities(req.body)); });
    server.Get(R"(/api/document/(.+))", [a](const httplib::Request& req, httplib::Response& res) {
        reply(res, a->document(req.matches[1].str()));
    });
    server.Get(R"(/api/summary/(.+))", [a](const httplib::Request& req, httplib::Response& res) {
        reply(res, a->summary(req.matches[1].str()));
    });

    const std::filesystem::path static_dir = impl_->settings.static_dir;
    std::error_code ec;
    if (!static_dir.empty() && std::filesystem::is_directory(static_dir, ec)) {
        server.set_mount_point("/", static_dir.string());
    } else {
        server.Get("/", [](const httplib::Request&, httplib::Response& res) {
            reply(res, {200, {{"message", "the web UI bundle is not built; the JSON API is under /api"}}});
        });
    }

    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (res.body.empty() || res.get_header_value("Content-Type") != "application/json") {
            const int status = res.status;
            reply(res, api_error(status, status == 404 ? "not_found" : "http_error",
                                 "no route for " + req.method + " " + req.path));
        }
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "unexpected failure";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            message = e.what();
        } catch (...) {
        }
        reply(res, api_error(500, "internal_error", message));
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
    httplib::Server& server = impl_->server;
    const ServerSettings& s = impl_->settings;
    int port = s.port;
    if (port == 0) {
        port = server.bind_to_any_port(s.host);
    } else if (!server.bind_to_port(s.host, port)) {
        port = -1;
    }
    if (port < 0) {
        throw Error(ErrorCode::IoError, "cannot bind " + s.host + ":" + std::to_string(s.port));
    }
    return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace hsearch::server
