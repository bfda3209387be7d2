#pragma once

#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hsearch/annotations.hpp"
#include "hsearch/clustering.hpp"
#include "hsearch/config.hpp"
#include "hsearch/embeddings.hpp"
#include "hsearch/index.hpp"
#include "hsearch/terms.hpp"

namespace hsearch::server {

// Everything a request reads. Immutable once installed.
struct AppState {
    AppConfig config;
    CategorySet categories = CategorySet::defaults();
    InvertedIndex index;
    std::optional<EmbeddingModel> model;
    std::vector<ScoredTerm> summary_terms;
};

// Computes the corpus terms used for summary enrichment.
std::shared_ptr<const AppState> make_state(AppConfig config, InvertedIndex index,
                                           std::optional<EmbeddingModel> model);

// Loads config.artifacts.index (required) and config.artifacts.model (optional).
std::shared_ptr<const AppState> load_state(const AppConfig& config);

template <typename Value>
class LruCache {
public:
    explicit LruCache(std::size_t capacity) : capacity_(capacity) {}

    std::optional<Value> get(const std::string& key) {
        std::lock_guard lock(mutex_);
        const auto it = map_.find(key);
        if (it == map_.end()) {
            ++misses_;
            return std::nullopt;
        }
        ++hits_;
        order_.splice(order_.begin(), order_, it->second);
        return it->second->second;
    }

    void put(const std::string& key, Value value) {
        std::lock_guard lock(mutex_);
        if (capacity_ == 0) return;
        if (const auto it = map_.find(key); it != map_.end()) {
            it->second->second = std::move(value);
            order_.splice(order_.begin(), order_, it->second);
            return;
        }
        order_.emplace_front(key, std::move(value));
        map_.emplace(key, order_.begin());
        if (order_.size() > capacity_) {
            map_.erase(order_.back().first);
            order_.pop_back();
        }
    }

    std::size_t hits() const {
        std::lock_guard lock(mutex_);
        return hits_;
    }
    std::size_t misses() const {
        std::lock_guard lock(mutex_);
        return misses_;
    }

private:
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::list<std::pair<std::string, Value>> order_;
    std::unordered_map<std::string, typename std::list<std::pair<std::string, Value>>::iterator> map_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

ApiResponse api_error(int status, std::string_view code, std::string_view message);

// JSON handlers independent of any transport. Every response body is JSON;
// errors carry {status, code, message}.
class Api {
public:
    Api() = default;

    // Swaps in a new state; caches start empty for it.
    void install(std::shared_ptr<const AppState> state);
    bool ready() const;

    ApiResponse health() const;
    ApiResponse search(std::string_view body) const;
    ApiResponse wordcloud(std::string_view body) const;
    ApiResponse clusters(std::string_view body) const;
    ApiResponse entities(std::string_view body) const;
    ApiResponse document(std::string_view doc_id) const;
    ApiResponse summary(std::string_view doc_id) const;

    struct CacheCounters {
        std::size_t hits = 0;
        std::size_t misses = 0;
    };
    CacheCounters cache_counters() const;

private:
    struct Loaded {
        explicit Loaded(std::shared_ptr<const AppState> s);

        std::shared_ptr<const AppState> state;
        mutable LruCache<ClusterSet> clusters;
        mutable LruCache<nlohmann::json> wordclouds;
        mutable LruCache<nlohmann::json> summaries;
    };

    std::shared_ptr<const Loaded> current() const;

    mutable std::mutex mutex_;
    std::shared_ptr<const Loaded> loaded_;
};

// HTTP/1.1 binding of an Api, with the static UI mounted at "/".
class HttpServer {
public:
    HttpServer(Api& api, ServerSettings settings);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds host:port (port 0 picks a free one) and returns the bound port.
    int bind();
    // Blocks serving requests until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace hsearch::server
