#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "hsearch/clustering.hpp"
#include "hsearch/embeddings.hpp"
#include "hsearch/index.hpp"
#include "hsearch/posting.hpp"
#include "hsearch/summarizer.hpp"

namespace hsearch {

struct ServerSettings {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string static_dir = "webui/dist";
    std::size_t threads = 8;
    std::size_t cache_capacity = 256;
};

struct ArtifactPaths {
    std::string corpus;
    std::string annotations;
    std::string gazetteer;
    std::string index;
    std::string model;
};

struct FacetSettings {
    std::size_t wordcloud_top_k = 50;
    std::size_t entities_top_k = 50;
    std::size_t summary_terms = 200;  // corpus C-value terms used to enrich sentences
};

struct AppConfig {
    ServerSettings server;
    ArtifactPaths artifacts;
    SearchMode mode = SearchMode::hybrid;
    std::size_t page_size = 10;
    Bm25Params bm25;
    SummaryConfig summary;
    ClusteringConfig clustering;
    TrainingConfig embeddings;
    FacetSettings facets;

    nlohmann::json to_json() const;
    // Keys absent from `json` keep their defaults; unknown keys are rejected
    // with InvalidArgument.
    static AppConfig from_json(const nlohmann::json& json);
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

// Defaults, then the optional JSON file, then HSEARCH_<SECTION>_<KEY>
// environment variables (for example HSEARCH_SERVER_PORT).
AppConfig load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env = process_env);

}  // namespace hsearch
