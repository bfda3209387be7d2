#include "hsearch/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>

#include "hsearch/error.hpp"

namespace hsearch {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& section, const char* key, T& value) {
    if (section.contains(key)) value = section.at(key).get<T>();
}

std::string upper(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

json parse_env_value(const json& current, const std::string& raw, const std::string& name) {
    try {
        if (current.is_string()) return raw;
        if (current.is_boolean()) {
            if (raw == "1" || raw == "true") return true;
            if (raw == "0" || raw == "false") return false;
        } else {
            json value = json::parse(raw);
            if (value.is_number()) return value;
        }
    } catch (const json::exception&) {
    }
    throw Error(ErrorCode::InvalidArgument, "environment variable " + name + " has an invalid value '" + raw + "'");
}

void merge_checked(json& base, const json& overlay, const std::string& where) {
    if (!overlay.is_object()) {
        throw Error(ErrorCode::InvalidArgument, "config " + where + " must be an object");
    }
    for (const auto& [key, value] : overlay.items()) {
        if (!base.contains(key)) {
            throw Error(ErrorCode::InvalidArgument, "unknown config key " + where + key);
        }
        if (base[key].is_object()) {
            merge_checked(base[key], value, where + key + ".");
        } else {
            base[key] = value;
        }
    }
}

}  // namespace

json AppConfig::to_json() const {
    return {
        {"server",
         {{"host", server.host},
          {"port", server.port},
          {"static_dir", server.static_dir},
          {"threads", server.threads},
          {"cache_capacity", server.cache_capacity}}},
        {"artifacts",
         {{"corpus", artifacts.corpus},
          {"annotations", artifacts.annotations},
          {"gazetteer", artifacts.gazetteer},
          {"index", artifacts.index},
          {"model", artifacts.model}}},
        {"search", {{"mode", std::string(to_string(mode))}, {"page_size", page_size}}},
        {"bm25", {{"k1", bm25.k1}, {"b", bm25.b}, {"w_word", bm25.w_word}, {"w_entity", bm25.w_entity}}},
        {"summary",
         {{"damping", summary.damping},
          {"epsilon", summary.pagerank_epsilon},
          {"max_iterations", summary.max_iterations},
          {"mmr_lambda", summary.mmr_lambda},
          {"size", summary.summary_size},
          {"min_doc_sentences", summary.min_doc_sentences},
          {"edge_threshold", summary.edge_threshold}}},
        {"clustering",
         {{"min_support", clustering.min_support},
          {"max_clusters", clustering.max_clusters},
          {"alpha", clustering.alpha},
          {"min_fraction", clustering.min_fraction},
          {"label_terms", clustering.label_terms}}},
        {"embeddings",
         {{"dimension", embeddings.dimension},
          {"window", embeddings.window},
          {"negatives", embeddings.negatives},
          {"epochs", embeddings.epochs},
          {"initial_rate", embeddings.initial_learning_rate},
          {"final_rate", embeddings.final_learning_rate},
          {"min_count", embeddings.min_count},
          {"seed", embeddings.seed},
          {"threads", embeddings.threads}}},
        {"facets",
         {{"wordcloud_top_k", facets.wordcloud_top_k},
          {"entities_top_k", facets.entities_top_k},
          {"summary_terms", facets.summary_terms}}},
    };
}

AppConfig AppConfig::from_json(const json& overlay) {
    AppConfig config;
    json merged = config.to_json();
    merge_checked(merged, overlay, "");
    try {
        const json& s = merged["server"];
        read(s, "host", config.server.host);
        read(s, "port", config.server.port);
        read(s, "static_dir", config.server.static_dir);
        read(s, "threads", config.server.threads);
        read(s, "cache_capacity", config.server.cache_capacity);
        const json& a = merged["artifacts"];
        read(a, "corpus", config.artifacts.corpus);
        read(a, "annotations", config.artifacts.annotations);
        read(a, "gazetteer", config.artifacts.gazetteer);
        read(a, "index", config.artifacts.index);
        read(a, "model", config.artifacts.model);
        config.mode = parse_search_mode(merged["search"]["mode"].get<std::string>());
        read(merged["search"], "page_size", config.page_size);
        const json& b = merged["bm25"];
        read(b, "k1", config.bm25.k1);
        read(b, "b", config.bm25.b);
        read(b, "w_word", config.bm25.w_word);
        read(b, "w_entity", config.bm25.w_entity);
        const json& m = merged["summary"];
        read(m, "damping", config.summary.damping);
        read(m, "epsilon", config.summary.pagerank_epsilon);
        read(m, "max_iterations", config.summary.max_iterations);
        read(m, "mmr_lambda", config.summary.mmr_lambda);
        read(m, "size", config.summary.summary_size);
        read(m, "min_doc_sentences", config.summary.min_doc_sentences);
        read(m, "edge_threshold", config.summary.edge_threshold);
        const json& c = merged["clustering"];
        read(c, "min_support", config.clustering.min_support);
        read(c, "max_clusters", config.clustering.max_clusters);
        read(c, "alpha", config.clustering.alpha);
        read(c, "min_fraction", config.clustering.min_fraction);
        read(c, "label_terms", config.clustering.label_terms);
        const json& e = merged["embeddings"];
        read(e, "dimension", config.embeddings.dimension);
        read(e, "window", config.embeddings.window);
        read(e, "negatives", config.embeddings.negatives);
        read(e, "epochs", config.embeddings.epochs);
        read(e, "initial_rate", config.embeddings.initial_learning_rate);
        read(e, "final_rate", config.embeddings.final_learning_rate);
        read(e, "min_count", config.embeddings.min_count);
        read(e, "seed", config.embeddings.seed);
        read(e, "threads", config.embeddings.threads);
        const json& f = merged["facets"];
        read(f, "wordcloud_top_k", config.facets.wordcloud_top_k);
        read(f, "entities_top_k", config.facets.entities_top_k);
        read(f, "summary_terms", config.facets.summary_terms);
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::InvalidArgument, std::string("config value has the wrong type: ") + ex.what());
    }
    if (config.server.port < 0 || config.server.port > 65535) {
        throw Error(ErrorCode::InvalidArgument, "server.port must lie in [0, 65535]");
    }
    if (config.page_size == 0) {
        throw Error(ErrorCode::InvalidArgument, "search.page_size must be at least 1");
    }
    config.summary.validate();
    config.embeddings.validate();
    return config;
}

std::optional<std::string> process_env(const std::string& name) {
    if (const char* value = std::getenv(name.c_str())) return std::string(value);
    return std::nullopt;
}

AppConfig load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env) {
    json merged = AppConfig{}.to_json();
    if (path) {
        std::ifstream in(*path);
        if (!in) {
            throw Error(ErrorCode::IoError, "cannot read config " + path->string());
        }
        json file;
        try {
            file = json::parse(in);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::ParseError, "config is not valid JSON: " + std::string(e.what()));
        }
        merge_checked(merged, file, "");
    }
    for (auto& [section, keys] : merged.items()) {
        for (auto& [key, value] : keys.items()) {
            const std::string name = "HSEARCH_" + upper(section) + "_" + upper(key);
            if (const auto raw = env(name)) value = parse_env_value(value, *raw, name);
        }
    }
    return AppConfig::from_json(merged);
}

}  // namespace hsearch
