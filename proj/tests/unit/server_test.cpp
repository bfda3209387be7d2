#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "hsearch/server.hpp"

using namespace hsearch;
using nlohmann::json;

namespace {

// 30 reports: 7 mention "slipped", ladder and wet floor topics, some
// boilerplate so clusters and word clouds have material.
std::shared_ptr<const server::AppState> fixture_state(bool with_model = true) {
    std::vector<std::pair<std::string, std::string>> docs;
    for (int i = 0; i < 30; ++i) {
        std::string body;
        if (i < 7) body += "The worker slipped on the wet floor near the site canteen. ";
        if (i >= 4 && i < 16) body += "He fell from the step ladder while fixing the roof sheet. ";
        if (i % 3 == 0) body += "The angle grinder disc shattered and caused a laceration. ";
        body += "First aid was given by the site supervisor. The area was made safe. Work resumed after review.";
        char id[16];
        std::snprintf(id, sizeof id, "RR-%03d", i);
        docs.emplace_back(id, body);
    }
    Corpus corpus = fixtures::corpus(docs);
    Gazetteer gazetteer;
    gazetteer.add("wet floor", "Hazard");
    gazetteer.add("step ladder", "Equipment");
    gazetteer.add("angle grinder disc", "Equipment");
    gazetteer.add("laceration", "HarmfulConsequence");
    gazetteer.add("roof sheet", "ConstructionActivity");
    auto mentions = tag_with_gazetteer(corpus, gazetteer);
    InvertedIndex index = InvertedIndex::build(corpus, mentions, gazetteer);
    std::optional<EmbeddingModel> model;
    if (with_model) {
        TrainingConfig training;
        training.dimension = 12;
        training.epochs = 2;
        model = train(corpus, {}, training);
    }
    AppConfig config;
    config.clustering.min_support = 2;
    return server::make_state(config, std::move(index), std::move(model));
}

server::Api& api() {
    static server::Api instance;
    static bool installed = false;
    if (!installed) {
        instance.install(fixture_state());
        installed = true;
    }
    return instance;
}

void expect_error(const server::ApiResponse& r, int status, const std::string& code) {
    EXPECT_EQ(r.status, status) << r.body.dump();
    EXPECT_EQ(r.body.at("status"), status);
    EXPECT_EQ(r.body.at("code"), code);
    EXPECT_TRUE(r.body.at("message").is_string());
}

}  // namespace

TEST(Api, NotReadyBeforeInstall) {
    server::Api fresh;
    EXPECT_FALSE(fresh.ready());
    expect_error(fresh.health(), 503, "not_ready");
    expect_error(fresh.search(R"({"query":"slipped"})"), 503, "not_ready");
}

TEST(Api, Health) {
    const auto r = api().health();
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(r.body.at("status"), "ok");
    EXPECT_EQ(r.body.at("corpus_size"), 30);
    EXPECT_EQ(r.body.at("version"), HSEARCH_VERSION);
}

TEST(Api, SearchShapeAndErrors) {
    const auto r = api().search(R"({"query":"slipped","page_size":5})");
    ASSERT_EQ(r.status, 200) << r.body.dump();
    EXPECT_EQ(r.body.at("total"), 7);
    EXPECT_EQ(r.body.at("hits").size(), 5u);
    const json& hit = r.body.at("hits")[0];
    for (const char* key : {"doc_id", "score", "snippet", "matched_entities"}) EXPECT_TRUE(hit.contains(key)) << key;
    EXPECT_FALSE(hit.at("snippet").at("highlights").empty());

    expect_error(api().search(R"({"query":""})"), 422, "empty_query");
    expect_error(api().search("not json"), 400, "invalid_body");
    expect_error(api().search(R"({"query":"x","page":0})"), 400, "invalid_body");
    expect_error(api().search(R"({"query":"x","filters":{"colour":"red"}})"), 400, "invalid_body");
    expect_error(api().search(R"({"query":"x","filters":{"entity_category":"Animal"}})"), 400, "unknown_category");
    expect_error(api().search(R"({"query":"slipped","filters":{"cluster_id":"nope"}})"), 400, "unknown_cluster_id");
}

TEST(Api, EntityFilterOnly) {
    const auto r = api().search(R"({"query":"","filters":{"entity_category":"Hazard"}})");
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body.at("total"), 7);
}

TEST(Api, FacetsReferToTheSameResultSet) {
    const std::string body = R"({"query":"slipped ladder"})";
    const auto search = api().search(R"({"query":"slipped ladder","page_size":100})");
    const auto clusters = api().clusters(body);
    const auto cloud = api().wordcloud(body);
    const auto entities = api().entities(body);
    ASSERT_EQ(search.status, 200);
    ASSERT_EQ(clusters.status, 200) << clusters.body.dump();
    ASSERT_EQ(cloud.status, 200) << cloud.body.dump();
    ASSERT_EQ(entities.status, 200);
    const std::size_t total = search.body.at("total");
    EXPECT_EQ(total, 16u);
    EXPECT_EQ(clusters.body.at("result_size"), total);
    EXPECT_EQ(cloud.body.at("result_size"), total);
    EXPECT_EQ(entities.body.at("result_size"), total);

    std::size_t covered = clusters.body.at("residual_size");
    ASSERT_FALSE(clusters.body.at("clusters").empty());
    for (const json& c : clusters.body.at("clusters")) {
        covered += c.at("size").get<std::size_t>();
        json filtered = {{"query", "slipped ladder"}, {"page_size", 100}, {"filters", {{"cluster_id", c.at("cluster_id")}}}};
        const auto sub = api().search(filtered.dump());
        ASSERT_EQ(sub.status, 200);
        EXPECT_EQ(sub.body.at("total"), c.at("size"));
        std::set<std::string> all;
        for (const json& h : search.body.at("hits")) all.insert(h.at("doc_id"));
        for (const json& h : sub.body.at("hits")) EXPECT_TRUE(all.contains(h.at("doc_id")));
    }
    EXPECT_EQ(covered, total);

    for (const json& e : entities.body.at("entities")) {
        json filtered = {{"query", "slipped ladder"},
                         {"filters", {{"entity_category", e.at("category")}, {"entity_surface", e.at("surface")}}}};
        const auto sub = api().search(filtered.dump());
        EXPECT_EQ(sub.body.at("total"), e.at("doc_count")) << e.dump();
    }
    for (const json& t : cloud.body.at("terms")) EXPECT_LE(t.at("doc_frequency").get<std::size_t>(), total);

    expect_error(api().clusters(R"({"query":"zebra"})"), 422, "empty_result");
    expect_error(api().wordcloud(R"({"query":"zebra"})"), 422, "empty_result");
    expect_error(api().entities(R"({"query":"slipped","category":"Animal"})"), 400, "unknown_category");
    const auto hazards = api().entities(R"({"query":"slipped","category":"Hazard"})");
    for (const json& e : hazards.body.at("entities")) EXPECT_EQ(e.at("category"), "Hazard");
}

TEST(Api, CacheHitsEqualColdComputation) {
    server::Api cold;
    cold.install(fixture_state());
    const std::string body = R"({"query":"fell roof"})";
    const auto first = cold.clusters(body);
    const auto before = cold.cache_counters();
    const auto second = cold.clusters(body);
    const auto after = cold.cache_counters();
    EXPECT_EQ(first.body.dump(), second.body.dump());
    EXPECT_EQ(after.hits, before.hits + 1);
    EXPECT_EQ(api().clusters(body).body.dump(), first.body.dump());
    EXPECT_EQ(cold.wordcloud(body).body.dump(), cold.wordcloud(body).body.dump());
    EXPECT_EQ(cold.summary("RR-004").body.dump(), cold.summary("RR-004").body.dump());
}

TEST(Api, DocumentView) {
    const auto r = api().document("RR-006");
    ASSERT_EQ(r.status, 200);
    const std::string text = r.body.at("text");
    // wet floor, step ladder, roof sheet, angle grinder disc, laceration.
    ASSERT_EQ(r.body.at("entities").size(), 5u);
    for (const json& e : r.body.at("entities")) {
        const std::size_t start = e.at("start"), end = e.at("end");
        EXPECT_EQ(text.substr(start, end - start), e.at("surface").get<std::string>());
        EXPECT_EQ(e.at("color").get<std::string>().size(), 7u);
    }
    EXPECT_TRUE(api().document("RR-029").body.at("entities").empty());
    EXPECT_FALSE(r.body.at("sentences").empty());
    expect_error(api().document("RR-999"), 404, "unknown_doc");
}

TEST(Api, Summary) {
    const auto longer = api().summary("RR-006");
    ASSERT_EQ(longer.status, 200);
    EXPECT_FALSE(longer.body.at("bypassed"));
    EXPECT_LE(longer.body.at("sentences").size(), 3u);
    const auto shorter = api().summary("RR-029");
    EXPECT_TRUE(shorter.body.at("bypassed"));
    EXPECT_EQ(shorter.body.at("sentences").size(), 3u);
    expect_error(api().summary("RR-999"), 404, "unknown_doc");

    server::Api no_model;
    no_model.install(fixture_state(false));
    expect_error(no_model.summary("RR-006"), 503, "model_unavailable");
}

TEST(LruCache, EvictsLeastRecentlyUsed) {
    server::LruCache<int> cache(2);
    cache.put("a", 1);
    cache.put("b", 2);
    EXPECT_EQ(cache.get("a"), 1);
    cache.put("c", 3);
    EXPECT_FALSE(cache.get("b"));
    EXPECT_EQ(cache.get("a"), 1);
    EXPECT_EQ(cache.get("c"), 3);
    EXPECT_EQ(cache.hits(), 3u);
    EXPECT_EQ(cache.misses(), 1u);
}
