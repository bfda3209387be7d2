#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "hsearch/annotations.hpp"
#include "hsearch/error.hpp"
#include "oracles.hpp"

using namespace hsearch;

namespace {

ErrorCode code_of(const std::function<void()>& f, std::optional<std::size_t>* line = nullptr) {
    try {
        f();
    } catch (const Error& e) {
        if (line) *line = e.line();
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::IoError;
}

const CategorySet& categories() {
    static const CategorySet set = CategorySet::defaults();
    return set;
}

}  // namespace

TEST(Categories, DefaultsHaveSixColouredCategories) {
    const CategorySet& set = categories();
    ASSERT_EQ(set.all().size(), 6u);
    for (const char* name : {"Hazard", "HarmfulConsequence", "ConstructionActivity", "ProjectAttribute", "Equipment",
                             "Other"}) {
        EXPECT_TRUE(set.contains(name));
        EXPECT_EQ(set.color(name).size(), 7u);
    }
    EXPECT_EQ(code_of([&] { (void)set.color("Animal"); }), ErrorCode::UnknownCategory);
}

TEST(LoadAnnotations, FillsSurfaceFromOffsets) {
    const Corpus corpus = fixtures::corpus({{"d1", "He had a fracture of the wrist."}});
    std::istringstream in(R"({"doc_id":"d1","category":"HarmfulConsequence","start":9,"end":17})");
    const auto mentions = load_annotations(corpus, in, categories());
    ASSERT_EQ(mentions.size(), 1u);
    EXPECT_EQ(mentions[0].surface, "fracture");
    EXPECT_EQ(mentions[0].normalized, "fracture");
}

TEST(LoadAnnotations, ValidationErrors) {
    const Corpus corpus = fixtures::corpus({{"d1", "Wet floor near the door."}});
    std::optional<std::size_t> line;
    const auto load = [&](const std::string& text) {
        std::istringstream in(text);
        return load_annotations(corpus, in, categories());
    };
    EXPECT_EQ(code_of([&] { load(R"({"doc_id":"d1","category":"Hazard","start":0,"end":99})"); }),
              ErrorCode::OffsetOutOfBounds);
    EXPECT_EQ(code_of([&] { load(R"({"doc_id":"d1","category":"Hazard","start":5,"end":5})"); }),
              ErrorCode::OffsetOutOfBounds);
    EXPECT_EQ(code_of([&] { load("\n" R"({"doc_id":"zz","category":"Hazard","start":0,"end":3})"); }, &line),
              ErrorCode::UnknownDocId);
    EXPECT_EQ(line, 2u);
    EXPECT_EQ(code_of([&] { load(R"({"doc_id":"d1","category":"Animal","start":0,"end":3})"); }),
              ErrorCode::UnknownCategory);
    EXPECT_EQ(code_of([&] { load("{oops"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of(
                  [&] {
                      load(R"({"doc_id":"d1","category":"Hazard","start":0,"end":9}
{"doc_id":"d1","category":"Other","start":4,"end":9})");
                  },
                  &line),
              ErrorCode::OverlapConflict);
    EXPECT_EQ(line, 2u);
}

TEST(LoadAnnotations, GoldFixtureCountsPerCategory) {
    // 5 documents, 25 mentions: each document carries one mention per category
    // of the five named categories.
    std::vector<std::pair<std::string, std::string>> docs;
    std::vector<std::pair<std::string, std::string>> planted = {{"Hazard", "wet floor"},
                                                                {"Equipment", "angle grinder"},
                                                                {"HarmfulConsequence", "fracture"},
                                                                {"ConstructionActivity", "roof work"},
                                                                {"ProjectAttribute", "night shift"}};
    std::ostringstream jsonl;
    for (int d = 0; d < 5; ++d) {
        const std::string text = "During roof work on a night shift the angle grinder slid on a wet floor causing "
                                 "a fracture.";
        const std::string id = "g" + std::to_string(d);
        docs.emplace_back(id, text);
        for (const auto& [category, surface] : planted) {
            const std::size_t at = text.find(surface);
            jsonl << nlohmann::json{{"doc_id", id}, {"category", category}, {"start", at},
                                    {"end", at + surface.size()}}
                         .dump()
                  << '\n';
        }
    }
    const Corpus corpus = fixtures::corpus(docs);
    std::istringstream in(jsonl.str());
    const auto mentions = load_annotations(corpus, in, categories());
    ASSERT_EQ(mentions.size(), 25u);
    std::map<std::string, int> per_category;
    for (const auto& m : mentions) {
        ++per_category[m.category];
        EXPECT_EQ(corpus.at(m.doc_id).body.substr(m.start, m.end - m.start), m.surface);
    }
    for (const auto& [category, surface] : planted) EXPECT_EQ(per_category[category], 5);

    std::ostringstream written;
    write_annotations(written, mentions);
    std::istringstream again(written.str());
    EXPECT_EQ(load_annotations(corpus, again, categories()), mentions);
}

TEST(Gazetteer, StanleyKnifeBladeIsEquipment) {
    Gazetteer g;
    g.add("stanley knife blade", "Equipment");
    const Corpus corpus = fixtures::corpus({{"d", "He said a Stanley knife blade slipped and cut him."}});
    const auto mentions = tag_with_gazetteer(corpus, g);
    ASSERT_EQ(mentions.size(), 1u);
    EXPECT_EQ(mentions[0].category, "Equipment");
    EXPECT_EQ(mentions[0].surface, "Stanley knife blade");
    EXPECT_EQ(mentions[0].normalized, "stanley knife blade");
}

TEST(Gazetteer, LongestMatchWins) {
    Gazetteer g;
    g.add("knife", "Equipment");
    g.add("stanley knife", "Equipment");
    const Corpus corpus = fixtures::corpus({{"d", "A stanley knife and a knife."}});
    const auto mentions = tag_with_gazetteer(corpus, g);
    ASSERT_EQ(mentions.size(), 2u);
    EXPECT_EQ(mentions[0].surface, "stanley knife");
    EXPECT_EQ(mentions[1].surface, "knife");
}

TEST(Gazetteer, NeverCrossesSentences) {
    Gazetteer g;
    g.add("wet floor", "Hazard");
    const Corpus corpus = fixtures::corpus({{"d", "It was wet. Floor tiles were loose."}});
    EXPECT_TRUE(tag_with_gazetteer(corpus, g).empty());
}

TEST(Gazetteer, ConflictsAndParsing) {
    Gazetteer g;
    g.add("Step-Ladder", "Equipment");
    g.add("step-ladder", "Equipment");
    EXPECT_EQ(g.size(), 1u);
    EXPECT_EQ(code_of([&] { g.add("step-ladder", "Hazard"); }), ErrorCode::GazetteerConflict);
    EXPECT_EQ(code_of([&] { g.add(" ,, ", "Hazard"); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { tag_with_gazetteer(fixtures::corpus({{"d", "x y."}}), Gazetteer{}); }),
              ErrorCode::InvalidArgument);

    std::optional<std::size_t> line;
    std::istringstream tsv("# comment\nwet floor\tHazard\n\nangle grinder\tTool\n");
    EXPECT_EQ(code_of([&] { Gazetteer::from_tsv(tsv, categories()); }, &line), ErrorCode::UnknownCategory);
    EXPECT_EQ(line, 4u);
    std::istringstream conflict("wet floor\tHazard\nWet  Floor\tOther\n");
    EXPECT_EQ(code_of([&] { Gazetteer::from_tsv(conflict, categories()); }, &line), ErrorCode::GazetteerConflict);
    EXPECT_EQ(line, 2u);

    std::istringstream good("wet floor\tHazard\nangle grinder\tEquipment\n");
    const Gazetteer parsed = Gazetteer::from_tsv(good, categories());
    std::ostringstream out;
    parsed.write_tsv(out);
    std::istringstream back(out.str());
    EXPECT_EQ(Gazetteer::from_tsv(back, categories()).entries(), parsed.entries());
}

TEST(Gazetteer, MatchesBruteForceMatcherOnRandomText) {
    Gazetteer g;
    const std::map<std::string, std::string> phrases = {
        {"knife", "Equipment"},          {"knife blade", "Equipment"},   {"wet floor", "Hazard"},
        {"wet", "Other"},                {"angle grinder disc", "Equipment"}, {"grinder", "Equipment"},
        {"scaffold tube", "Equipment"},  {"site manager", "Other"},      {"steel beam fixing", "ConstructionActivity"},
        {"beam", "Equipment"},
    };
    for (const auto& [p, c] : phrases) g.add(p, c);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Corpus corpus = fixtures::random_corpus(seed, 10, 10);
        for (const Document& doc : corpus.documents()) {
            const auto expected = oracle::gazetteer_matches(doc.tokens, phrases);
            const auto actual = match_gazetteer(doc.tokens, g);
            ASSERT_EQ(actual.size(), expected.size()) << doc.body;
            for (std::size_t i = 0; i < actual.size(); ++i) {
                EXPECT_EQ(actual[i].first_token, expected[i].first);
                EXPECT_EQ(actual[i].end_token, expected[i].end);
                EXPECT_EQ(actual[i].category, expected[i].category);
            }
            const auto mentions = tag_document(doc, g);
            ASSERT_EQ(mentions.size(), expected.size());
            for (std::size_t i = 0; i < mentions.size(); ++i) {
                EXPECT_EQ(mentions[i].start, doc.tokens[expected[i].first].start);
                EXPECT_EQ(mentions[i].end, doc.tokens[expected[i].end - 1].end);
                EXPECT_EQ(doc.body.substr(mentions[i].start, mentions[i].end - mentions[i].start), mentions[i].surface);
            }
            EXPECT_EQ(tag_document(doc, g), mentions);
        }
    }
}

TEST(EntityAggregate, CountsAndOrdering) {
    const Corpus corpus = fixtures::corpus({{"a", "A fracture and another fracture."},
                                            {"b", "Wet floor, fracture."},
                                            {"c", "Wet floor."}});
    std::vector<EntityMention> mentions;
    for (const Document& d : corpus.documents()) {
        for (auto& m : fixtures::mentions_of(d, "fracture", "HarmfulConsequence")) mentions.push_back(m);
        for (auto& m : fixtures::mentions_of(d, "Wet floor", "Hazard")) mentions.push_back(m);
    }
    const auto only_a = entity_aggregate(mentions, {"a"});
    ASSERT_EQ(only_a.size(), 1u);
    EXPECT_EQ(only_a[0], (EntityCount{"fracture", "HarmfulConsequence", 2, 1}));

    EXPECT_TRUE(entity_aggregate(mentions, {}).empty());

    const auto all = entity_aggregate(mentions, {"a", "b", "c"});
    ASSERT_EQ(all.size(), 2u);
    // Tie on doc count (2 each) broken by mention count.
    EXPECT_EQ(all[0], (EntityCount{"fracture", "HarmfulConsequence", 3, 2}));
    EXPECT_EQ(all[1], (EntityCount{"wet floor", "Hazard", 2, 2}));
    std::size_t total = 0;
    for (const auto& e : all) total += e.mention_count;
    EXPECT_EQ(total, mentions.size());

    const auto hazards = entity_aggregate(mentions, {"a", "b", "c"}, std::string("Hazard"));
    ASSERT_EQ(hazards.size(), 1u);
    EXPECT_EQ(hazards[0].normalized, "wet floor");
}

TEST(EntityAggregate, TopEntityMatchesIndependentRecount) {
    std::mt19937_64 rng(99);
    const std::vector<std::pair<std::string, std::string>> inventory = {
        {"Equipment", "angle grinder"}, {"Hazard", "wet floor"}, {"Equipment", "step ladder"},
        {"HarmfulConsequence", "fracture"}};
    std::vector<std::pair<std::string, std::string>> docs;
    for (int d = 0; d < 20; ++d) {
        std::string text;
        const int sentences = 1 + static_cast<int>(rng() % 4);
        for (int s = 0; s < sentences; ++s) text += "Found the " + inventory[rng() % inventory.size()].second + ". ";
        docs.emplace_back("e" + std::to_string(d), text);
    }
    const Corpus corpus = fixtures::corpus(docs);
    std::vector<EntityMention> mentions;
    std::unordered_set<std::string> ids;
    for (const Document& d : corpus.documents()) {
        ids.insert(d.doc_id);
        for (const auto& [category, phrase] : inventory) {
            for (auto& m : fixtures::mentions_of(d, phrase, category)) mentions.push_back(m);
        }
    }
    std::map<std::string, std::set<std::string>> doc_sets;
    std::map<std::string, int> mention_counts;
    for (const auto& m : mentions) {
        doc_sets[m.normalized].insert(m.doc_id);
        ++mention_counts[m.normalized];
    }
    std::string top;
    for (const auto& [phrase, docs_with] : doc_sets) {
        if (top.empty()) {
            top = phrase;
            continue;
        }
        const auto key = [&](const std::string& p) {
            return std::make_tuple(doc_sets[p].size(), mention_counts[p]);
        };
        if (key(phrase) > key(top)) top = phrase;
    }
    const auto aggregated = entity_aggregate(mentions, ids);
    ASSERT_FALSE(aggregated.empty());
    EXPECT_EQ(aggregated[0].normalized, top);
    EXPECT_EQ(aggregated[0].doc_count, doc_sets[top].size());
}
