#include <gtest/gtest.h>

#include <chrono>

#include "fixtures.hpp"
#include "hsearch/error.hpp"
#include "hsearch/kernels.hpp"
#include "hsearch/terms.hpp"
#include "oracles.hpp"

using namespace hsearch;

namespace {

std::vector<const Document*> pointers(const Corpus& corpus) {
    std::vector<const Document*> out;
    for (const Document& d : corpus.documents()) out.push_back(&d);
    return out;
}

void expect_matches_oracle(const Corpus& corpus) {
    const auto expected = oracle::cvalue(pointers(corpus), default_stoplist());
    const auto actual = cvalue_rank(extract_candidates(corpus, default_stoplist()));
    ASSERT_EQ(actual.size(), expected.size());
    for (std::size_t i = 0; i < actual.size(); ++i) {
        EXPECT_EQ(actual[i].words, expected[i].words) << "rank " << i;
        EXPECT_NEAR(actual[i].cvalue, expected[i].cvalue, 1e-9);
        EXPECT_EQ(actual[i].frequency, expected[i].frequency);
        EXPECT_EQ(actual[i].doc_frequency, expected[i].doc_frequency);
    }
}

}  // namespace

TEST(CValue, UnnestedTermScoresLengthTimesFrequency) {
    const Corpus corpus = fixtures::corpus({{"a", "Wet floor here."}, {"b", "Wet floor there."}, {"c", "Wet floor."}});
    const auto terms = cvalue_rank(extract_candidates(corpus, default_stoplist()));
    const auto it = std::find_if(terms.begin(), terms.end(), [](const ScoredTerm& t) { return t.phrase() == "wet floor"; });
    ASSERT_NE(it, terms.end());
    EXPECT_EQ(it->frequency, 3u);
    EXPECT_DOUBLE_EQ(it->cvalue, 3.0);  // log2(2) * 3
}

TEST(CValue, NestedTermIsDiscountedByParents) {
    // "knife blade" occurs 4 times, 3 of them inside "stanley knife blade".
    const Corpus corpus = fixtures::corpus({{"a", "Stanley knife blade. Stanley knife blade."},
                                            {"b", "Stanley knife blade. Knife blade."}});
    const auto candidates = extract_candidates(corpus, default_stoplist());
    const auto terms = cvalue_rank(candidates);
    const auto find = [&](const std::string& p) {
        return std::find_if(terms.begin(), terms.end(), [&](const ScoredTerm& t) { return t.phrase() == p; });
    };
    ASSERT_NE(find("stanley knife blade"), terms.end());
    EXPECT_NEAR(find("stanley knife blade")->cvalue, std::log2(3.0) * 3.0, 1e-12);
    ASSERT_NE(find("knife blade"), terms.end());
    EXPECT_NEAR(find("knife blade")->cvalue, 1.0 * (4.0 - 3.0), 1e-12);
    // "stanley knife" only ever occurs nested: 3 - 3 = 0, dropped.
    EXPECT_EQ(find("stanley knife"), terms.end());

    const auto nested = std::find_if(candidates.begin(), candidates.end(),
                                     [](const CandidateTerm& c) { return c.phrase() == "knife blade"; });
    ASSERT_NE(nested, candidates.end());
    EXPECT_EQ(nested->nested_frequency, 3u);
    EXPECT_EQ(nested->nest_parents.size(), 1u);
}

TEST(CValue, StopwordsAndNumbersBreakCandidates) {
    const Corpus corpus = fixtures::corpus({{"a", "Fell from the 12 metre scaffold tube."}});
    for (const CandidateTerm& c : extract_candidates(corpus, default_stoplist())) {
        for (const std::string& w : c.words) {
            EXPECT_FALSE(default_stoplist().contains(w));
            EXPECT_FALSE(is_numeric(w));
        }
    }
}

TEST(CValue, NeverCrossesSentenceBoundaries) {
    const Corpus corpus = fixtures::corpus({{"a", "Grinder slipped. Operator fell."}});
    for (const CandidateTerm& c : extract_candidates(corpus, default_stoplist())) {
        EXPECT_NE(c.phrase(), "slipped operator");
    }
}

TEST(CValue, MatchesBruteForceOracleOnRandomCorpora) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SCOPED_TRACE(seed);
        expect_matches_oracle(fixtures::random_corpus(seed, 12, 5));
    }
}

TEST(CValue, MatchesBruteForceOracleOnFiftyDocsQuickly) {
    const Corpus corpus = fixtures::random_corpus(2024, 50, 8);
    const auto start = std::chrono::steady_clock::now();
    const auto actual = cvalue_rank(extract_candidates(corpus, default_stoplist()));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(seconds, 2.0);
    EXPECT_FALSE(actual.empty());
    expect_matches_oracle(corpus);
}

TEST(CValue, SerialAndParallelCandidatesAgree) {
    const Corpus corpus = fixtures::random_corpus(77, 40, 8);
    const auto docs = pointers(corpus);
    const auto serial = extract_candidates(docs, default_stoplist(), kernels::Execution::serial);
    const auto parallel = extract_candidates(docs, default_stoplist(), kernels::Execution::parallel);
    ASSERT_EQ(serial.size(), parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        EXPECT_EQ(serial[i].words, parallel[i].words);
        EXPECT_EQ(serial[i].frequency, parallel[i].frequency);
        EXPECT_EQ(serial[i].doc_frequency, parallel[i].doc_frequency);
        EXPECT_EQ(serial[i].nested_frequency, parallel[i].nested_frequency);
        EXPECT_EQ(serial[i].nest_parents, parallel[i].nest_parents);
    }
}

TEST(WordCloud, SubsetTopKAndErrors) {
    const Corpus corpus = fixtures::corpus({{"a", "Wet floor. Wet floor. Angle grinder."},
                                            {"b", "Angle grinder disc."},
                                            {"c", "Scaffold tube."}});
    const std::vector<std::string> subset = {"a", "b", "a"};
    const auto cloud = word_cloud(corpus, subset, 2);
    ASSERT_EQ(cloud.size(), 2u);
    for (const ScoredTerm& t : cloud) EXPECT_NE(t.phrase(), "scaffold tube");
    EXPECT_EQ(word_cloud(corpus, std::vector<std::string>{"a", "b"}, 50).size(),
              word_cloud(corpus, subset, 50).size());

    const auto code = [&](auto f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IoError;
    };
    EXPECT_EQ(code([&] { word_cloud(corpus, std::vector<std::string>{}, 5); }), ErrorCode::EmptySubset);
    EXPECT_EQ(code([&] { word_cloud(corpus, subset, 0); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code([&] { word_cloud(corpus, std::vector<std::string>{"zzz"}, 5); }), ErrorCode::UnknownDocId);
}
