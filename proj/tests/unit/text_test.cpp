#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "hsearch/text.hpp"

using namespace hsearch;

namespace {

std::vector<std::string> sentence_texts(const std::string& text) {
    std::vector<std::string> out;
    for (const SentenceSpan& s : segment_sentences(text)) out.push_back(text.substr(s.start, s.end - s.start));
    return out;
}

}  // namespace

TEST(Sentences, SplitsOnTerminalPunctuation) {
    EXPECT_EQ(sentence_texts("The IP slipped. He fell! Was he hurt? Yes."),
              (std::vector<std::string>{"The IP slipped.", "He fell!", "Was he hurt?", "Yes."}));
}

TEST(Sentences, AbbreviationsDoNotSplit) {
    EXPECT_EQ(sentence_texts("Mr. Jones used the grinder, e.g. for cutting. Dr. Smith attended."),
              (std::vector<std::string>{"Mr. Jones used the grinder, e.g. for cutting.", "Dr. Smith attended."}));
}

TEST(Sentences, LowercaseContinuationDoesNotSplit) {
    EXPECT_EQ(sentence_texts("Approx. three metres. Then he fell."),
              (std::vector<std::string>{"Approx. three metres.", "Then he fell."}));
    EXPECT_EQ(sentence_texts("The 2.5 m ladder slipped."), (std::vector<std::string>{"The 2.5 m ladder slipped."}));
}

TEST(Sentences, TrailingTextWithoutPunctuationIsASentence) {
    EXPECT_EQ(sentence_texts("He fell.  No injury reported"),
              (std::vector<std::string>{"He fell.", "No injury reported"}));
    EXPECT_TRUE(segment_sentences("   ").empty());
}

TEST(Sentences, SpansAreIndexedAndOrdered) {
    const std::string text = "He fell. She ran. It hurt.";
    const auto spans = segment_sentences(text);
    ASSERT_EQ(spans.size(), 3u);
    for (std::size_t i = 0; i < spans.size(); ++i) {
        EXPECT_EQ(spans[i].index, i);
        EXPECT_LT(spans[i].start, spans[i].end);
        if (i > 0) EXPECT_LE(spans[i - 1].end, spans[i].start);
    }
}

TEST(Tokens, OffsetsPointAtSurfaces) {
    const std::string text = "Worker's step-ladder, 3 rungs.";
    const auto tokens = tokenize(text);
    std::vector<std::string> surfaces;
    for (const Token& t : tokens) {
        EXPECT_EQ(text.substr(t.start, t.end - t.start), t.surface);
        surfaces.push_back(t.surface);
    }
    EXPECT_EQ(surfaces, (std::vector<std::string>{"Worker", "s", "step-ladder", "3", "rungs"}));
    EXPECT_EQ(tokens[2].normalized, "step-ladder");
}

TEST(Tokens, TrailingHyphenIsNotPartOfToken) {
    const auto tokens = tokenize("cut- and run");
    ASSERT_EQ(tokens.size(), 3u);
    EXPECT_EQ(tokens[0].surface, "cut");
}

TEST(Tokens, SentenceIndexFollowsSpans) {
    const std::string text = "He slipped. She fell.";
    const auto tokens = tokenize(text, segment_sentences(text));
    ASSERT_EQ(tokens.size(), 4u);
    EXPECT_EQ(tokens[1].sentence_index, 0u);
    EXPECT_EQ(tokens[2].sentence_index, 1u);
}

TEST(Tokens, Utf8LettersAreWordCharacters) {
    const std::string text = "Café floor — wet";
    const auto tokens = tokenize(text);
    ASSERT_EQ(tokens.size(), 3u);
    EXPECT_EQ(tokens[0].surface, "Café");
    EXPECT_EQ(tokens[0].normalized, "café");
    EXPECT_EQ(tokens[0].end, 5u);  // byte offsets
}

TEST(Text, NormalizePhraseCollapsesWhitespace) {
    EXPECT_EQ(normalize_phrase("  Stanley   Knife\tBlade "), "stanley knife blade");
}

TEST(Text, NumericTokens) {
    EXPECT_TRUE(is_numeric("2019"));
    EXPECT_TRUE(is_numeric("12-14"));
    EXPECT_FALSE(is_numeric("m2"));
    EXPECT_FALSE(is_numeric(""));
}

TEST(Text, HashIsStable) {
    EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
    EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
}
