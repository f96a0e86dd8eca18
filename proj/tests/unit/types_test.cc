#include "spo/types.h"

#include <random>

#include "gtest/gtest.h"
#include "testing/fixtures.h"

namespace spo {
namespace {

TEST(ArgmaxLabelTest, UniqueMaximum) {
  EXPECT_EQ(argmax_label({{0.2, 0.8}}), 1);
  EXPECT_EQ(argmax_label({{0.25, 0.25, 0.5}}), 2);
}

TEST(ArgmaxLabelTest, TieGoesToLowestIndex) {
  EXPECT_EQ(argmax_label({{0.5, 0.5}}), 0);
  EXPECT_EQ(argmax_label({{0.1, 0.45, 0.45}}), 1);
}

TEST(ArgmaxLabelTest, RepeatedEvaluationIsStable) {
  const LabelDistribution dist{{0.3, 0.3, 0.4}};
  const int first = argmax_label(dist);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(argmax_label(dist), first);
}

TEST(LabelDistributionTest, Validity) {
  EXPECT_TRUE((LabelDistribution{{0.5, 0.5}}).is_valid());
  EXPECT_TRUE((LabelDistribution{{0.5, 0.5 + 5e-7}}).is_valid());
  EXPECT_FALSE((LabelDistribution{{0.5, 0.6}}).is_valid());
  EXPECT_FALSE((LabelDistribution{{1.5, -0.5}}).is_valid());
  EXPECT_FALSE((LabelDistribution{{}}).is_valid());
}

TEST(TokenizeTest, PunctuationIsPeeledOff) {
  const auto tokens = tokenize("Hello, world! (really)");
  std::vector<std::string> surfaces;
  for (const auto& t : tokens) surfaces.push_back(t.surface);
  EXPECT_EQ(surfaces, (std::vector<std::string>{"Hello", ",", "world", "!",
                                                "(", "really", ")"}));
  EXPECT_EQ(tokens[0].norm, "hello");
  EXPECT_EQ(tokens[0].pos, Pos::kOther);
}

TEST(TokenizeTest, InnerPunctuationStays) {
  const auto tokens = tokenize("that's it...");
  ASSERT_EQ(tokens.size(), 3u);
  EXPECT_EQ(tokens[0].surface, "that's");
  EXPECT_EQ(tokens[2].surface, "...");
}

TEST(TokenizeTest, EmptyAndBlank) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" \t\n ").empty());
}

// detokenize(tokenize(s)) keeps surfaces and order of whitespace-separated
// input, and tokenizing again is a fixed point.
TEST(TokenizeTest, RoundTripProperty) {
  std::mt19937 rng(7);
  const std::string alphabet = "abcXYZ,.!?'()-";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    std::vector<std::string> words;
    const int n_words = 1 + static_cast<int>(rng() % 8);
    for (int w = 0; w < n_words; ++w) {
      std::string word;
      const int len = 1 + static_cast<int>(rng() % 6);
      for (int c = 0; c < len; ++c) word.push_back(alphabet[rng() % alphabet.size()]);
      words.push_back(word);
      text += (w ? std::string(1 + rng() % 3, ' ') : "") + word;
    }
    const auto tokens = tokenize(text);
    const std::string joined = detokenize(tokens);
    std::string concatenated, original;
    for (const auto& t : tokens) concatenated += t.surface;
    for (const auto& w : words) original += w;
    EXPECT_EQ(concatenated, original) << text;
    const auto again = tokenize(joined);
    ASSERT_EQ(again.size(), tokens.size()) << text;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      EXPECT_EQ(again[i].surface, tokens[i].surface);
      EXPECT_EQ(again[i].norm, to_lower(tokens[i].surface));
    }
  }
}

TEST(MethodTest, NamesRoundTrip) {
  for (auto m : {Method::kUSpo, Method::kHuSpo, Method::kBuSpo, Method::kBuSpof,
                 Method::kStatic, Method::kRand, Method::kWsa}) {
    EXPECT_EQ(parse_method(method_name(m)), m);
  }
  EXPECT_FALSE(parse_method("pso").has_value());
}

TEST(AttackConfigTest, RejectsZeroCap) {
  AttackConfig config;
  config.max_replacements = 0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config.max_replacements = 1;
  EXPECT_NO_THROW(config.validate());
  EXPECT_EQ(AttackConfig{}.max_replacements, 20);
}

TEST(LoadDatasetTest, ParsesJsonLines) {
  testing::TempDir dir;
  const auto path = dir.write(
      "d.jsonl",
      "{\"id\": \"a\", \"text\": \"Good movie.\", \"label\": 1}\n\n"
      "{\"id\": \"b\", \"text\": \"bad\", \"label\": 0}\n");
  const auto docs = load_dataset(path);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].id, "a");
  EXPECT_EQ(docs[0].gold_label, 1);
  EXPECT_EQ(docs[0].tokens.size(), 3u);
  EXPECT_EQ(docs[1].text(), "bad");
}

TEST(LoadDatasetTest, ReportsLineOfBadRecord) {
  testing::TempDir dir;
  const auto path = dir.write(
      "d.jsonl",
      "{\"id\": \"a\", \"text\": \"fine\", \"label\": 1}\n"
      "{\"id\": \"b\", \"text\": \"missing label\"}\n");
  try {
    load_dataset(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(load_dataset(dir.file("absent.jsonl")), std::runtime_error);
  const auto empty_text =
      dir.write("e.jsonl", "{\"id\": \"a\", \"text\": \"  \", \"label\": 0}\n");
  EXPECT_THROW(load_dataset(empty_text), FormatError);
}

}  // namespace
}  // namespace spo
