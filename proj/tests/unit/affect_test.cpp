#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "stance/affect.hpp"
#include "stance/error.hpp"
#include "stance/ops.hpp"

using namespace stance;
namespace fs = std::filesystem;

namespace {

EmotionLexicon synthetic_lexicon() {
  EmotionLexicon lex;
  lex.add("happy", Emotion::kJoy);
  lex.add("happy", Emotion::kPositive);
  lex.add("bad", Emotion::kNegative);
  return lex;
}

// Provider whose word table holds one known vector per emotion word.
class FixedWords final : public EmbeddingProvider {
 public:
  explicit FixedWords(std::vector<std::pair<std::string, std::vector<double>>> words) {
    std::vector<double> flat;
    for (auto& [w, v] : words) {
      rows_.push_back(w);
      flat.insert(flat.end(), v.begin(), v.end());
    }
    d_ = words.front().second.size();
    table_ = Tensor::from({words.size(), d_}, flat);
  }
  std::size_t d_model() const override { return d_; }
  std::size_t max_len() const override { return 1; }
  EmbeddedText embed(const TextRef&) const override { throw LookupError("unused"); }
  const Tensor& word_table() const override { return table_; }
  std::size_t word_row(std::string_view word) const override {
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (rows_[i] == word) return i;
    throw LookupError("no vector for " + std::string(word));
  }
  std::vector<std::pair<std::string, Tensor>> parameters() const override { return {}; }

 private:
  std::vector<std::string> rows_;
  std::size_t d_ = 0;
  Tensor table_;
};

}  // namespace

TEST(ExtractEmotions, HandCount) {
  const auto profile = extract_emotions("happy happy bad", synthetic_lexicon(), 3);
  const EmotionProfile want{{Emotion::kPositive, 0.4}, {Emotion::kJoy, 0.4}, {Emotion::kNegative, 0.2}};
  EXPECT_EQ(profile, want);
  EXPECT_TRUE(extract_emotions("", synthetic_lexicon(), 3).empty());
  EXPECT_TRUE(extract_emotions("neutral words only", synthetic_lexicon(), 3).empty());
  EXPECT_EQ(extract_emotions("happy happy bad", synthetic_lexicon(), 1).size(), 1u);
  EXPECT_THROW(extract_emotions("x", synthetic_lexicon(), 0), ConfigError);
}

TEST(ExtractEmotions, ScoresBoundedAndOrdered) {
  EmotionLexicon lex;
  for (std::size_t i = 0; i < kEmotionCount; ++i) lex.add("w" + std::to_string(i), static_cast<Emotion>(i));
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (int k = 0; k < 12; ++k) text += "w" + std::to_string(rng.below(12)) + " ";
    const auto p = extract_emotions(text, lex, 3);
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_GE(p[i].score, 0.0);
      EXPECT_LE(p[i].score, 1.0);
      total += p[i].score;
      if (i > 0) {
        EXPECT_TRUE(p[i - 1].score > p[i].score ||
                    (p[i - 1].score == p[i].score && p[i - 1].emotion < p[i].emotion));
      }
    }
    EXPECT_LE(total, 1.0 + 1e-12);
  }
}

TEST(Lexicon, LoadsNrcFormat) {
  const auto lex = EmotionLexicon::load(fs::path(STANCE_TEST_DATA) / "tiny_lexicon.tsv");
  const auto happy = lex.lookup("happy");
  EXPECT_EQ(std::vector<Emotion>(happy.begin(), happy.end()),
            (std::vector<Emotion>{Emotion::kJoy, Emotion::kPositive}));
  EXPECT_TRUE(lex.lookup("unknown").empty());
}

TEST(Lexicon, RejectsUnknownEmotionWithLine) {
  const fs::path p = fs::temp_directory_path() / "stance_badlex.tsv";
  std::ofstream(p) << "good\tjoy\t1\nodd\tboredom\t1\n";
  try {
    EmotionLexicon::load(p);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("boredom"), std::string::npos);
  }
}

TEST(EmotionFeature, MeansOfWordVectors) {
  FixedWords words({{"fear", {1, 2, 3}}, {"anger", {4, 0, -1}}, {"joy", {0.5, 0.5, 0.5}}});
  EXPECT_EQ(oracle::values(emotion_feature({{Emotion::kAnger, 1.0}}, words)),
            (std::vector<double>{4, 0, -1}));
  EXPECT_EQ(oracle::values(emotion_feature({}, words)), (std::vector<double>{0, 0, 0}));
  const EmotionProfile three{{Emotion::kFear, 0.5}, {Emotion::kAnger, 0.3}, {Emotion::kJoy, 0.2}};
  const auto mean = emotion_feature(three, words);
  EXPECT_NEAR(mean[0], (1 + 4 + 0.5) / 3, 1e-12);
  EXPECT_NEAR(mean[1], (2 + 0 + 0.5) / 3, 1e-12);
  EXPECT_NEAR(mean[2], (3 - 1 + 0.5) / 3, 1e-12);
  const EmotionProfile shuffled{three[2], three[0], three[1]};
  EXPECT_LT(oracle::max_abs_diff(emotion_feature(shuffled, words).data(), mean.data()), 1e-15);
  EXPECT_THROW(emotion_feature({{Emotion::kTrust, 1.0}}, words), LookupError);
}

TEST(EmotionDivergence, Examples) {
  const Tensor a = Tensor::from({2}, {1, -1}), b = Tensor::from({2}, {-1, 2});
  EXPECT_EQ(oracle::values(emotion_divergence(a, b)), (std::vector<double>{2, 3}));
  EXPECT_EQ(oracle::values(emotion_divergence(a, b)), oracle::values(emotion_divergence(b, a)));
  EXPECT_EQ(oracle::values(emotion_divergence(a, a)), (std::vector<double>{0, 0}));
  EXPECT_THROW(emotion_divergence(a, Tensor::zeros({3})), ShapeError);
}

TEST(FeatureCloseness, Examples) {
  const auto c = feature_closeness(Tensor::from({2}, {1, 2}), Tensor::from({2}, {3, 4}));
  EXPECT_NEAR(c[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(c[1], 1.0 / std::sqrt(2.0), 1e-15);
  const Tensor same = Tensor::from({3}, {0.1, 0.2, 0.3});
  EXPECT_EQ(oracle::values(feature_closeness(same, same)), (std::vector<double>{0, 0, 0}));
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a(5), b(5);
    for (auto& x : a) x = rng.uniform(-1, 1);
    for (auto& x : b) x = rng.uniform(-1, 1);
    const auto out = feature_closeness(Tensor::from({5}, a), Tensor::from({5}, b));
    double norm = 0.0;
    for (double x : out.data()) norm += x * x;
    EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
  }
}
