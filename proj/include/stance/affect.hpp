#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stance/embedding.hpp"
#include "stance/tensor.hpp"

namespace stance {

// The ten lexicon emotions, in their canonical order. The order doubles as
// the tie-break when ranking equal scores.
enum class Emotion : std::uint8_t {
  kFear,
  kAnger,
  kAnticipation,
  kTrust,
  kSurprise,
  kPositive,
  kNegative,
  kSadness,
  kDisgust,
  kJoy,
};

inline constexpr std::size_t kEmotionCount = 10;
inline constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "fear",     "anger",    "anticipation", "trust",   "surprise",
    "positive", "negative", "sadness",      "disgust", "joy",
};

std::string_view name(Emotion e);
std::optional<Emotion> parse_emotion(std::string_view name);

// Word -> associated emotions.
class EmotionLexicon {
 public:
  void add(std::string_view word, Emotion emotion);
  std::span<const Emotion> lookup(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

  // Tab-separated `word<TAB>emotion<TAB>0|1` lines; flag-0 lines are skipped.
  // Throws DataError naming the offending line.
  static EmotionLexicon load(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, std::vector<Emotion>> entries_;
};

struct EmotionScore {
  Emotion emotion;
  double score;

  bool operator==(const EmotionScore&) const = default;
};

// Top-K emotions, descending by score, ties in canonical order.
using EmotionProfile = std::vector<EmotionScore>;

// score(e) = hits for e / all emotion hits over the text's tokens.
EmotionProfile extract_emotions(std::string_view text, const EmotionLexicon& lexicon,
                                std::size_t top_k);

// Mean of the profile emotions' word vectors; zeros for an empty profile.
Tensor emotion_feature(const EmotionProfile& profile, const EmbeddingProvider& provider);
// Batched emotion_feature: one row per profile.
Tensor emotion_features(std::span<const EmotionProfile> profiles, const EmbeddingProvider& provider);

// |a - b|, unnormalized.
Tensor emotion_divergence(const Tensor& source, const Tensor& reply);

// L2-normalized |cls_s - cls_r| per row; zeros when the difference vanishes.
Tensor feature_closeness(const Tensor& cls_source, const Tensor& cls_reply);

}  // namespace stance
