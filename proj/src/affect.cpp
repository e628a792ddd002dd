#include "stance/affect.hpp"

#include <algorithm>
#include <fstream>

#include "stance/error.hpp"
#include "stance/ops.hpp"

namespace stance {

std::string_view name(Emotion e) { return kEmotionNames[static_cast<std::size_t>(e)]; }

std::optional<Emotion> parse_emotion(std::string_view text) {
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    if (kEmotionNames[i] == text) return static_cast<Emotion>(i);
  }
  return std::nullopt;
}

void EmotionLexicon::add(std::string_view word, Emotion emotion) {
  auto& list = entries_[std::string(word)];
  if (std::find(list.begin(), list.end(), emotion) == list.end()) list.push_back(emotion);
}

std::span<const Emotion> EmotionLexicon::lookup(std::string_view word) const {
  auto it = entries_.find(std::string(word));
  if (it == entries_.end()) return {};
  return it->second;
}

EmotionLexicon EmotionLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon " + path.string());
  EmotionLexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected word<TAB>emotion<TAB>flag");
    }
    const std::string word = line.substr(0, tab1);
    const std::string emotion = line.substr(tab1 + 1, tab2 - tab1 - 1);
    const std::string flag = line.substr(tab2 + 1);
    if (flag != "0" && flag != "1") {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": flag must be 0 or 1, got '" +
                      flag + "'");
    }
    const auto parsed = parse_emotion(emotion);
    if (!parsed) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": unknown emotion '" +
                      emotion + "'");
    }
    if (flag == "0") continue;
    // Entries that tokenize to several words can never match a single token.
    const auto words = split_words(word);
    if (words.size() == 1) lexicon.add(words.front(), *parsed);
  }
  return lexicon;
}

EmotionProfile extract_emotions(std::string_view text, const EmotionLexicon& lexicon,
                                std::size_t top_k) {
  if (top_k == 0) throw ConfigError("top-K emotion count must be >= 1");
  std::array<std::size_t, kEmotionCount> hits{};
  std::size_t total = 0;
  for (const auto& word : split_words(text)) {
    for (Emotion e : lexicon.lookup(word)) {
      ++hits[static_cast<std::size_t>(e)];
      ++total;
    }
  }
  EmotionProfile profile;
  if (total == 0) return profile;
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    if (hits[i] == 0) continue;
    profile.push_back({static_cast<Emotion>(i),
                       static_cast<double>(hits[i]) / static_cast<double>(total)});
  }
  // Stable sort keeps canonical order among equal scores.
  std::stable_sort(profile.begin(), profile.end(),
                   [](const EmotionScore& a, const EmotionScore& b) { return a.score > b.score; });
  if (profile.size() > top_k) profile.resize(top_k);
  return profile;
}

Tensor emotion_feature(const EmotionProfile& profile, const EmbeddingProvider& provider) {
  const Tensor rows = emotion_features(std::span<const EmotionProfile>(&profile, 1), provider);
  return reshape(rows, {provider.d_model()});
}

Tensor emotion_features(std::span<const EmotionProfile> profiles, const EmbeddingProvider& provider) {
  std::vector<std::vector<std::size_t>> groups;
  groups.reserve(profiles.size());
  for (const auto& profile : profiles) {
    std::vector<std::size_t> rows;
    for (const auto& entry : profile) rows.push_back(provider.word_row(name(entry.emotion)));
    groups.push_back(std::move(rows));
  }
  return gather_mean(provider.word_table(), groups);
}

Tensor emotion_divergence(const Tensor& source, const Tensor& reply) {
  if (source.shape() != reply.shape()) {
    throw ShapeError("emotion_divergence: " + to_string(source.shape()) + " vs " +
                     to_string(reply.shape()));
  }
  return abs_diff(source, reply);
}

Tensor feature_closeness(const Tensor& cls_source, const Tensor& cls_reply) {
  if (cls_source.shape() != cls_reply.shape()) {
    throw ShapeError("feature_closeness: " + to_string(cls_source.shape()) + " vs " +
                     to_string(cls_reply.shape()));
  }
  return l2_normalize(abs_diff(cls_source, cls_reply));
}

}  // namespace stance
