#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "stance/affect.hpp"
#include "stance/attention.hpp"
#include "stance/data.hpp"
#include "stance/embedding.hpp"
#include "stance/fusion.hpp"
#include "stance/random.hpp"
#include "stance/tensor.hpp"

namespace stance {

enum class ProviderKind { kToy, kFile };

struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t max_len = 50;
  std::size_t top_k = 3;
  std::size_t num_heads = 4;
  double dropout = 0.2;
  std::vector<std::string> labels;
  ProviderKind provider = ProviderKind::kToy;
  std::string embeddings_path;  // file provider only
  std::string lexicon_path;     // empty: no emotion features

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// Record ids used by the embedding file for an example's two texts.
std::string source_record_id(std::string_view example_id);
std::string reply_record_id(std::string_view example_id);

// Every intermediate of one forward pass, batched along the first axis.
struct ForwardResult {
  Tensor v_source;      // C×d
  Tensor v_reply;       // C×d
  Tensor emotion_gap;   // C×d, Δ_E
  Tensor closeness;     // C×d
  Tensor f_cnct;        // C×4d
  Tensor f_fsd;         // C×(4d + L·d/4)
  Tensor probabilities; // C×L
  std::vector<EmotionProfile> source_emotions;
  std::vector<EmotionProfile> reply_emotions;
};

class StanceModel {
 public:
  // Builds fresh parameters from `seed`. The provider must match the
  // config's d_model and max_len.
  StanceModel(ModelConfig config, std::shared_ptr<EmbeddingProvider> provider,
              std::shared_ptr<const EmotionLexicon> lexicon, std::uint64_t seed);

  // Opens the provider and lexicon named in `config`.
  static StanceModel create(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const LabelSet& labels() const { return labels_; }
  const EmbeddingProvider& provider() const { return *provider_; }
  const EmotionLexicon& lexicon() const { return *lexicon_; }

  ForwardResult forward(const std::vector<Example>& batch, bool training);
  ForwardResult forward(const std::vector<Example>& batch) const;

  // Trainable tensors in a fixed order, with stable names.
  NamedTensors parameters() const;
  // Trainable tensors plus frozen state that a checkpoint must carry.
  NamedTensors state() const;

  // Copies values from `source` by name; shapes must match.
  void load_state(const NamedTensors& source);
  // Deep copy of the current values (detached).
  NamedTensors snapshot() const;

  // Binary checkpoint plus a JSON sidecar (`path` + ".json") holding the
  // config.
  void save(const std::filesystem::path& path) const;
  static StanceModel load(const std::filesystem::path& path);

  DualAttentionParams attention;
  HanParams han_source;
  HanParams han_reply;
  FusionParams fusion;
  ClassifierParams classifier;

 private:
  ForwardResult run(const std::vector<Example>& batch, bool training, Rng& rng) const;

  ModelConfig config_;
  std::shared_ptr<EmbeddingProvider> provider_;
  std::shared_ptr<const EmotionLexicon> lexicon_;
  LabelSet labels_;
  Rng dropout_rng_;
};

// Named-tensor checkpoint table.
struct CheckpointHeader {
  std::uint32_t d_model = 0;
  std::uint32_t max_len = 0;
  std::uint32_t labels = 0;
};

void write_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                      const NamedTensors& tensors);
NamedTensors read_checkpoint(const std::filesystem::path& path, CheckpointHeader* header = nullptr);

}  // namespace stance
