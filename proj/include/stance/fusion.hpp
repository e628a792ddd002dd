#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stance/attention.hpp"
#include "stance/embedding.hpp"
#include "stance/random.hpp"
#include "stance/tensor.hpp"

namespace stance {

// Ordered stance labels with their frozen mean-pooled embeddings (L×d).
struct LabelSet {
  std::vector<std::string> names;
  Tensor embeddings;

  std::size_t size() const { return names.size(); }
  // Index of `label`, or throws LookupError.
  std::size_t index_of(std::string_view label) const;

  static LabelSet build(std::vector<std::string> names, const EmbeddingProvider& provider);
  static LabelSet from_embeddings(std::vector<std::string> names, Tensor embeddings);
};

// Projection of f_cnct back to d plus the label-shared two-layer transform
// (d -> d/2 -> d/4) applied to every label's distance vector.
struct FusionParams {
  Tensor proj_w;  // 4d×d
  Tensor proj_b;  // d
  Tensor w1;      // d×d/2
  Tensor b1;
  Tensor w2;      // d/2×d/4
  Tensor b2;

  static FusionParams init(std::size_t d_model, Rng& rng);
  void collect(NamedTensors& out) const;
};

// Two hidden dense layers (widths d and d/2, tanh, dropout) and the L-way
// output layer.
struct ClassifierParams {
  Tensor w1;
  Tensor b1;
  Tensor w2;
  Tensor b2;
  Tensor out_w;
  Tensor out_b;
  double dropout = 0.2;

  static ClassifierParams init(std::size_t input_width, std::size_t d_model, std::size_t labels,
                               double dropout, Rng& rng);
  void collect(NamedTensors& out) const;
};

// [v_s, v_r, Δ_E, Δ̃_ℏ] along the last axis.
Tensor concat_features(const Tensor& v_source, const Tensor& v_reply,
                       const Tensor& emotion_divergence, const Tensor& closeness);

// f_cnct ⊕ concat_l(W2·(W1·|z̃ − ĥ_l| + b1) + b2) with z̃ = w·f_cnct + b.
// Works on a single vector or a C×4d batch.
Tensor label_fusion(const Tensor& f_cnct, const LabelSet& labels, const FusionParams& params);

inline std::size_t fused_width(std::size_t d_model, std::size_t labels) {
  return 4 * d_model + labels * (d_model / 4);
}

// Class probabilities (C×L, or L for a single vector).
Tensor classify(const Tensor& f_fsd, const ClassifierParams& params, bool training, Rng& rng);

// Index of the largest probability; first index on ties.
std::size_t argmax(std::span<const double> values);

// Mean weighted cross-entropy over the batch.
Tensor classification_loss(const Tensor& probabilities, std::span<const std::size_t> labels,
                           std::span<const double> class_weights = {});

// w_l = N / (L * count_l); labels absent from `labels` keep weight 1.
std::vector<double> inverse_frequency_weights(std::span<const std::size_t> labels, std::size_t count);

}  // namespace stance
