#include "stance/fusion.hpp"

#include <cmath>

#include "stance/error.hpp"
#include "stance/ops.hpp"

namespace stance {

namespace {

Tensor uniform_weight(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::vector<double> v(in * out);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor::from({in, out}, std::move(v), true);
}

void require_width(const Tensor& x, std::size_t width, const char* what) {
  if (x.dim(-1) != width) {
    throw ShapeError(std::string(what) + ": expected width " + std::to_string(width) + ", got " +
                     to_string(x.shape()));
  }
}

}  // namespace

std::size_t LabelSet::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == label) return i;
  throw LookupError("unknown label '" + std::string(label) + "'");
}

LabelSet LabelSet::build(std::vector<std::string> names, const EmbeddingProvider& provider) {
  Tensor emb = label_embeddings(provider, names);
  return from_embeddings(std::move(names), std::move(emb));
}

LabelSet LabelSet::from_embeddings(std::vector<std::string> names, Tensor embeddings) {
  if (names.size() < 2) throw ConfigError("need at least two labels");
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j]) throw ConfigError("duplicate label '" + names[i] + "'");
  if (embeddings.rank() != 2 || embeddings.dim(0) != names.size()) {
    throw ShapeError("label embeddings " + to_string(embeddings.shape()) + " do not match " +
                     std::to_string(names.size()) + " labels");
  }
  LabelSet set;
  set.names = std::move(names);
  set.embeddings = embeddings.detach();
  return set;
}

FusionParams FusionParams::init(std::size_t d_model, Rng& rng) {
  if (d_model < 4 || d_model % 4 != 0) {
    throw ConfigError("d_model must be a positive multiple of 4, got " + std::to_string(d_model));
  }
  FusionParams p;
  p.proj_w = uniform_weight(4 * d_model, d_model, rng);
  p.proj_b = Tensor::zeros({d_model}, true);
  p.w1 = uniform_weight(d_model, d_model / 2, rng);
  p.b1 = Tensor::zeros({d_model / 2}, true);
  p.w2 = uniform_weight(d_model / 2, d_model / 4, rng);
  p.b2 = Tensor::zeros({d_model / 4}, true);
  return p;
}

void FusionParams::collect(NamedTensors& out) const {
  out.emplace_back("fusion.proj.w", proj_w);
  out.emplace_back("fusion.proj.b", proj_b);
  out.emplace_back("fusion.w1", w1);
  out.emplace_back("fusion.b1", b1);
  out.emplace_back("fusion.w2", w2);
  out.emplace_back("fusion.b2", b2);
}

ClassifierParams ClassifierParams::init(std::size_t input_width, std::size_t d_model,
                                        std::size_t labels, double dropout, Rng& rng) {
  if (dropout < 0.0 || dropout >= 1.0) {
    throw ConfigError("dropout must lie in [0, 1), got " + std::to_string(dropout));
  }
  ClassifierParams p;
  p.w1 = uniform_weight(input_width, d_model, rng);
  p.b1 = Tensor::zeros({d_model}, true);
  p.w2 = uniform_weight(d_model, d_model / 2, rng);
  p.b2 = Tensor::zeros({d_model / 2}, true);
  p.out_w = uniform_weight(d_model / 2, labels, rng);
  p.out_b = Tensor::zeros({labels}, true);
  p.dropout = dropout;
  return p;
}

void ClassifierParams::collect(NamedTensors& out) const {
  out.emplace_back("cls.dense1.w", w1);
  out.emplace_back("cls.dense1.b", b1);
  out.emplace_back("cls.dense2.w", w2);
  out.emplace_back("cls.dense2.b", b2);
  out.emplace_back("cls.out.w", out_w);
  out.emplace_back("cls.out.b", out_b);
}

Tensor concat_features(const Tensor& v_source, const Tensor& v_reply,
                       const Tensor& emotion_divergence, const Tensor& closeness) {
  const Shape& s = v_source.shape();
  if (v_reply.shape() != s || emotion_divergence.shape() != s || closeness.shape() != s) {
    throw ShapeError("concat_features: parts " + to_string(s) + ", " +
                     to_string(v_reply.shape()) + ", " + to_string(emotion_divergence.shape()) +
                     ", " + to_string(closeness.shape()) + " must share one shape");
  }
  return concat({v_source, v_reply, emotion_divergence, closeness}, -1);
}

Tensor label_fusion(const Tensor& f_cnct, const LabelSet& labels, const FusionParams& params) {
  const std::size_t d = params.proj_w.dim(1);
  require_width(f_cnct, 4 * d, "label_fusion");
  if (labels.embeddings.shape() != Shape{labels.size(), d}) {
    throw ShapeError("label_fusion: label embeddings " + to_string(labels.embeddings.shape()) +
                     " do not match d_model=" + std::to_string(d));
  }
  const bool single = f_cnct.rank() == 1;
  const Tensor batch = single ? reshape(f_cnct, {1, f_cnct.size()}) : f_cnct;
  const Tensor projected = linear(batch, params.proj_w, params.proj_b);

  std::vector<Tensor> parts{batch};
  for (std::size_t l = 0; l < labels.size(); ++l) {
    const Tensor label_row = reshape(slice(labels.embeddings, 0, l, 1), {d});
    const Tensor distance = abs_diff(projected, label_row);
    const Tensor hidden = linear(distance, params.w1, params.b1);
    parts.push_back(linear(hidden, params.w2, params.b2));
  }
  const Tensor fused = concat(parts, -1);
  return single ? reshape(fused, {fused.size()}) : fused;
}

Tensor classify(const Tensor& f_fsd, const ClassifierParams& params, bool training, Rng& rng) {
  require_width(f_fsd, params.w1.dim(0), "classify");
  Tensor h = tanh(linear(f_fsd, params.w1, params.b1));
  h = dropout(h, params.dropout, training, rng);
  h = tanh(linear(h, params.w2, params.b2));
  h = dropout(h, params.dropout, training, rng);
  return softmax(linear(h, params.out_w, params.out_b), -1);
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ShapeError("argmax of empty range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

Tensor classification_loss(const Tensor& probabilities, std::span<const std::size_t> labels,
                           std::span<const double> class_weights) {
  if (probabilities.rank() == 1) {
    return weighted_nll(reshape(probabilities, {1, probabilities.size()}), labels, class_weights);
  }
  return weighted_nll(probabilities, labels, class_weights);
}

std::vector<double> inverse_frequency_weights(std::span<const std::size_t> labels, std::size_t count) {
  std::vector<std::size_t> freq(count, 0);
  for (std::size_t l : labels) {
    if (l >= count) throw ShapeError("label index " + std::to_string(l) + " out of range");
    ++freq[l];
  }
  std::vector<double> weights(count, 1.0);
  for (std::size_t l = 0; l < count; ++l) {
    if (freq[l] == 0) continue;
    weights[l] = static_cast<double>(labels.size()) / (static_cast<double>(count * freq[l]));
  }
  return weights;
}

}  // namespace stance
