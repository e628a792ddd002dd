#include "stance/model.hpp"

#include <fstream>
#include <set>

#include "binary_io.hpp"
#include "stance/error.hpp"
#include "stance/ops.hpp"

namespace stance {

namespace {

constexpr char kCheckpointMagic[4] = {'S', 'P', 'L', 'M'};
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr const char* kLabelEmbeddingName = "fusion.label_embeddings";

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return path.string() + ".json";
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config field '") + key + "': " + e.what());
  }
}

// Stacks per-text U×d sequences into C×U×d.
Tensor stack_sequences(const std::vector<EmbeddedText>& texts) {
  std::vector<Tensor> rows;
  rows.reserve(texts.size());
  for (const auto& t : texts) {
    rows.push_back(reshape(t.sequence, {1, t.sequence.dim(0), t.sequence.dim(1)}));
  }
  return rows.size() == 1 ? rows.front() : concat(rows, 0);
}

Tensor stack_cls(const std::vector<EmbeddedText>& texts) {
  std::vector<Tensor> rows;
  rows.reserve(texts.size());
  for (const auto& t : texts) rows.push_back(reshape(t.cls, {1, t.cls.size()}));
  return rows.size() == 1 ? rows.front() : concat(rows, 0);
}

std::vector<std::uint8_t> stack_masks(const std::vector<EmbeddedText>& texts) {
  std::vector<std::uint8_t> mask;
  for (const auto& t : texts) mask.insert(mask.end(), t.mask.begin(), t.mask.end());
  return mask;
}

}  // namespace

nlohmann::json ModelConfig::to_json() const {
  return {
      {"d_model", d_model},
      {"max_len", max_len},
      {"top_k", top_k},
      {"num_heads", num_heads},
      {"dropout", dropout},
      {"labels", labels},
      {"provider", provider == ProviderKind::kToy ? "toy" : "file"},
      {"embeddings", embeddings_path},
      {"lexicon", lexicon_path},
  };
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  ModelConfig c;
  c.d_model = get_or(j, "d_model", c.d_model);
  c.max_len = get_or(j, "max_len", c.max_len);
  c.top_k = get_or(j, "top_k", c.top_k);
  c.num_heads = get_or(j, "num_heads", c.num_heads);
  c.dropout = get_or(j, "dropout", c.dropout);
  c.labels = get_or(j, "labels", c.labels);
  const auto provider = get_or<std::string>(j, "provider", "toy");
  if (provider == "toy") {
    c.provider = ProviderKind::kToy;
  } else if (provider == "file") {
    c.provider = ProviderKind::kFile;
  } else {
    throw ConfigError("provider must be \"toy\" or \"file\", got \"" + provider + "\"");
  }
  c.embeddings_path = get_or<std::string>(j, "embeddings", "");
  c.lexicon_path = get_or<std::string>(j, "lexicon", "");
  return c;
}

std::string source_record_id(std::string_view example_id) { return std::string(example_id) + "#s"; }
std::string reply_record_id(std::string_view example_id) { return std::string(example_id) + "#r"; }

StanceModel::StanceModel(ModelConfig config, std::shared_ptr<EmbeddingProvider> provider,
                         std::shared_ptr<const EmotionLexicon> lexicon, std::uint64_t seed)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      lexicon_(lexicon ? std::move(lexicon) : std::make_shared<const EmotionLexicon>()),
      dropout_rng_(seed, streams::kDropout) {
  if (!provider_) throw ConfigError("model needs an embedding provider");
  if (provider_->d_model() != config_.d_model || provider_->max_len() != config_.max_len) {
    throw ConfigError("provider dims (d=" + std::to_string(provider_->d_model()) +
                      ", U=" + std::to_string(provider_->max_len()) + ") differ from config (d=" +
                      std::to_string(config_.d_model) + ", U=" + std::to_string(config_.max_len) + ")");
  }
  if (config_.top_k == 0) throw ConfigError("top_k must be >= 1");
  labels_ = LabelSet::build(config_.labels, *provider_);
  Rng init(seed, streams::kInit);
  // The toy table draws from its own fork so the layer draws below do not
  // depend on the vocabulary size.
  Rng layers = init.fork(1);
  const std::size_t d = config_.d_model;
  attention = DualAttentionParams::init(d, config_.num_heads, layers);
  han_source = HanParams::init(d, layers);
  han_reply = HanParams::init(d, layers);
  fusion = FusionParams::init(d, layers);
  classifier = ClassifierParams::init(fused_width(d, labels_.size()), d, labels_.size(),
                                      config_.dropout, layers);
}

StanceModel StanceModel::create(ModelConfig config, std::uint64_t seed) {
  std::shared_ptr<EmbeddingProvider> provider;
  if (config.provider == ProviderKind::kToy) {
    Rng table_rng = Rng(seed, streams::kInit).fork(2);
    provider = std::make_shared<ToyEmbedding>(config.d_model, config.max_len, table_rng);
  } else {
    if (config.embeddings_path.empty()) throw ConfigError("file provider needs an embeddings path");
    auto store = std::make_shared<const EmbeddingStore>(
        load_embedding_store(config.embeddings_path, {static_cast<std::uint32_t>(config.d_model),
                                                      static_cast<std::uint32_t>(config.max_len)}));
    provider = std::make_shared<FileEmbedding>(std::move(store));
  }
  std::shared_ptr<const EmotionLexicon> lexicon;
  if (!config.lexicon_path.empty()) {
    lexicon = std::make_shared<const EmotionLexicon>(EmotionLexicon::load(config.lexicon_path));
  }
  return StanceModel(std::move(config), std::move(provider), std::move(lexicon), seed);
}

ForwardResult StanceModel::forward(const std::vector<Example>& batch, bool training) {
  return run(batch, training, dropout_rng_);
}

ForwardResult StanceModel::forward(const std::vector<Example>& batch) const {
  Rng unused(0, streams::kDropout);
  return run(batch, false, unused);
}

ForwardResult StanceModel::run(const std::vector<Example>& batch, bool training, Rng& rng) const {
  if (batch.empty()) throw ShapeError("forward: empty batch");
  std::vector<EmbeddedText> src, rep;
  src.reserve(batch.size());
  rep.reserve(batch.size());
  ForwardResult out;
  for (const auto& ex : batch) {
    const std::string sid = source_record_id(ex.id), rid = reply_record_id(ex.id);
    src.push_back(provider_->embed({sid, ex.source_text}));
    rep.push_back(provider_->embed({rid, ex.reply_text}));
    out.source_emotions.push_back(extract_emotions(ex.source_text, *lexicon_, config_.top_k));
    out.reply_emotions.push_back(extract_emotions(ex.reply_text, *lexicon_, config_.top_k));
  }
  const Tensor hs = stack_sequences(src), hr = stack_sequences(rep);
  const auto mask_s = stack_masks(src), mask_r = stack_masks(rep);

  const auto [ss, sr] = dual_pipeline(hs, hr, attention, mask_s, mask_r);
  out.v_source = hierarchical_attention(ss, han_source, mask_s);
  out.v_reply = hierarchical_attention(sr, han_reply, mask_r);
  out.closeness = feature_closeness(stack_cls(src), stack_cls(rep));
  out.emotion_gap = emotion_divergence(emotion_features(out.source_emotions, *provider_),
                                       emotion_features(out.reply_emotions, *provider_));
  out.f_cnct = concat_features(out.v_source, out.v_reply, out.emotion_gap, out.closeness);
  out.f_fsd = label_fusion(out.f_cnct, labels_, fusion);
  out.probabilities = classify(out.f_fsd, classifier, training, rng);
  return out;
}

NamedTensors StanceModel::parameters() const {
  NamedTensors out;
  for (auto& p : provider_->parameters()) out.push_back(std::move(p));
  attention.collect(out);
  han_source.collect("han.src", out);
  han_reply.collect("han.rep", out);
  fusion.collect(out);
  classifier.collect(out);
  return out;
}

NamedTensors StanceModel::state() const {
  NamedTensors out = parameters();
  out.emplace_back(kLabelEmbeddingName, labels_.embeddings);
  return out;
}

void StanceModel::load_state(const NamedTensors& source) {
  NamedTensors target = state();
  std::set<std::string> expected;
  for (const auto& [name, t] : target) expected.insert(name);
  for (const auto& [name, t] : source) {
    if (!expected.contains(name)) throw FormatError(FormatError::Code::kDimensionConflict, "unexpected tensor '" + name + "'");
  }
  for (auto& [name, t] : target) {
    auto it = std::find_if(source.begin(), source.end(), [&](const auto& p) { return p.first == name; });
    if (it == source.end()) {
      throw FormatError(FormatError::Code::kTruncated, "checkpoint lacks tensor '" + name + "'");
    }
    if (it->second.shape() != t.shape()) {
      throw FormatError(FormatError::Code::kDimensionConflict,
                        "tensor '" + name + "' has shape " + to_string(it->second.shape()) +
                            ", model expects " + to_string(t.shape()));
    }
    const auto src = it->second.data();
    std::copy(src.begin(), src.end(), t.mutable_data().begin());
  }
}

NamedTensors StanceModel::snapshot() const {
  NamedTensors out = state();
  for (auto& [name, t] : out) t = t.detach();
  return out;
}

void StanceModel::save(const std::filesystem::path& path) const {
  write_checkpoint(path,
                   {static_cast<std::uint32_t>(config_.d_model),
                    static_cast<std::uint32_t>(config_.max_len),
                    static_cast<std::uint32_t>(labels_.size())},
                   state());
  std::ofstream side(sidecar_path(path), std::ios::trunc);
  if (!side) throw FormatError(FormatError::Code::kIo, "cannot write " + sidecar_path(path).string());
  side << config_.to_json().dump(2) << '\n';
  if (!side) throw FormatError(FormatError::Code::kIo, "write failed for " + sidecar_path(path).string());
}

StanceModel StanceModel::load(const std::filesystem::path& path) {
  std::ifstream side(sidecar_path(path));
  if (!side) throw FormatError(FormatError::Code::kIo, "cannot open " + sidecar_path(path).string());
  nlohmann::json j;
  try {
    side >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(sidecar_path(path).string() + ": " + e.what());
  }
  ModelConfig config = ModelConfig::from_json(j);
  CheckpointHeader header;
  const NamedTensors tensors = read_checkpoint(path, &header);
  if (header.d_model != config.d_model || header.max_len != config.max_len ||
      header.labels != config.labels.size()) {
    throw FormatError(FormatError::Code::kDimensionConflict,
                      "checkpoint header (d=" + std::to_string(header.d_model) + ", U=" +
                          std::to_string(header.max_len) + ", L=" + std::to_string(header.labels) +
                          ") disagrees with " + sidecar_path(path).string());
  }
  StanceModel model = create(std::move(config), 0);
  model.load_state(tensors);
  return model;
}

void write_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                      const NamedTensors& tensors) {
  io::Writer out(path);
  out.write_magic(kCheckpointMagic);
  out.write<std::uint32_t>(kCheckpointVersion);
  out.write<std::uint32_t>(header.d_model);
  out.write<std::uint32_t>(header.max_len);
  out.write<std::uint32_t>(header.labels);
  for (const auto& [name, t] : tensors) {
    out.write_string(name);
    out.write<std::uint8_t>(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t extent : t.shape()) out.write<std::uint32_t>(static_cast<std::uint32_t>(extent));
    out.write_floats(t.data());
  }
  out.finish();
}

NamedTensors read_checkpoint(const std::filesystem::path& path, CheckpointHeader* header) {
  io::Reader in(path);
  in.expect_magic(kCheckpointMagic);
  const auto version = in.read<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError(FormatError::Code::kVersionMismatch,
                      path.string() + ": checkpoint version " + std::to_string(version) +
                          ", expected " + std::to_string(kCheckpointVersion));
  }
  CheckpointHeader h;
  h.d_model = in.read<std::uint32_t>();
  h.max_len = in.read<std::uint32_t>();
  h.labels = in.read<std::uint32_t>();
  NamedTensors out;
  while (!in.at_end()) {
    std::string name = in.read_string();
    const auto rank = in.read<std::uint8_t>();
    if (rank == 0) throw FormatError(FormatError::Code::kDimensionConflict, "tensor '" + name + "' has rank 0");
    Shape shape(rank);
    for (auto& extent : shape) extent = in.read<std::uint32_t>();
    const auto values = in.read_floats(numel(shape));
    out.emplace_back(std::move(name), Tensor::from(shape, std::vector<double>(values.begin(), values.end())));
  }
  if (header) *header = h;
  return out;
}

}  // namespace stance
