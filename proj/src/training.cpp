#include "stance/training.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "stance/error.hpp"
#include "stance/optim.hpp"

namespace stance {

namespace {

std::vector<std::size_t> label_indices(const LabelSet& labels, const std::vector<Example>& examples) {
  std::vector<std::size_t> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    try {
      out.push_back(labels.index_of(ex.label));
    } catch (const LookupError&) {
      throw DataError("example '" + ex.id + "' has label '" + ex.label +
                      "' outside the model's label set");
    }
  }
  return out;
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& target) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    target = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "d_model", "max_len",  "top_k",    "num_heads",      "dropout",      "labels",
      "provider", "embeddings", "lexicon", "learning_rate", "weight_decay", "batch_size",
      "epochs",  "early_stopping", "patience", "class_weighting", "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config field '" + key + "'");
  }
  RunConfig c;
  c.model = ModelConfig::from_json(j);
  read_field(j, "learning_rate", c.train.learning_rate);
  read_field(j, "weight_decay", c.train.weight_decay);
  read_field(j, "batch_size", c.train.batch_size);
  read_field(j, "epochs", c.train.epochs);
  read_field(j, "early_stopping", c.train.early_stopping);
  read_field(j, "patience", c.train.patience);
  read_field(j, "class_weighting", c.train.class_weighting);
  read_field(j, "seed", c.seed);
  if (c.train.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (c.train.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (c.train.epochs == 0) throw ConfigError("epochs must be >= 1");
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = model.to_json();
  j["learning_rate"] = train.learning_rate;
  j["weight_decay"] = train.weight_decay;
  j["batch_size"] = train.batch_size;
  j["epochs"] = train.epochs;
  j["early_stopping"] = train.early_stopping;
  j["patience"] = train.patience;
  j["class_weighting"] = train.class_weighting;
  j["seed"] = seed;
  return j;
}

Evaluation evaluate(const StanceModel& model, const std::vector<Example>& examples,
                    std::size_t batch_size) {
  if (examples.empty()) throw DataError("cannot evaluate an empty dataset");
  const auto truths = label_indices(model.labels(), examples);
  const std::size_t L = model.labels().size();
  Evaluation out;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < examples.size(); start += batch_size) {
    const std::size_t end = std::min(examples.size(), start + batch_size);
    const std::vector<Example> batch(examples.begin() + start, examples.begin() + end);
    const ForwardResult fr = model.forward(batch);
    const auto probs = fr.probabilities.data();
    const std::span<const std::size_t> batch_truth(truths.data() + start, end - start);
    loss_sum += classification_loss(fr.probabilities.detach(), batch_truth).item() *
                static_cast<double>(end - start);
    for (std::size_t i = 0; i < end - start; ++i) out.predictions.push_back(argmax(probs.subspan(i * L, L)));
  }
  out.loss = loss_sum / static_cast<double>(examples.size());
  out.report = macro_metrics(confusion(out.predictions, truths, L));
  return out;
}

TrainResult train(StanceModel& model, const std::vector<Example>& train_set,
                  const std::vector<Example>& val_set, const TrainConfig& config, std::uint64_t seed,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  if (train_set.empty()) throw DataError("training set is empty");
  if (config.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  const auto truths = label_indices(model.labels(), train_set);
  const std::size_t L = model.labels().size();
  std::vector<double> weights;
  if (config.class_weighting) weights = inverse_frequency_weights(truths, L);

  NamedTensors named = model.parameters();
  std::vector<Tensor> params;
  for (auto& [name, t] : named) params.push_back(t);
  AdamW optimizer(params, {config.learning_rate, 0.9, 0.999, 1e-8, config.weight_decay});

  Rng shuffle_rng(seed, streams::kShuffle);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::optional<double> best_f1;
  NamedTensors best_state;
  std::size_t wait = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<Example> batch;
      std::vector<std::size_t> batch_truth;
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(train_set[order[k]]);
        batch_truth.push_back(truths[order[k]]);
      }
      optimizer.zero_grad();
      const ForwardResult fr = model.forward(batch, true);
      const Tensor loss = classification_loss(fr.probabilities, batch_truth, weights);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw NumericError("loss diverged to " + std::to_string(value) + " in epoch " +
                           std::to_string(epoch));
      }
      backward(loss);
      optimizer.step();
      loss_sum += value * static_cast<double>(end - start);
      const auto probs = fr.probabilities.data();
      for (std::size_t i = 0; i < batch.size(); ++i)
        if (argmax(probs.subspan(i * L, L)) == batch_truth[i]) ++correct;
    }
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(train_set.size());
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    bool stop = false;
    if (!val_set.empty()) {
      const Evaluation ev = evaluate(model, val_set);
      log.val_loss = ev.loss;
      log.val_accuracy = ev.report.accuracy;
      log.val_macro_f1 = ev.report.macro.f1;
      if (!best_f1 || ev.report.macro.f1 > *best_f1) {
        best_f1 = ev.report.macro.f1;
        best_state = model.snapshot();
        result.best_epoch = epoch;
        wait = 0;
      } else if (config.early_stopping && ++wait >= config.patience) {
        stop = true;
      }
    } else {
      result.best_epoch = epoch;
    }
    result.history.push_back(log);
    if (on_epoch) on_epoch(log);
    if (stop) {
      result.stopped_early = true;
      break;
    }
  }
  if (!best_state.empty()) model.load_state(best_state);
  return result;
}

}  // namespace stance
