#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "stance/data.hpp"
#include "stance/evaluation.hpp"
#include "stance/model.hpp"

namespace stance {

struct TrainConfig {
  double learning_rate = 2e-6;
  double weight_decay = 0.01;
  std::size_t batch_size = 8;
  std::size_t epochs = 10;
  bool early_stopping = true;
  std::size_t patience = 3;
  bool class_weighting = false;
};

// Everything a run needs; read from one JSON document. Unknown keys are
// rejected so typos do not silently fall back to defaults.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::uint64_t seed = 13;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
  std::optional<double> val_macro_f1;
};

struct TrainResult {
  std::vector<EpochLog> history;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

struct Evaluation {
  EvaluationReport report;
  double loss = 0.0;
  std::vector<std::size_t> predictions;
};

// Inference over `examples` in batches; labels must belong to the model's
// label set.
Evaluation evaluate(const StanceModel& model, const std::vector<Example>& examples,
                    std::size_t batch_size = 32);

// Mini-batch AdamW. Batches are reshuffled every epoch and the last partial
// batch is kept. With a validation set, early stopping tracks validation
// macro-F1 and the best epoch's weights are restored at the end; otherwise
// the final weights are kept.
TrainResult train(StanceModel& model, const std::vector<Example>& train_set,
                  const std::vector<Example>& val_set, const TrainConfig& config, std::uint64_t seed,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace stance
