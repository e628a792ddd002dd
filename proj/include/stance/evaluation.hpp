#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace stance {

// L×L counts, rows indexed by the true label and columns by the prediction.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t labels = 0);

  std::size_t labels() const { return labels_; }
  std::size_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * labels_ + pred]; }
  void add(std::size_t truth, std::size_t pred);
  std::size_t total() const;
  std::size_t trace() const;
  std::vector<std::vector<std::size_t>> rows() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t labels_;
  std::vector<std::size_t> counts_;
};

ConfusionMatrix confusion(std::span<const std::size_t> preds, std::span<const std::size_t> truths,
                          std::size_t labels);

struct LabelMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvaluationReport {
  double accuracy = 0.0;
  std::vector<LabelMetrics> per_label;
  LabelMetrics macro;
  ConfusionMatrix matrix;
  std::size_t n = 0;
};

// 0/0 ratios count as 0; macro F1 is the mean of per-label F1.
EvaluationReport macro_metrics(const ConfusionMatrix& cm);

nlohmann::json to_json(const EvaluationReport& report, const std::vector<std::string>& label_names);

// Rows are blocks, columns treatments.
using ScoreMatrix = std::vector<std::vector<double>>;

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Which axis of the score matrix holds the blocks. For a methods×metrics
// results table, kRowsAreBlocks ranks the metrics within each method.
enum class FriedmanOrientation { kRowsAreBlocks, kColumnsAreBlocks };

// Average ranks within each block, no tie correction, chi-square upper tail
// with k-1 degrees of freedom.
FriedmanResult friedman(const ScoreMatrix& scores,
                        FriedmanOrientation orientation = FriedmanOrientation::kRowsAreBlocks);

// Ranks 1..k of one block, ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace stance
