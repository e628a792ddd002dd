#include "stance/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "stance/error.hpp"

namespace stance {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t labels) : labels_(labels), counts_(labels * labels, 0) {}

void ConfusionMatrix::add(std::size_t truth, std::size_t pred) {
  if (truth >= labels_ || pred >= labels_) {
    throw ShapeError("confusion: label index (" + std::to_string(truth) + ", " +
                     std::to_string(pred) + ") out of range for " + std::to_string(labels_) +
                     " labels");
  }
  ++counts_[truth * labels_ + pred];
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < labels_; ++i) t += at(i, i);
  return t;
}

std::vector<std::vector<std::size_t>> ConfusionMatrix::rows() const {
  std::vector<std::vector<std::size_t>> out(labels_);
  for (std::size_t i = 0; i < labels_; ++i)
    out[i].assign(counts_.begin() + i * labels_, counts_.begin() + (i + 1) * labels_);
  return out;
}

ConfusionMatrix confusion(std::span<const std::size_t> preds, std::span<const std::size_t> truths,
                          std::size_t labels) {
  if (preds.size() != truths.size()) {
    throw ShapeError("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                     std::to_string(truths.size()) + " truths");
  }
  ConfusionMatrix cm(labels);
  for (std::size_t i = 0; i < preds.size(); ++i) cm.add(truths[i], preds[i]);
  return cm;
}

EvaluationReport macro_metrics(const ConfusionMatrix& cm) {
  const std::size_t L = cm.labels();
  EvaluationReport r;
  r.matrix = cm;
  r.n = cm.total();
  r.accuracy = ratio(cm.trace(), r.n);
  r.per_label.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    std::size_t predicted = 0, actual = 0;
    for (std::size_t j = 0; j < L; ++j) {
      predicted += cm.at(j, l);
      actual += cm.at(l, j);
    }
    LabelMetrics& m = r.per_label[l];
    m.precision = ratio(cm.at(l, l), predicted);
    m.recall = ratio(cm.at(l, l), actual);
    const double denom = m.precision + m.recall;
    m.f1 = denom == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / denom;
    r.macro.precision += m.precision;
    r.macro.recall += m.recall;
    r.macro.f1 += m.f1;
  }
  if (L > 0) {
    r.macro.precision /= static_cast<double>(L);
    r.macro.recall /= static_cast<double>(L);
    r.macro.f1 /= static_cast<double>(L);
  }
  return r;
}

nlohmann::json to_json(const EvaluationReport& report, const std::vector<std::string>& label_names) {
  if (label_names.size() != report.per_label.size()) {
    throw ShapeError("report has " + std::to_string(report.per_label.size()) + " labels, got " +
                     std::to_string(label_names.size()) + " names");
  }
  nlohmann::json per_label = nlohmann::json::object();
  for (std::size_t l = 0; l < label_names.size(); ++l) {
    const auto& m = report.per_label[l];
    per_label[label_names[l]] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
  }
  return {
      {"accuracy", report.accuracy},
      {"per_label", per_label},
      {"macro",
       {{"precision", report.macro.precision},
        {"recall", report.macro.recall},
        {"f1", report.macro.f1}}},
      {"confusion", report.matrix.rows()},
      {"labels", label_names},
      {"n", report.n},
  };
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t k = values.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(k);
  for (std::size_t i = 0; i < k;) {
    std::size_t j = i;
    while (j + 1 < k && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

FriedmanResult friedman(const ScoreMatrix& input, FriedmanOrientation orientation) {
  for (const auto& row : input)
    if (row.size() != input.front().size()) throw ShapeError("friedman: ragged score matrix");
  ScoreMatrix transposed;
  if (orientation == FriedmanOrientation::kColumnsAreBlocks && !input.empty()) {
    transposed.assign(input.front().size(), std::vector<double>(input.size()));
    for (std::size_t i = 0; i < input.size(); ++i)
      for (std::size_t j = 0; j < input[i].size(); ++j) transposed[j][i] = input[i][j];
  }
  const ScoreMatrix& scores = orientation == FriedmanOrientation::kRowsAreBlocks ? input : transposed;
  const std::size_t n = scores.size();
  if (n < 2) throw ConfigError("friedman needs at least 2 blocks, got " + std::to_string(n));
  const std::size_t k = scores.front().size();
  if (k < 2) throw ConfigError("friedman needs at least 2 treatments, got " + std::to_string(k));
  std::vector<double> rank_sums(k, 0.0);
  for (const auto& block : scores) {
    for (double v : block)
      if (!std::isfinite(v)) throw NumericError("friedman: non-finite score");
    const auto ranks = average_ranks(block);
    for (std::size_t j = 0; j < k; ++j) rank_sums[j] += ranks[j];
  }
  const double dn = static_cast<double>(n), dk = static_cast<double>(k);
  double sq = 0.0;
  for (double r : rank_sums) sq += r * r;
  FriedmanResult out;
  out.statistic = std::max(0.0, 12.0 / (dn * dk * (dk + 1.0)) * sq - 3.0 * dn * (dk + 1.0));
  out.p_value = boost::math::gamma_q(0.5 * (dk - 1.0), 0.5 * out.statistic);
  // Keep p inside (0, 1] even when the tail underflows.
  out.p_value = std::clamp(out.p_value, std::numeric_limits<double>::denorm_min(), 1.0);
  return out;
}

}  // namespace stance
