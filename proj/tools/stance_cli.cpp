// Command-line driver: train, evaluate, predict, dump-intermediates.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stance/data.hpp"
#include "stance/error.hpp"
#include "stance/evaluation.hpp"
#include "stance/model.hpp"
#include "stance/training.hpp"

using namespace stance;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  std::string train_path, val_path, model_path, data_path, report_path, out_path, log_path;
  std::optional<std::uint64_t> split_seed;
  std::string split;
  std::string source, reply, record_id;
  bool no_flatten = false;
  std::string scores_path;
  bool columns_are_blocks = false;
};

RunConfig run_config(const Options& opt) {
  RunConfig cfg = opt.config_path.empty() ? RunConfig{} : RunConfig::load(opt.config_path);
  if (opt.seed) cfg.seed = *opt.seed;
  if (cfg.model.labels.empty()) throw ConfigError("config must list the stance labels");
  return cfg;
}

std::vector<Example> filter_split(std::vector<Example> examples, const std::string& split) {
  if (split.empty()) return examples;
  const auto s = parse_split(split);
  if (!s) throw ConfigError("unknown split '" + split + "'");
  return select_split(examples, *s);
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string describe(const EmotionProfile& profile) {
  if (profile.empty()) return "(none)";
  std::string out;
  for (const auto& e : profile) {
    if (!out.empty()) out += ' ';
    out += std::string(name(e.emotion)) + "=" + fixed(e.score);
  }
  return out;
}

nlohmann::json floats(const Tensor& t, std::size_t row) {
  const std::size_t width = t.dim(-1);
  const auto data = t.data().subspan(row * width, width);
  return nlohmann::json(std::vector<double>(data.begin(), data.end()));
}

int cmd_train(const Options& opt) {
  RunConfig cfg = run_config(opt);
  std::vector<Example> train_set = load_dataset(opt.train_path, cfg.model.labels, !opt.no_flatten);
  std::vector<Example> val_set;
  if (!opt.val_path.empty()) {
    val_set = load_dataset(opt.val_path, cfg.model.labels, !opt.no_flatten);
  } else {
    if (opt.split_seed) assign_stratified_split(train_set, *opt.split_seed);
    const bool has_splits = std::any_of(train_set.begin(), train_set.end(),
                                        [](const Example& e) { return e.split.has_value(); });
    if (has_splits) {
      val_set = select_split(train_set, Split::kVal);
      train_set = select_split(train_set, Split::kTrain);
    }
  }
  if (!opt.quiet) {
    std::printf("train=%zu val=%zu labels=%zu d_model=%zu seed=%llu\n", train_set.size(),
                val_set.size(), cfg.model.labels.size(), cfg.model.d_model,
                static_cast<unsigned long long>(cfg.seed));
  }
  StanceModel model = StanceModel::create(cfg.model, cfg.seed);
  std::ofstream log_file;
  if (!opt.log_path.empty()) {
    log_file.open(opt.log_path, std::ios::trunc);
    if (!log_file) throw FormatError(FormatError::Code::kIo, "cannot write " + opt.log_path);
  }
  auto on_epoch = [&](const EpochLog& log) {
    nlohmann::json j = {{"epoch", log.epoch},
                        {"train_loss", log.train_loss},
                        {"train_accuracy", log.train_accuracy}};
    std::string line = "epoch " + std::to_string(log.epoch) + " train_loss=" + fixed(log.train_loss) +
                       " train_acc=" + fixed(log.train_accuracy);
    if (log.val_loss) {
      j["val_loss"] = *log.val_loss;
      j["val_accuracy"] = *log.val_accuracy;
      j["val_macro_f1"] = *log.val_macro_f1;
      line += " val_loss=" + fixed(*log.val_loss) + " val_acc=" + fixed(*log.val_accuracy) +
              " val_macro_f1=" + fixed(*log.val_macro_f1);
    }
    if (!opt.quiet) std::printf("%s\n", line.c_str());
    if (log_file) log_file << j.dump() << '\n';
  };
  const TrainResult result = train(model, train_set, val_set, cfg.train, cfg.seed, on_epoch);
  model.save(opt.model_path);
  if (!opt.quiet) {
    std::printf("best_epoch=%zu%s saved %s\n", result.best_epoch,
                result.stopped_early ? " (early stop)" : "", opt.model_path.c_str());
  }
  return 0;
}

int cmd_evaluate(const Options& opt) {
  const StanceModel model = StanceModel::load(opt.model_path);
  const auto examples =
      filter_split(load_dataset(opt.data_path, model.labels().names, !opt.no_flatten), opt.split);
  const Evaluation ev = evaluate(model, examples);
  const nlohmann::json report = to_json(ev.report, model.labels().names);
  if (!opt.report_path.empty()) {
    std::ofstream out(opt.report_path, std::ios::trunc);
    if (!out) throw FormatError(FormatError::Code::kIo, "cannot write " + opt.report_path);
    out << report.dump(2) << '\n';
  }
  if (!opt.quiet) {
    std::printf("n=%zu accuracy=%s macro_precision=%s macro_recall=%s macro_f1=%s\n", ev.report.n,
                fixed(ev.report.accuracy).c_str(), fixed(ev.report.macro.precision).c_str(),
                fixed(ev.report.macro.recall).c_str(), fixed(ev.report.macro.f1).c_str());
    std::printf("confusion %s\n", report["confusion"].dump().c_str());
  }
  return 0;
}

int cmd_predict(const Options& opt) {
  const StanceModel model = StanceModel::load(opt.model_path);
  Example ex;
  ex.id = opt.record_id.empty() ? "input" : opt.record_id;
  ex.source_text = normalize_text(opt.source);
  ex.reply_text = normalize_text(opt.reply);
  if (ex.source_text.empty() || ex.reply_text.empty()) {
    throw DataError("source and reply must be non-empty after normalization");
  }
  if (model.config().provider == ProviderKind::kFile && opt.record_id.empty()) {
    throw ConfigError("a file-embedding model needs --id to look up precomputed features");
  }
  const ForwardResult fr = model.forward({ex});
  const auto probs = fr.probabilities.data();
  const auto& names = model.labels().names;
  std::printf("label: %s\n", names[argmax(probs)].c_str());
  std::string line;
  for (std::size_t l = 0; l < names.size(); ++l) {
    if (l) line += ' ';
    line += names[l] + "=" + fixed(probs[l], 6);
  }
  std::printf("probabilities: %s\n", line.c_str());
  std::printf("source_emotions: %s\n", describe(fr.source_emotions[0]).c_str());
  std::printf("reply_emotions: %s\n", describe(fr.reply_emotions[0]).c_str());
  return 0;
}

int cmd_dump(const Options& opt) {
  const StanceModel model = StanceModel::load(opt.model_path);
  const auto examples =
      filter_split(load_dataset(opt.data_path, model.labels().names, !opt.no_flatten), opt.split);
  if (examples.empty()) throw DataError("dataset " + opt.data_path + " has no usable examples");
  std::ofstream out(opt.out_path, std::ios::trunc);
  if (!out) throw FormatError(FormatError::Code::kIo, "cannot write " + opt.out_path);
  constexpr std::size_t kBatch = 32;
  for (std::size_t start = 0; start < examples.size(); start += kBatch) {
    const std::size_t end = std::min(examples.size(), start + kBatch);
    const std::vector<Example> batch(examples.begin() + start, examples.begin() + end);
    const ForwardResult fr = model.forward(batch);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      nlohmann::json j = {{"id", batch[i].id},
                          {"label", batch[i].label},
                          {"v_s", floats(fr.v_source, i)},
                          {"v_r", floats(fr.v_reply, i)},
                          {"delta_e", floats(fr.emotion_gap, i)},
                          {"closeness", floats(fr.closeness, i)},
                          {"f_fsd", floats(fr.f_fsd, i)}};
      out << j.dump() << '\n';
    }
  }
  if (!opt.quiet) std::printf("wrote %zu records to %s\n", examples.size(), opt.out_path.c_str());
  return 0;
}

// Rows of comma-separated numbers. A leading non-numeric field is taken as a
// row name, and rows without any number (headers) are skipped.
ScoreMatrix read_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  ScoreMatrix rows;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    for (std::size_t col = 0; std::getline(fields, field, ','); ++col) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      const bool numeric = used > 0 && field.find_first_not_of(" \t\r", used) == std::string::npos;
      if (numeric) {
        row.push_back(v);
      } else if (col > 0 && !row.empty()) {
        throw DataError(path + ":" + std::to_string(lineno) + ": non-numeric score '" + field + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_friedman(const Options& opt) {
  const ScoreMatrix scores = read_scores(opt.scores_path);
  const auto orientation = opt.columns_are_blocks ? FriedmanOrientation::kColumnsAreBlocks
                                                  : FriedmanOrientation::kRowsAreBlocks;
  const FriedmanResult r = friedman(scores, orientation);
  const std::size_t rows = scores.size(), cols = scores.empty() ? 0 : scores.front().size();
  std::printf("blocks=%zu treatments=%zu statistic=%.6f p_value=%.6g\n",
              opt.columns_are_blocks ? cols : rows, opt.columns_are_blocks ? rows : cols, r.statistic,
              r.p_value);
  return 0;
}

int report_error(std::string_view kind, const std::string& message, int code) {
  std::fprintf(stderr, "%.*s: %s\n", static_cast<int>(kind.size()), kind.data(), message.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stance detection: train, evaluate and inspect models"};
  app.require_subcommand(1);
  Options opt;
  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--seed", opt.seed, "Root seed (overrides the config)");
    cmd->add_flag("--quiet", opt.quiet, "Suppress progress output");
  };

  auto* train_cmd = app.add_subcommand("train", "Train a model and write the best checkpoint");
  common(train_cmd);
  train_cmd->add_option("--train", opt.train_path, "Training JSONL")->required();
  auto* val_opt = train_cmd->add_option("--val", opt.val_path, "Validation JSONL");
  train_cmd->add_option("--split-seed", opt.split_seed, "Stratified 70/15/15 split of --train")
      ->excludes(val_opt);
  train_cmd->add_option("--out", opt.model_path, "Checkpoint path")->required();
  train_cmd->add_option("--log", opt.log_path, "Per-epoch JSONL log");
  train_cmd->add_flag("--no-flatten", opt.no_flatten, "Pair thread replies with the root only");

  auto* eval_cmd = app.add_subcommand("evaluate", "Score a checkpoint on a dataset");
  common(eval_cmd);
  eval_cmd->add_option("--model", opt.model_path)->required();
  eval_cmd->add_option("--data", opt.data_path)->required();
  eval_cmd->add_option("--report", opt.report_path, "Write the JSON report here");
  eval_cmd->add_option("--split", opt.split, "Only records with this split field");
  eval_cmd->add_flag("--no-flatten", opt.no_flatten);

  auto* predict_cmd = app.add_subcommand("predict", "Classify one source/reply pair");
  common(predict_cmd);
  predict_cmd->add_option("--model", opt.model_path)->required();
  predict_cmd->add_option("--source", opt.source)->required();
  predict_cmd->add_option("--reply", opt.reply)->required();
  predict_cmd->add_option("--id", opt.record_id, "Record id in the embedding file");

  auto* dump_cmd = app.add_subcommand("dump-intermediates", "Write per-example feature vectors");
  common(dump_cmd);
  dump_cmd->add_option("--model", opt.model_path)->required();
  dump_cmd->add_option("--data", opt.data_path)->required();
  dump_cmd->add_option("--out", opt.out_path)->required();
  dump_cmd->add_option("--split", opt.split);
  dump_cmd->add_flag("--no-flatten", opt.no_flatten);

  auto* friedman_cmd = app.add_subcommand("friedman", "Friedman test over a score table");
  friedman_cmd->add_option("--scores", opt.scores_path, "CSV, one row per method")
      ->required()
      ->check(CLI::ExistingFile);
  friedman_cmd->add_flag("--columns-are-blocks", opt.columns_are_blocks,
                         "Rank methods within each column instead of columns within each row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage_error", e.what(), kExitUsage);
  }

  try {
    if (*train_cmd) return cmd_train(opt);
    if (*eval_cmd) return cmd_evaluate(opt);
    if (*predict_cmd) return cmd_predict(opt);
    if (*friedman_cmd) return cmd_friedman(opt);
    return cmd_dump(opt);
  } catch (const ConfigError& e) {
    return report_error(e.kind(), e.what(), kExitUsage);
  } catch (const NumericError& e) {
    return report_error(e.kind(), e.what(), kExitNumeric);
  } catch (const Error& e) {
    return report_error(e.kind(), e.what(), kExitData);
  } catch (const std::exception& e) {
    return report_error("internal_error", e.what(), 1);
  }
}
