// Runs every acceptance criterion of the primary component and prints one
// [PASS]/[FAIL]/[SKIP] line per criterion. Exit status is non-zero when any
// blocking criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "stance/affect.hpp"
#include "stance/attention.hpp"
#include "stance/data.hpp"
#include "stance/embedding.hpp"
#include "stance/error.hpp"
#include "stance/evaluation.hpp"
#include "stance/fusion.hpp"
#include "stance/model.hpp"
#include "stance/ops.hpp"
#include "stance/training.hpp"
#include "synthetic.hpp"

using namespace stance;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  enum Kind { kPass, kFail, kSkip } kind = kPass;
  std::string detail;
};

Verdict pass(std::string detail) { return {Verdict::kPass, std::move(detail)}; }
Verdict fail(std::string detail) { return {Verdict::kFail, std::move(detail)}; }
Verdict verdict(bool ok, std::string detail) { return {ok ? Verdict::kPass : Verdict::kFail, std::move(detail)}; }

std::string num(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

int blocking_failures = 0;

void report(const std::string& id, const std::string& title, const std::function<Verdict()>& check,
            bool blocking = true) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const char* tag = v.kind == Verdict::kPass ? "PASS" : v.kind == Verdict::kFail ? "FAIL" : "SKIP";
  std::printf("[%s] criterion %s %s%s: %s (%.1fs)\n", tag, id.c_str(), title.c_str(),
              blocking ? "" : " (non-blocking)", v.detail.c_str(), secs);
  std::fflush(stdout);
  if (blocking && v.kind == Verdict::kFail) ++blocking_failures;
}

std::vector<std::uint8_t> random_mask(std::size_t C, std::size_t U, Rng& rng) {
  std::vector<std::uint8_t> m(C * U);
  for (std::size_t c = 0; c < C; ++c) {
    const std::size_t valid = 1 + rng.below(U);
    for (std::size_t i = 0; i < U; ++i) m[c * U + i] = i < valid;
  }
  return m;
}

oracle::Proj as_oracle(const Projections& p) {
  return {oracle::values(p.wq), oracle::values(p.wk), oracle::values(p.wv)};
}

bool all_finite(const Tensor& t) {
  for (double x : t.data())
    if (!std::isfinite(x)) return false;
  return true;
}

std::shared_ptr<const EmotionLexicon> cue_lexicon() {
  auto lex = std::make_shared<EmotionLexicon>();
  lex->add("confirmed", Emotion::kTrust);
  lex->add("confirmed", Emotion::kPositive);
  lex->add("fake", Emotion::kNegative);
  lex->add("fake", Emotion::kAnger);
  lex->add("fake", Emotion::kDisgust);
  lex->add("why", Emotion::kAnticipation);
  lex->add("why", Emotion::kSurprise);
  lex->add("interesting", Emotion::kJoy);
  lex->add("interesting", Emotion::kPositive);
  lex->add("storm", Emotion::kFear);
  lex->add("storm", Emotion::kNegative);
  lex->add("river", Emotion::kJoy);
  return lex;
}

StanceModel toy_model(const ModelConfig& config, std::uint64_t seed,
                      std::shared_ptr<const EmotionLexicon> lexicon) {
  Rng init(seed, 7);
  auto provider = std::make_shared<ToyEmbedding>(config.d_model, config.max_len, init);
  return StanceModel(config, provider, std::move(lexicon), seed);
}

// ---------------------------------------------------------------------------

Verdict gradient_integrity() {
  double op_worst = 0.0;
  std::string op_name;
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (const auto& [name, err] : gradcheck::op_errors(seed))
      if (err > op_worst) {
        op_worst = err;
        op_name = name;
      }

  double pipe_worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto config = synthetic::small_config(16, 6);
    config.top_k = 3;
    config.num_heads = 2;
    StanceModel model = toy_model(config, seed, cue_lexicon());
    const auto batch = synthetic::corpus(3, seed + 100);
    std::vector<std::size_t> labels;
    for (const auto& e : batch) labels.push_back(model.labels().index_of(e.label));
    auto loss = [&] { return classification_loss(model.forward(batch, false).probabilities, labels); };

    const NamedTensors params = model.parameters();
    for (auto [name, t] : params) t.zero_grad();
    backward(loss());
    Rng pick(seed, 11);
    for (const auto& [name, t] : params) {
      const std::vector<double> analytic(t.grad().begin(), t.grad().end());
      std::vector<std::size_t> idx;
      // The largest analytic entries plus a few random ones.
      std::vector<std::size_t> order(analytic.size());
      std::iota(order.begin(), order.end(), 0);
      const std::size_t top = std::min<std::size_t>(6, order.size());
      std::partial_sort(order.begin(), order.begin() + top, order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(analytic[a]) > std::fabs(analytic[b]);
      });
      idx.assign(order.begin(), order.begin() + top);
      for (int k = 0; k < 3; ++k) idx.push_back(pick.below(analytic.size()));
      const auto r = oracle::check_entries([&] { return loss().item(); }, t, analytic, idx);
      pipe_worst = std::max(pipe_worst, r.max_rel_error);
      checked += r.checked;
    }
  }
  const bool ok = op_worst < 1e-3 && pipe_worst < 1e-3;
  return verdict(ok, "ops max rel err " + num(op_worst) + " (" + op_name + "), pipeline max rel err " +
                         num(pipe_worst) + " over " + std::to_string(checked) + " entries, 10 seeds");
}

Verdict attention_oracles() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, 21);
    const std::size_t C = 1 + rng.below(4), U = 1 + rng.below(8);
    const std::size_t d = 4 * (1 + rng.below(4));
    const std::size_t heads = std::vector<std::size_t>{1, 2, 4}[rng.below(3)];
    const Tensor xs = gradcheck::random_tensor({C, U, d}, rng, false);
    const Tensor xr = gradcheck::random_tensor({C, U, d}, rng, false);
    const auto ps = Projections::init(d, rng), pr = Projections::init(d, rng);
    const auto ms = random_mask(C, U, rng), mr = random_mask(C, U, rng);
    for (bool key : {true, false}) {
      const auto [gs, gr] = cross_attention(xs, xr, key ? CrossMode::kKey : CrossMode::kValue, ps, pr, heads, ms, mr);
      const auto [os, orr] = oracle::cross_attention(oracle::values(xs), oracle::values(xr), key, as_oracle(ps),
                                                     as_oracle(pr), C, U, d, heads, ms, mr);
      worst = std::max({worst, oracle::max_abs_diff(gs.data(), os), oracle::max_abs_diff(gr.data(), orr)});
    }
    const Tensor sa = self_attention(xs, ps, heads, ms);
    worst = std::max(worst, oracle::max_abs_diff(sa.data(), oracle::self_attention(oracle::values(xs), as_oracle(ps),
                                                                                     C, U, d, heads, ms)));
    const auto han = HanParams::init(d, rng);
    const Tensor v = hierarchical_attention(xs, han, ms);
    worst = std::max(worst, oracle::max_abs_diff(v.data(), oracle::han(oracle::values(xs), oracle::values(han.weight),
                                                                        oracle::values(han.bias),
                                                                        oracle::values(han.context), C, U, d, ms)));
  }
  return verdict(worst < 1e-5, "max abs diff " + num(worst) + " over 20 seeds (key, value, self, hierarchical)");
}

Verdict structural_checks() {
  std::vector<std::string> problems;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed, 31);
    const std::size_t C = 3, U = 5, d = 8, heads = 2;
    const Tensor hs = gradcheck::random_tensor({C, U, d}, rng, false);
    const Tensor hr = gradcheck::random_tensor({C, U, d}, rng, false);
    const auto ms = random_mask(C, U, rng), mr = random_mask(C, U, rng);
    const auto p = DualAttentionParams::init(d, heads, rng);
    const Shape want{C, U, d};
    auto [c1s, c1r] = cross_attention(hs, hr, CrossMode::kKey, p.cross_src[0], p.cross_rep[0], heads, ms, mr);
    const Tensor s1s = self_attention(c1s, p.self_src[0], heads, ms), s1r = self_attention(c1r, p.self_rep[0], heads, mr);
    auto [c2s, c2r] = cross_attention(s1s, s1r, CrossMode::kValue, p.cross_src[1], p.cross_rep[1], heads, ms, mr);
    const auto [fs_, fr_] = dual_pipeline(hs, hr, p, ms, mr);
    for (const Tensor* t : std::initializer_list<const Tensor*>{&c1s, &c1r, &s1s, &s1r, &c2s, &c2r, &fs_, &fr_})
      if (t->shape() != want) problems.push_back("stage shape " + to_string(t->shape()));

    DualAttentionParams tied = p;
    for (int s = 0; s < 2; ++s) {
      tied.cross_rep[s] = tied.cross_src[s];
      tied.self_rep[s] = tied.self_src[s];
    }
    const auto [a_s, a_r] = dual_pipeline(hs, hr, tied, ms, mr);
    const auto [b_s, b_r] = dual_pipeline(hr, hs, tied, mr, ms);
    if (oracle::values(a_s) != oracle::values(b_r) || oracle::values(a_r) != oracle::values(b_s))
      problems.push_back("swap symmetry broken (seed " + std::to_string(seed) + ")");

    const Tensor xs = gradcheck::random_tensor({C, 1, d}, rng, false), xr = gradcheck::random_tensor({C, 1, d}, rng, false);
    const auto ps = Projections::init(d, rng), pr = Projections::init(d, rng);
    const auto [ks, kr] = cross_attention(xs, xr, CrossMode::kKey, ps, pr, heads, {}, {});
    if (oracle::values(ks) != oracle::values(matmul(xs, ps.wv)) || oracle::values(kr) != oracle::values(matmul(xr, pr.wv)))
      problems.push_back("key-mode U=1 identity broken");
    const auto [vs, vr] = cross_attention(xs, xr, CrossMode::kValue, ps, pr, heads, {}, {});
    if (oracle::values(vs) != oracle::values(matmul(xr, pr.wv)) || oracle::values(vr) != oracle::values(matmul(xs, ps.wv)))
      problems.push_back("value-mode U=1 passthrough broken");
  }
  if (!problems.empty()) return fail(problems.front() + " (" + std::to_string(problems.size()) + " problems)");
  return pass("8 stage shapes C×U×d, exact swap symmetry, exact U=1 key/value cases over 5 seeds");
}

Verdict label_fusion_oracle() {
  std::size_t cases = 0;
  for (std::size_t d : {8u, 16u})
    for (std::size_t L : {2u, 3u, 4u})
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed * 100 + d * 10 + L, 41);
        auto params = FusionParams::init(d, rng);
        for (Tensor* b : {&params.proj_b, &params.b1, &params.b2})
          for (double& x : b->mutable_data()) x = rng.uniform(-0.5, 0.5);
        std::vector<std::string> names;
        for (std::size_t l = 0; l < L; ++l) names.push_back("l" + std::to_string(l));
        const auto labels = LabelSet::from_embeddings(names, gradcheck::random_tensor({L, d}, rng, false));
        const Tensor f = gradcheck::random_tensor({4 * d}, rng, false);
        const Tensor got = label_fusion(f, labels, params);
        if (got.size() != 4 * d + L * (d / 4)) return fail("f_fsd length " + std::to_string(got.size()));
        for (std::size_t i = 0; i < 4 * d; ++i)
          if (got[i] != f[i]) return fail("prefix differs from f_cnct");
        const auto want = oracle::label_fusion(oracle::values(f), oracle::values(params.proj_w),
                                               oracle::values(params.proj_b), oracle::values(params.w1),
                                               oracle::values(params.b1), oracle::values(params.w2),
                                               oracle::values(params.b2), oracle::values(labels.embeddings), d, L);
        if (oracle::values(got) != want) {
          return fail("not bit-exact at d=" + std::to_string(d) + " L=" + std::to_string(L) + ", max diff " +
                      num(oracle::max_abs_diff(got.data(), want)));
        }
        ++cases;
      }
  return pass(std::to_string(cases) + " cases bit-exact, lengths 4d+L·d/4, prefix equals f_cnct");
}

Verdict overfit() {
  const auto data = synthetic::corpus(64, 2024);
  auto config = synthetic::small_config(32, 12);
  TrainConfig tc;
  tc.learning_rate = 0.01;
  tc.batch_size = 8;
  tc.epochs = 300;
  tc.early_stopping = false;
  std::vector<NamedTensors> finals;
  std::size_t first_hit = 0;
  double final_acc = 0.0;
  for (int run = 0; run < 2; ++run) {
    StanceModel model = StanceModel::create(config, 5);
    std::size_t hit = 0;
    train(model, data, {}, tc, 5, [&](const EpochLog& log) {
      if (hit == 0 && log.train_accuracy >= 0.95) hit = log.epoch;
    });
    finals.push_back(model.snapshot());
    first_hit = hit;
    final_acc = evaluate(model, data).report.accuracy;
  }
  bool identical = finals[0].size() == finals[1].size();
  for (std::size_t i = 0; identical && i < finals[0].size(); ++i)
    identical = oracle::values(finals[0][i].second) == oracle::values(finals[1][i].second);
  const bool ok = first_hit > 0 && final_acc >= 0.95 && identical;
  return verdict(ok, "train accuracy >= 95% first at epoch " + std::to_string(first_hit) + ", final " +
                         num(final_acc, 4) + ", two seeded runs " + (identical ? "bit-identical" : "DIFFER"));
}

Verdict metrics_oracle() {
  Rng rng(6, 61);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t L = 2 + rng.below(3), n = 1 + rng.below(60);
    std::vector<std::size_t> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.below(L);
      t[i] = rng.below(L);
    }
    const auto got = macro_metrics(confusion(p, t, L));
    const auto want = oracle::metrics(p, t, L);
    worst = std::max({worst, std::fabs(got.accuracy - want.accuracy), std::fabs(got.macro.precision - want.precision),
                      std::fabs(got.macro.recall - want.recall), std::fabs(got.macro.f1 - want.f1)});
  }
  const std::vector<std::size_t> truth{0, 0, 1, 2}, pred{0, 1, 1, 2};
  const auto r = macro_metrics(confusion(pred, truth, 3));
  const bool hand = r.matrix.rows() == std::vector<std::vector<std::size_t>>{{1, 1, 0}, {0, 1, 0}, {0, 0, 1}} &&
                    r.accuracy == 0.75 && r.per_label[0].f1 == 2.0 / 3.0 && r.per_label[1].f1 == 2.0 / 3.0 &&
                    r.per_label[2].f1 == 1.0 && std::fabs(r.macro.f1 - 7.0 / 9.0) < 1e-15;
  return verdict(worst < 1e-12 && hand, "max diff " + num(worst) + " over 1000 vectors; hand example " +
                                            (hand ? "exact" : "WRONG") + " (macro F1 " + num(r.macro.f1, 6) + ")");
}

Verdict friedman_oracle() {
  Rng rng(7, 71);
  double ds = 0.0, dp = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(15), k = 2 + rng.below(8);
    ScoreMatrix m(n, std::vector<double>(k));
    const bool ties = trial % 2 == 0;
    for (auto& row : m)
      for (double& x : row) x = ties ? static_cast<double>(rng.below(4)) : rng.uniform(0.0, 1.0);
    const auto got = friedman(m);
    const auto want = oracle::friedman(m);
    ds = std::max(ds, std::fabs(got.statistic - want.statistic));
    dp = std::max(dp, std::fabs(got.p_value - want.p));
  }
  const auto hand = friedman({{1, 2, 3}, {4, 5, 6}, {0.1, 0.2, 0.3}, {7, 8, 9}});
  const bool hand_ok = std::fabs(hand.statistic - 8.0) < 1e-12 && std::fabs(hand.p_value - std::exp(-4.0)) < 1e-12;
  return verdict(ds < 1e-9 && dp < 1e-9 && hand_ok, "max |Δstat| " + num(ds) + ", max |Δp| " + num(dp) +
                                                        " over 100 matrices; hand case statistic " +
                                                        num(hand.statistic, 6) + ", p " + num(hand.p_value, 4));
}

Verdict friedman_results_table() {
  const fs::path table = fs::path(STANCE_TEST_DATA) / "rumoureval_results.csv";
  std::ifstream in(table);
  if (!in) return fail("cannot read " + table.string());
  ScoreMatrix rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    std::vector<double> row;
    while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
    rows.push_back(row);
  }
  const auto r = friedman(rows);
  const double expected = 34.91;
  return verdict(std::fabs(r.statistic - expected) <= 1.0,
                 std::to_string(rows.size()) + " methods with reported values as blocks × 4 metrics: statistic " +
                     num(r.statistic, 5) + " (p " + num(r.p_value, 3) + ") vs published 34.91; gap " +
                     num(r.statistic - expected, 3));
}

Verdict preprocessing() {
  const std::vector<std::string> pieces{"http://", "https://", "www.", "@", "a", "Z", "9", " ", "  ", "\t", ".",
                                        "#", "$", "😀", "é", "_", "-", "/", "URL", "\xff", "\"", "?", "[deleted]",
                                        "MENTION", "!", "x.co", "\n"};
  Rng rng(8, 81);
  std::size_t idem_fail = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    const std::size_t n = rng.below(24);
    for (std::size_t k = 0; k < n; ++k) s += pieces[rng.below(pieces.size())];
    const std::string once = normalize_text(s);
    if (normalize_text(once) != once) ++idem_fail;
  }
  const std::vector<std::pair<std::string, std::string>> tokens{
      {"see http://x.co @bob", "see $URL$ $MENTION$"},
      {"https://t.co/abc123 is real", "$URL$ is real"},
      {"via www.bbc.co.uk/news today", "via $URL$ today"},
      {"@user1 @user_2: thanks", "$MENTION$ $MENTION$ thanks"},
  };
  std::size_t token_fail = 0;
  for (const auto& [in, want] : tokens) token_fail += normalize_text(in) != want;

  const auto kept = load_dataset(fs::path(STANCE_TEST_DATA) / "dropping_rules.jsonl", synthetic::kLabels);

  std::size_t tree_fail = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t next = 0, nodes = 0;
    std::function<ThreadNode(std::size_t)> grow = [&](std::size_t depth) {
      ThreadNode node{"n" + std::to_string(next++), "text", {}, {}, {}};
      ++nodes;
      if (depth < 5)
        for (std::size_t k = rng.below(4); k > 0; --k) node.children.push_back(grow(depth + 1));
      return node;
    };
    const ThreadNode root = grow(rng.below(5));
    tree_fail += flatten_threads(root).size() != nodes - 1;
  }
  const bool ok = idem_fail == 0 && token_fail == 0 && kept.size() == 6 && tree_fail == 0;
  return verdict(ok, "idempotence failures " + std::to_string(idem_fail) + "/10000, token mismatches " +
                         std::to_string(token_fail) + ", hand file 10 -> " + std::to_string(kept.size()) +
                         ", tree pair-count failures " + std::to_string(tree_fail) + "/300");
}

Verdict emotion_hand_count() {
  EmotionLexicon lex;
  lex.add("happy", Emotion::kJoy);
  lex.add("happy", Emotion::kPositive);
  lex.add("bad", Emotion::kNegative);
  const auto got = extract_emotions("happy happy bad", lex, 3);
  const EmotionProfile want{{Emotion::kPositive, 0.4}, {Emotion::kJoy, 0.4}, {Emotion::kNegative, 0.2}};
  std::string desc;
  for (const auto& e : got) desc += std::string(name(e.emotion)) + "=" + num(e.score) + " ";
  return verdict(got == want, "profile " + desc + "(expected positive=0.4 joy=0.4 negative=0.2)");
}

Verdict emotion_nrc() {
  const char* path = std::getenv("STANCE_NRC_LEXICON");
  if (path == nullptr || *path == '\0') {
    return {Verdict::kSkip, "set STANCE_NRC_LEXICON to an NRC word-level lexicon file to run this check"};
  }
  const auto lex = EmotionLexicon::load(path);
  const std::string text = normalize_text("This is crazy #capetown #capestorm #weather #forecast");
  const auto profile = extract_emotions(text, lex, 3);
  std::set<Emotion> got;
  std::string desc;
  for (const auto& e : profile) {
    got.insert(e.emotion);
    desc += std::string(name(e.emotion)) + "=" + num(e.score) + " ";
  }
  const bool ok = got == std::set<Emotion>{Emotion::kJoy, Emotion::kPositive, Emotion::kTrust};
  return verdict(ok, "top-3 " + desc + "(expected {joy, positive, trust})");
}

Verdict degenerate_inputs() {
  std::vector<std::string> problems;
  // Identical CLS vectors.
  const Tensor cls = Tensor::from({2, 3}, {0.1, -0.2, 0.3, 0.1, -0.2, 0.3});
  const Tensor closeness = feature_closeness(cls, cls);
  for (double x : closeness.data())
    if (x != 0.0) problems.push_back("closeness of identical CLS is not zero");

  auto config = synthetic::small_config(16, 6);
  StanceModel model = toy_model(config, 3, cue_lexicon());
  const std::vector<Example> same{{"a", "bridge closed today", "bridge closed today", "comment", {}}};
  const auto r = model.forward(same, false);
  for (double x : r.closeness.data())
    if (x != 0.0) problems.push_back("model closeness for identical texts is not zero");
  if (!all_finite(r.probabilities)) problems.push_back("NaN for identical texts");

  // Texts without lexicon words.
  const std::vector<Example> plain{{"b", "bridge closed today", "people say so", "comment", {}}};
  const auto p = model.forward(plain, false);
  if (!p.source_emotions[0].empty() || !p.reply_emotions[0].empty()) problems.push_back("unexpected emotions");
  for (std::size_t j = 0; j < 16; ++j)
    if (p.emotion_gap[j] != 0.0 || p.f_cnct[32 + j] != 0.0) problems.push_back("non-zero emotion slot");

  // Fully padded sequences, through the attention stack and a file-backed model.
  Rng rng(4, 91);
  const std::size_t C = 2, U = 4, d = 8;
  const Tensor hs = gradcheck::random_tensor({C, U, d}, rng), hr = gradcheck::random_tensor({C, U, d}, rng);
  const std::vector<std::uint8_t> none(C * U, 0);
  const auto params = DualAttentionParams::init(d, 2, rng);
  const auto han = HanParams::init(d, rng);
  const auto [ss, sr] = dual_pipeline(hs, hr, params, none, none);
  const Tensor v = hierarchical_attention(ss, han, none);
  backward(sum(mul(v, v)));
  if (!all_finite(ss) || !all_finite(sr) || !all_finite(v)) problems.push_back("NaN in padded attention");
  for (const auto& [n, t] : [&] { NamedTensors out; params.collect(out); return out; }())
    for (double g : t.grad())
      if (!std::isfinite(g)) problems.push_back("NaN gradient in padded attention");

  auto store = std::make_shared<EmbeddingStore>(8, 4);
  std::vector<float> seq(32, 0.0f);
  for (std::size_t i = 0; i < 16; ++i) seq[i] = 0.1f * static_cast<float>(i);
  store->add_record({"p#s", std::vector<float>(8, 0.5f), seq, {1, 1, 0, 0}});
  store->add_record({"p#r", std::vector<float>(8, 0.0f), std::vector<float>(32, 0.0f), {0, 0, 0, 0}});
  for (const auto& label : synthetic::kLabels) {
    std::vector<float> w(8);
    for (float& x : w) x = static_cast<float>(rng.uniform(-1, 1));
    store->add_word(label, w);
  }
  ModelConfig fc = synthetic::small_config(8, 4);
  fc.provider = ProviderKind::kFile;
  StanceModel file_model(fc, std::make_shared<FileEmbedding>(store), nullptr, 5);
  const std::vector<Example> padded{{"p", "source", "reply", "deny", {}}};
  const auto fr = file_model.forward(padded, false);
  for (const Tensor* t : {&fr.v_source, &fr.v_reply, &fr.closeness, &fr.f_fsd, &fr.probabilities})
    if (!all_finite(*t)) problems.push_back("NaN in padded forward");
  const std::vector<std::size_t> lbl{1};
  backward(classification_loss(fr.probabilities, lbl));
  for (const auto& [n, t] : file_model.parameters())
    for (double g : t.grad())
      if (!std::isfinite(g)) problems.push_back("NaN gradient in " + n);

  if (!problems.empty()) return fail(problems.front() + " (" + std::to_string(problems.size()) + " problems)");
  return pass("zero closeness for identical CLS, zero emotion slot without lexicon hits, finite values and "
              "gradients with fully padded sequences");
}

}  // namespace

int main() {
  report("1", "gradient integrity", gradient_integrity);
  report("2", "attention oracle equivalence", attention_oracles);
  report("3", "dual attention structure", structural_checks);
  report("4", "label fusion oracle", label_fusion_oracle);
  report("5", "overfit sanity", overfit);
  report("6", "metrics oracle", metrics_oracle);
  report("7", "Friedman correctness", friedman_oracle);
  report("7", "Friedman on the RumourEval results table", friedman_results_table, false);
  report("8", "preprocessing properties", preprocessing);
  report("9", "emotion hand count", emotion_hand_count);
  report("9", "emotion top-3 with the NRC lexicon", emotion_nrc);
  report("10", "degenerate inputs", degenerate_inputs);
  std::printf("%s: %d blocking failure(s)\n", blocking_failures == 0 ? "ACCEPTED" : "REJECTED", blocking_failures);
  return blocking_failures == 0 ? 0 : 1;
}
