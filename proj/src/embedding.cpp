#include "stance/embedding.hpp"

#include <cmath>

#include "stance/error.hpp"
#include "stance/ops.hpp"
#include "utf8.hpp"

namespace stance {

namespace {

bool is_word_char(char32_t cp) {
  if (cp == '$') return true;
  if (cp < 0x80) return utf8::is_text_letter(cp) || utf8::is_digit(cp) || cp == '_';
  if (utf8::is_space(cp)) return false;
  // Latin-1 and general punctuation blocks split words too.
  if (cp >= 0xA1 && cp <= 0xBF) return false;
  if (cp >= 0x2010 && cp <= 0x205E) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  return true;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

TokenSequence pack(std::vector<std::size_t> ids, std::size_t max_len) {
  TokenSequence seq;
  seq.original_length = ids.size();
  const std::size_t kept = std::min(ids.size(), max_len);
  ids.resize(max_len, kPadId);
  seq.ids = std::move(ids);
  seq.attention_mask.assign(max_len, 0);
  std::fill_n(seq.attention_mask.begin(), kept, std::uint8_t{1});
  return seq;
}

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char32_t cp : utf8::decode(text)) {
    if (is_word_char(cp)) {
      utf8::append(current, utf8::to_lower(cp));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::size_t token_id(std::string_view word) {
  return 2 + static_cast<std::size_t>(fnv1a(word) % (kVocabSize - 2));
}

TokenSequence tokenize(std::string_view text, std::size_t max_len) {
  std::vector<std::size_t> ids;
  for (const auto& w : split_words(text)) ids.push_back(token_id(w));
  return pack(std::move(ids), max_len);
}

TokenSequence tokenize_with_cls(std::string_view text, std::size_t max_len) {
  std::vector<std::size_t> ids{kClsId};
  for (const auto& w : split_words(text)) ids.push_back(token_id(w));
  return pack(std::move(ids), max_len);
}

// ---------------------------------------------------------------------------

ToyEmbedding::ToyEmbedding(std::size_t d_model, std::size_t max_len, Rng& init)
    : max_len_(max_len) {
  if (d_model == 0 || max_len == 0) throw ConfigError("toy embedding needs positive d_model and U");
  std::vector<double> values(kVocabSize * d_model);
  for (double& v : values) v = init.uniform(-1.0, 1.0);
  // PAD stays zero so padded rows are zero even if gathered.
  std::fill_n(values.begin(), d_model, 0.0);
  table_ = Tensor::from({kVocabSize, d_model}, std::move(values), true);
}

ToyEmbedding::ToyEmbedding(Tensor table, std::size_t max_len)
    : table_(std::move(table)), max_len_(max_len) {
  if (table_.rank() != 2 || table_.dim(0) != kVocabSize) {
    throw ShapeError("toy embedding table must be " + std::to_string(kVocabSize) +
                     "xd, got " + to_string(table_.shape()));
  }
}

EmbeddedText ToyEmbedding::embed(const TextRef& text) const {
  return embed(tokenize_with_cls(text.text, max_len_));
}

EmbeddedText ToyEmbedding::embed(const TokenSequence& tokens) const {
  const std::size_t len = tokens.ids.size();
  if (len != max_len_ || tokens.attention_mask.size() != len) {
    throw ShapeError("toy embedding expects sequences of length " + std::to_string(max_len_));
  }
  const std::size_t d = d_model();
  std::vector<std::size_t> rows(len, kNoRow);
  std::vector<std::size_t> context;
  for (std::size_t i = 1; i < len; ++i) {
    if (tokens.attention_mask[i]) {
      rows[i] = tokens.ids[i];
      context.push_back(tokens.ids[i]);
    }
  }
  const std::size_t lead = tokens.attention_mask[0] ? tokens.ids[0] : kNoRow;
  Tensor first = gather_rows(table_, std::span<const std::size_t>(&lead, 1));
  if (lead != kNoRow && !context.empty()) first = add(first, gather_mean(table_, {context}));

  EmbeddedText out;
  out.mask = tokens.attention_mask;
  out.sequence = len == 1 ? first : concat({first, slice(gather_rows(table_, rows), 0, 1, len - 1)}, 0);
  out.cls = reshape(first, {d});
  return out;
}

std::size_t ToyEmbedding::word_row(std::string_view word) const {
  const auto words = split_words(word);
  if (words.size() != 1) {
    throw LookupError("toy embedding: '" + std::string(word) + "' is not a single word");
  }
  return token_id(words.front());
}

std::vector<std::pair<std::string, Tensor>> ToyEmbedding::parameters() const {
  return {{kTableName, table_}};
}

// ---------------------------------------------------------------------------

FileEmbedding::FileEmbedding(std::shared_ptr<const EmbeddingStore> store)
    : store_(std::move(store)) {
  const std::size_t d = store_->d_model();
  const auto& words = store_->words();
  if (words.empty()) {
    word_table_ = Tensor::zeros({1, d});
    return;
  }
  std::vector<double> values;
  values.reserve(words.size() * d);
  for (const auto& [word, vec] : words) values.insert(values.end(), vec.begin(), vec.end());
  word_table_ = Tensor::from({words.size(), d}, std::move(values));
}

EmbeddedText FileEmbedding::embed(const TextRef& text) const {
  const StoredRecord& rec = store_->record(text.record_id);
  const std::size_t d = store_->d_model(), len = store_->max_len();
  EmbeddedText out;
  out.sequence = Tensor::from({len, d}, std::vector<double>(rec.sequence.begin(), rec.sequence.end()));
  out.cls = Tensor::from({d}, std::vector<double>(rec.cls.begin(), rec.cls.end()));
  out.mask = rec.mask;
  return out;
}

std::size_t FileEmbedding::word_row(std::string_view word) const {
  if (auto idx = store_->word_index(word)) return *idx;
  throw LookupError("embedding store has no vector for word '" + std::string(word) + "'");
}

Tensor label_embeddings(const EmbeddingProvider& provider, const std::vector<std::string>& labels) {
  if (labels.empty()) throw ConfigError("label set is empty");
  const std::size_t d = provider.d_model();
  const auto table = provider.word_table().data();
  std::vector<double> values(labels.size() * d, 0.0);
  for (std::size_t l = 0; l < labels.size(); ++l) {
    std::vector<std::size_t> rows;
    try {
      rows.push_back(provider.word_row(labels[l]));
    } catch (const LookupError&) {
      for (const auto& w : split_words(labels[l])) rows.push_back(provider.word_row(w));
    }
    if (rows.empty()) throw LookupError("label '" + labels[l] + "' has no words");
    for (std::size_t r : rows)
      for (std::size_t j = 0; j < d; ++j) values[l * d + j] += table[r * d + j];
    for (std::size_t j = 0; j < d; ++j) values[l * d + j] /= static_cast<double>(rows.size());
  }
  return Tensor::from({labels.size(), d}, std::move(values));
}

}  // namespace stance
