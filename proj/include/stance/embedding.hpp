#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stance/random.hpp"
#include "stance/tensor.hpp"

namespace stance {

// Hashed toy vocabulary.
inline constexpr std::size_t kVocabSize = std::size_t{1} << 15;
inline constexpr std::size_t kPadId = 0;
inline constexpr std::size_t kClsId = 1;

struct TokenSequence {
  std::vector<std::size_t> ids;               // exactly max_len entries
  std::vector<std::uint8_t> attention_mask;   // 1 for kept tokens, 0 for padding
  std::size_t original_length = 0;            // token count before truncation
};

// Lowercased words split on whitespace and punctuation. '$' counts as a
// word character so placeholder tokens such as "$URL$" survive intact.
std::vector<std::string> split_words(std::string_view text);

// Stable hash of a (lowercased) word into [2, kVocabSize).
std::size_t token_id(std::string_view word);

// Pads with kPadId or truncates to exactly `max_len` ids.
TokenSequence tokenize(std::string_view text, std::size_t max_len);
// As tokenize, with kClsId prepended before padding/truncation.
TokenSequence tokenize_with_cls(std::string_view text, std::size_t max_len);

// Contextual features of one text: the U×d sequence H and the d-wide CLS
// vector. Rows of `sequence` at mask==0 positions are zero.
struct EmbeddedText {
  Tensor sequence;
  Tensor cls;
  std::vector<std::uint8_t> mask;
};

// ---------------------------------------------------------------------------
// Precomputed embedding file ("SPLE" records + optional "SPLV" word vectors).

struct StoredRecord {
  std::string id;
  std::vector<float> cls;        // d
  std::vector<float> sequence;   // U*d, row-major
  std::vector<std::uint8_t> mask;  // U
};

class EmbeddingStore {
 public:
  EmbeddingStore(std::uint32_t d_model, std::uint32_t max_len);

  std::uint32_t d_model() const { return d_model_; }
  std::uint32_t max_len() const { return max_len_; }

  // Validates dims and padding; throws on a duplicate id.
  void add_record(StoredRecord record);
  void add_word(std::string word, std::vector<float> vector);

  std::size_t record_count() const { return records_.size(); }
  const std::vector<StoredRecord>& records() const { return records_; }
  // Throws LookupError for unknown ids.
  const StoredRecord& record(std::string_view id) const;
  bool has_record(std::string_view id) const;

  const std::vector<std::pair<std::string, std::vector<float>>>& words() const { return words_; }
  std::optional<std::size_t> word_index(std::string_view word) const;

 private:
  std::uint32_t d_model_;
  std::uint32_t max_len_;
  std::vector<StoredRecord> records_;
  std::unordered_map<std::string, std::size_t> record_index_;
  std::vector<std::pair<std::string, std::vector<float>>> words_;
  std::unordered_map<std::string, std::size_t> word_index_;
};

struct ExpectedDims {
  std::optional<std::uint32_t> d_model;
  std::optional<std::uint32_t> max_len;
};

// Throws FormatError with a distinct code for bad magic, version mismatch,
// truncation and conflicts with `expected`.
EmbeddingStore load_embedding_store(const std::filesystem::path& path, ExpectedDims expected = {});
void write_embedding_store(const std::filesystem::path& path, const EmbeddingStore& store);

// ---------------------------------------------------------------------------
// Providers.

// A text to embed: the file provider looks up `record_id`, the toy provider
// tokenizes `text`.
struct TextRef {
  std::string_view record_id;
  std::string_view text;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t d_model() const = 0;
  virtual std::size_t max_len() const = 0;
  virtual EmbeddedText embed(const TextRef& text) const = 0;

  // Word vectors for emotion and label words live in rows of this table.
  virtual const Tensor& word_table() const = 0;
  // Throws LookupError when the word has no vector.
  virtual std::size_t word_row(std::string_view word) const = 0;

  // Trainable tensors owned by the provider, with stable names.
  virtual std::vector<std::pair<std::string, Tensor>> parameters() const = 0;
};

// Trainable hashed embedding table. The CLS row is contextualized by adding
// the mean of the text's token rows so that texts differ in their CLS vector.
class ToyEmbedding final : public EmbeddingProvider {
 public:
  ToyEmbedding(std::size_t d_model, std::size_t max_len, Rng& init);
  // Adopts an existing kVocabSize×d table (checkpoint restore).
  ToyEmbedding(Tensor table, std::size_t max_len);

  std::size_t d_model() const override { return table_.dim(1); }
  std::size_t max_len() const override { return max_len_; }
  EmbeddedText embed(const TextRef& text) const override;
  EmbeddedText embed(const TokenSequence& tokens) const;

  const Tensor& word_table() const override { return table_; }
  std::size_t word_row(std::string_view word) const override;
  std::vector<std::pair<std::string, Tensor>> parameters() const override;

  static constexpr const char* kTableName = "embed.table";

 private:
  Tensor table_;
  std::size_t max_len_;
};

// Frozen features read from an embedding file.
class FileEmbedding final : public EmbeddingProvider {
 public:
  explicit FileEmbedding(std::shared_ptr<const EmbeddingStore> store);

  std::size_t d_model() const override { return store_->d_model(); }
  std::size_t max_len() const override { return store_->max_len(); }
  EmbeddedText embed(const TextRef& text) const override;

  const Tensor& word_table() const override { return word_table_; }
  std::size_t word_row(std::string_view word) const override;
  std::vector<std::pair<std::string, Tensor>> parameters() const override { return {}; }

 private:
  std::shared_ptr<const EmbeddingStore> store_;
  Tensor word_table_;
};

// Constant L×d matrix of label embeddings: each label's word vectors,
// mean-pooled over its words.
Tensor label_embeddings(const EmbeddingProvider& provider, const std::vector<std::string>& labels);

}  // namespace stance
