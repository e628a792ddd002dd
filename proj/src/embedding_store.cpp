#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "binary_io.hpp"
#include "stance/embedding.hpp"
#include "stance/error.hpp"

namespace stance {

namespace {

constexpr char kRecordMagic[4] = {'S', 'P', 'L', 'E'};
constexpr char kWordMagic[4] = {'S', 'P', 'L', 'V'};
constexpr std::uint32_t kStoreVersion = 1;

}  // namespace

EmbeddingStore::EmbeddingStore(std::uint32_t d_model, std::uint32_t max_len)
    : d_model_(d_model), max_len_(max_len) {
  if (d_model == 0 || max_len == 0) {
    throw FormatError(FormatError::Code::kDimensionConflict,
                      "embedding store needs positive d_model and U");
  }
}

void EmbeddingStore::add_record(StoredRecord record) {
  const std::size_t d = d_model_, len = max_len_;
  if (record.cls.size() != d || record.sequence.size() != len * d || record.mask.size() != len) {
    throw FormatError(FormatError::Code::kDimensionConflict,
                      "record '" + record.id + "' does not match header dims d=" +
                          std::to_string(d) + " U=" + std::to_string(len));
  }
  for (std::size_t i = 0; i < len; ++i) {
    if (record.mask[i] > 1) {
      throw DataError("record '" + record.id + "' has mask value " +
                      std::to_string(record.mask[i]) + " at position " + std::to_string(i));
    }
    if (record.mask[i] == 1) continue;
    for (std::size_t j = 0; j < d; ++j) {
      if (record.sequence[i * d + j] != 0.0f) {
        throw DataError("record '" + record.id + "' has a non-zero padded row at position " +
                        std::to_string(i));
      }
    }
  }
  if (record_index_.contains(record.id)) throw DataError("duplicate record id '" + record.id + "'");
  record_index_.emplace(record.id, records_.size());
  records_.push_back(std::move(record));
}

void EmbeddingStore::add_word(std::string word, std::vector<float> vector) {
  if (vector.size() != d_model_) {
    throw FormatError(FormatError::Code::kDimensionConflict,
                      "word vector for '" + word + "' has " + std::to_string(vector.size()) +
                          " entries, expected " + std::to_string(d_model_));
  }
  if (word_index_.contains(word)) throw DataError("duplicate word '" + word + "'");
  word_index_.emplace(word, words_.size());
  words_.emplace_back(std::move(word), std::move(vector));
}

const StoredRecord& EmbeddingStore::record(std::string_view id) const {
  auto it = record_index_.find(std::string(id));
  if (it == record_index_.end()) {
    throw LookupError("embedding store has no record '" + std::string(id) + "'");
  }
  return records_[it->second];
}

bool EmbeddingStore::has_record(std::string_view id) const {
  return record_index_.contains(std::string(id));
}

std::optional<std::size_t> EmbeddingStore::word_index(std::string_view word) const {
  auto it = word_index_.find(std::string(word));
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingStore load_embedding_store(const std::filesystem::path& path, ExpectedDims expected) {
  io::Reader in(path);
  in.expect_magic(kRecordMagic);
  const auto version = in.read<std::uint32_t>();
  if (version != kStoreVersion) {
    throw FormatError(FormatError::Code::kVersionMismatch,
                      "embedding store version " + std::to_string(version) + ", expected " +
                          std::to_string(kStoreVersion));
  }
  const auto d = in.read<std::uint32_t>();
  const auto len = in.read<std::uint32_t>();
  const auto count = in.read<std::uint64_t>();
  if (expected.d_model && *expected.d_model != d) {
    throw FormatError(FormatError::Code::kDimensionConflict,
                      "embedding file has d_model=" + std::to_string(d) +
                          " but the model is configured for d_model=" +
                          std::to_string(*expected.d_model));
  }
  if (expected.max_len && *expected.max_len != len) {
    throw FormatError(FormatError::Code::kDimensionConflict,
                      "embedding file has U=" + std::to_string(len) +
                          " but the model is configured for U=" + std::to_string(*expected.max_len));
  }
  EmbeddingStore store(d, len);
  for (std::uint64_t r = 0; r < count; ++r) {
    StoredRecord rec;
    rec.id = in.read_string();
    rec.cls = in.read_floats(d);
    rec.sequence = in.read_floats(static_cast<std::size_t>(len) * d);
    rec.mask = in.read_bytes(len);
    store.add_record(std::move(rec));
  }
  if (in.at_end()) return store;
  in.expect_magic(kWordMagic);
  const auto word_count = in.read<std::uint64_t>();
  for (std::uint64_t w = 0; w < word_count; ++w) {
    std::string word = in.read_string();
    store.add_word(std::move(word), in.read_floats(d));
  }
  if (!in.at_end()) {
    throw FormatError(FormatError::Code::kTrailingData,
                      "unexpected trailing bytes after word-vector section in " + path.string());
  }
  return store;
}

void write_embedding_store(const std::filesystem::path& path, const EmbeddingStore& store) {
  io::Writer out(path);
  out.write_magic(kRecordMagic);
  out.write<std::uint32_t>(kStoreVersion);
  out.write<std::uint32_t>(store.d_model());
  out.write<std::uint32_t>(store.max_len());
  out.write<std::uint64_t>(store.record_count());
  for (const auto& rec : store.records()) {
    out.write_string(rec.id);
    out.write_floats(rec.cls);
    out.write_floats(rec.sequence);
    out.write_bytes(rec.mask);
  }
  if (!store.words().empty()) {
    out.write_magic(kWordMagic);
    out.write<std::uint64_t>(store.words().size());
    for (const auto& [word, vec] : store.words()) {
      out.write_string(word);
      out.write_floats(vec);
    }
  }
  out.finish();
}

}  // namespace stance
