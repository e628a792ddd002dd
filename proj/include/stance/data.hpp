#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stance {

enum class Split { kTrain, kVal, kTest };

std::optional<Split> parse_split(std::string_view name);
std::string_view name(Split split);

struct Example {
  std::string id;
  std::string source_text;
  std::string reply_text;
  std::string label;
  std::optional<Split> split;

  bool operator==(const Example&) const = default;
};

// URLs become "$URL$", @-mentions "$MENTION$"; emoji and other non-textual
// symbols are dropped and whitespace collapsed. Idempotent.
std::string normalize_text(std::string_view raw);

struct ThreadNode {
  std::string id;
  std::string text;
  std::optional<std::string> parent_id;
  std::optional<std::string> label;
  std::vector<ThreadNode> children;
};

struct ThreadPair {
  std::string source;
  std::string reply;
  std::string node_id;
  std::optional<std::string> label;
};

// One pair per non-root node: the root text against the chain of reply
// texts from the root's child down to that node, joined by single spaces.
// Pre-order, children in stored order.
std::vector<ThreadPair> flatten_threads(const ThreadNode& root);

// Assembles flat nodes into trees. Throws DataError on unresolved parents
// and cycles.
std::vector<ThreadNode> build_threads(std::vector<ThreadNode> nodes);

// Reads a JSON Lines dataset in flat or thread form (detected per record by
// the presence of "reply_text"), normalizes both texts and drops records
// with missing fields, "[deleted]" replies, texts that normalize to empty,
// and repeated (source, reply) pairs. Thread nodes are paired with their
// root; with `flatten` the reply chain from the root is concatenated.
std::vector<Example> load_dataset(const std::filesystem::path& path,
                                  const std::vector<std::string>& labels, bool flatten = true);

// Stratified 70/15/15 assignment of splits, deterministic in `seed`.
void assign_stratified_split(std::vector<Example>& examples, std::uint64_t seed);

std::vector<Example> select_split(const std::vector<Example>& examples, Split split);

}  // namespace stance
