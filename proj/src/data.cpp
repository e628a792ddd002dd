#include "stance/data.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "stance/error.hpp"
#include "stance/random.hpp"
#include "utf8.hpp"

namespace stance {

namespace {

using nlohmann::json;

const std::regex& url_pattern() {
  static const std::regex re(R"((https?://|www\.)\S+)", std::regex::ECMAScript | std::regex::icase);
  return re;
}

const std::regex& mention_pattern() {
  static const std::regex re(R"(@\w+)");
  return re;
}

bool kept_symbol(char32_t cp) {
  switch (cp) {
    case '.': case ',': case '!': case '?': case '\'': case '"': case '#': case '$':
      return true;
    default:
      return false;
  }
}

std::string normalize_once(std::string_view raw) {
  std::string text = std::regex_replace(std::string(raw), url_pattern(), "$$URL$$");
  text = std::regex_replace(text, mention_pattern(), "$$MENTION$$");
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char32_t cp : utf8::decode(text)) {
    const bool keep = utf8::is_text_letter(cp) || utf8::is_digit(cp) || kept_symbol(cp);
    if (!keep) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    utf8::append(out, cp);
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

bool is_deleted(std::string_view text) { return trim(text) == "[deleted]"; }

// String field, accepting integers for ids. Missing/null/other -> nullopt.
std::optional<std::string> string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  return std::nullopt;
}

}  // namespace

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val" || name == "validation" || name == "dev") return Split::kVal;
  if (name == "test") return Split::kTest;
  return std::nullopt;
}

std::string_view name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

std::string normalize_text(std::string_view raw) {
  std::string current = normalize_once(raw);
  // Stripping can expose new matches (e.g. "www." once an emoji is gone).
  for (int i = 0; i < 8; ++i) {
    std::string next = normalize_once(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

std::vector<ThreadPair> flatten_threads(const ThreadNode& root) {
  std::vector<ThreadPair> pairs;
  std::unordered_set<const ThreadNode*> on_path{&root};
  std::function<void(const ThreadNode&, const std::string&)> visit =
      [&](const ThreadNode& node, const std::string& chain) {
        for (const ThreadNode& child : node.children) {
          if (!on_path.insert(&child).second) throw DataError("cycle in thread at '" + child.id + "'");
          const std::string reply = chain.empty() ? child.text : chain + " " + child.text;
          pairs.push_back({root.text, reply, child.id, child.label});
          visit(child, reply);
          on_path.erase(&child);
        }
      };
  visit(root, "");
  return pairs;
}

std::vector<ThreadNode> build_threads(std::vector<ThreadNode> nodes) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!index.emplace(nodes[i].id, i).second) {
      throw DataError("duplicate thread node id '" + nodes[i].id + "'");
    }
  }
  std::vector<std::vector<std::size_t>> children(nodes.size());
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].parent_id) {
      roots.push_back(i);
      continue;
    }
    auto it = index.find(*nodes[i].parent_id);
    if (it == index.end()) {
      throw DataError("thread node '" + nodes[i].id + "' has unknown parent '" +
                      *nodes[i].parent_id + "'");
    }
    children[it->second].push_back(i);
  }
  std::vector<char> placed(nodes.size(), 0);
  std::function<ThreadNode(std::size_t)> assemble = [&](std::size_t i) {
    placed[i] = 1;
    ThreadNode node = nodes[i];
    node.children.clear();
    for (std::size_t c : children[i]) node.children.push_back(assemble(c));
    return node;
  };
  std::vector<ThreadNode> trees;
  for (std::size_t r : roots) trees.push_back(assemble(r));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!placed[i]) throw DataError("cycle in thread through node '" + nodes[i].id + "'");
  }
  return trees;
}

std::vector<Example> load_dataset(const std::filesystem::path& path,
                                  const std::vector<std::string>& labels, bool flatten) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  const std::set<std::string> known(labels.begin(), labels.end());

  // Records in input order; thread pairs are placed at their root's line.
  struct Candidate {
    std::string id;
    std::optional<std::string> source, reply, label;
    std::optional<Split> split;
  };
  std::vector<Candidate> candidates;
  std::vector<ThreadNode> thread_nodes;
  std::map<std::string, std::size_t> thread_slot;  // root id -> candidates index

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": parse error: " + e.what());
    }
    if (!obj.is_object()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected a JSON object");
    }
    const std::string id = string_field(obj, "id").value_or("line" + std::to_string(line_no));
    std::optional<Split> split;
    if (auto s = string_field(obj, "split")) {
      split = parse_split(*s);
      if (!split) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": unknown split '" + *s +
                        "' in record '" + id + "'");
      }
    }
    if (obj.contains("reply_text")) {
      candidates.push_back({id, string_field(obj, "source_text"), string_field(obj, "reply_text"),
                            string_field(obj, "label"), split});
      continue;
    }
    ThreadNode node;
    node.id = id;
    node.text = string_field(obj, "text").value_or("");
    node.parent_id = string_field(obj, "parent_id");
    node.label = string_field(obj, "label");
    if (!node.parent_id) {
      thread_slot.emplace(id, candidates.size());
      candidates.push_back({});  // placeholder, expanded below
    }
    thread_nodes.push_back(std::move(node));
  }

  // Expand threads. Deleted nodes yield no pair and add nothing to chains.
  std::map<std::size_t, std::vector<Candidate>> expansions;
  std::unordered_set<std::string> deleted_ids;
  for (auto& node : thread_nodes) {
    if (is_deleted(node.text)) {
      deleted_ids.insert(node.id);
      node.text.clear();
    }
  }
  for (const ThreadNode& root : build_threads(std::move(thread_nodes))) {
    auto& out = expansions[thread_slot.at(root.id)];
    std::vector<ThreadPair> pairs;
    if (flatten) {
      pairs = flatten_threads(root);
    } else {
      std::function<void(const ThreadNode&)> direct = [&](const ThreadNode& n) {
        for (const auto& c : n.children) {
          pairs.push_back({root.text, c.text, c.id, c.label});
          direct(c);
        }
      };
      direct(root);
    }
    for (auto& p : pairs) {
      if (deleted_ids.contains(p.node_id)) continue;
      out.push_back({p.node_id, root.text, std::move(p.reply), p.label, std::nullopt});
    }
  }

  std::vector<Example> examples;
  std::set<std::pair<std::string, std::string>> seen;
  auto admit = [&](const Candidate& c) {
    if (!c.source || !c.reply || !c.label) return;
    if (!known.contains(*c.label)) {
      throw DataError("record '" + c.id + "' has unknown label '" + *c.label + "'");
    }
    if (is_deleted(*c.reply)) return;
    Example ex{c.id, normalize_text(*c.source), normalize_text(*c.reply), *c.label, c.split};
    if (ex.source_text.empty() || ex.reply_text.empty()) return;
    if (!seen.emplace(ex.source_text, ex.reply_text).second) return;
    examples.push_back(std::move(ex));
  };
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto it = expansions.find(i);
    if (it != expansions.end()) {
      for (const auto& c : it->second) admit(c);
    } else if (!thread_slot.empty() && !candidates[i].source && !candidates[i].reply &&
               candidates[i].id.empty()) {
      continue;  // root without replies
    } else {
      admit(candidates[i]);
    }
  }
  return examples;
}

void assign_stratified_split(std::vector<Example>& examples, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < examples.size(); ++i) by_label[examples[i].label].push_back(i);
  Rng rng(seed, streams::kSplit);
  for (auto& [label, idx] : by_label) {
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    const std::size_t n = idx.size();
    const std::size_t n_train = (n * 70 + 50) / 100;
    const std::size_t n_val = (n * 15 + 50) / 100;
    for (std::size_t k = 0; k < n; ++k) {
      Split s = k < n_train ? Split::kTrain : (k < n_train + n_val ? Split::kVal : Split::kTest);
      examples[idx[k]].split = s;
    }
  }
}

std::vector<Example> select_split(const std::vector<Example>& examples, Split split) {
  std::vector<Example> out;
  for (const auto& ex : examples)
    if (ex.split == split) out.push_back(ex);
  return out;
}

}  // namespace stance
