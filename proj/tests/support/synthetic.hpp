#pragma once

// Small labelled corpora whose replies carry a label-specific cue word, so a
// working model can fit them quickly.

#include <string>
#include <vector>

#include "stance/data.hpp"
#include "stance/model.hpp"
#include "stance/random.hpp"

namespace synthetic {

inline const std::vector<std::string> kLabels{"support", "deny", "query", "comment"};

inline std::vector<stance::Example> corpus(std::size_t n, std::uint64_t seed,
                                           const std::vector<std::string>& labels = kLabels) {
  static const std::vector<std::string> cues{"confirmed", "fake", "why", "interesting", "agreed", "wrong"};
  static const std::vector<std::string> filler{"storm", "city", "bridge", "news", "today", "people",
                                               "road", "river", "report", "night"};
  stance::Rng rng(seed);
  std::vector<stance::Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = i % labels.size();
    std::string source = "post " + std::to_string(i);
    std::string reply = cues[l % cues.size()];
    for (int k = 0; k < 3; ++k) {
      source += " " + filler[rng.below(filler.size())];
      reply += " " + filler[rng.below(filler.size())];
    }
    out.push_back({"x" + std::to_string(i), source, reply, labels[l], {}});
  }
  return out;
}

inline stance::ModelConfig small_config(std::size_t d = 16, std::size_t U = 8) {
  stance::ModelConfig c;
  c.d_model = d;
  c.max_len = U;
  c.num_heads = 2;
  c.top_k = 3;
  c.dropout = 0.0;
  c.labels = kLabels;
  return c;
}

}  // namespace synthetic
