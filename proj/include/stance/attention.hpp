#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stance/random.hpp"
#include "stance/tensor.hpp"

namespace stance {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// d×d query/key/value projections of one branch at one stage. No bias.
struct Projections {
  Tensor wq;
  Tensor wk;
  Tensor wv;

  static Projections init(std::size_t d_model, Rng& rng);
  void collect(const std::string& prefix, const std::string& suffix, NamedTensors& out) const;
};

enum class CrossMode { kKey, kValue };

CrossMode parse_cross_mode(std::string_view mode);

// Parameters of the four-stage dual cross-attention stack: one projection
// set per branch for each of the two cross stages and each of the two
// self-attention stages.
struct DualAttentionParams {
  std::size_t num_heads = 4;
  Projections cross_src[2];
  Projections cross_rep[2];
  Projections self_src[2];
  Projections self_rep[2];

  static DualAttentionParams init(std::size_t d_model, std::size_t num_heads, Rng& rng);
  void collect(NamedTensors& out) const;
};

// Word-level attention of one branch: a = tanh(S·W + b), weights from a·c.
struct HanParams {
  Tensor weight;   // d×d
  Tensor bias;     // d
  Tensor context;  // d, learned global

  static HanParams init(std::size_t d_model, Rng& rng);
  void collect(const std::string& prefix, NamedTensors& out) const;
};

// Masks are C×U, row-major, 1 for valid positions. An empty span means all
// positions are valid.
using SequenceMask = std::span<const std::uint8_t>;

// Multi-head scaled dot-product attention. Q, K, V are C×U×d (already
// projected); heads are contiguous d/num_heads slices of the last axis.
// Softmax is masked by `key_mask`. When `weights` is non-null it receives
// one C×U×U probability tensor per head.
Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            std::size_t num_heads, SequenceMask key_mask,
                            std::vector<Tensor>* weights = nullptr);

// Key mode: each branch attends with its own Q and V but the other branch's
// K. Value mode: own Q and K, the other branch's V. Returns (Ms, Mr).
std::pair<Tensor, Tensor> cross_attention(const Tensor& xs, const Tensor& xr, CrossMode mode,
                                          const Projections& src, const Projections& rep,
                                          std::size_t num_heads, SequenceMask mask_s,
                                          SequenceMask mask_r);

Tensor self_attention(const Tensor& x, const Projections& params, std::size_t num_heads,
                      SequenceMask mask);

// key-cross -> self -> value-cross -> self, branch-wise.
std::pair<Tensor, Tensor> dual_pipeline(const Tensor& hs, const Tensor& hr,
                                        const DualAttentionParams& params, SequenceMask mask_s,
                                        SequenceMask mask_r);

// Pools C×U×d into C×d. A fully masked sequence pools to zeros. When
// `weights` is non-null it receives the C×U attention weights.
Tensor hierarchical_attention(const Tensor& s, const HanParams& params, SequenceMask mask,
                              Tensor* weights = nullptr);

}  // namespace stance
