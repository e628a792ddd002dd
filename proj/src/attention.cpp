#include "stance/attention.hpp"

#include <cmath>

#include "stance/error.hpp"
#include "stance/ops.hpp"

namespace stance {

namespace {

Tensor uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  std::vector<double> v(rows * cols);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor::from({rows, cols}, std::move(v), true);
}

void check_sequence(const Tensor& x, const char* what) {
  if (x.rank() != 3) {
    throw ShapeError(std::string(what) + ": expected C×U×d input, got " + to_string(x.shape()));
  }
}

void check_mask(SequenceMask mask, const Tensor& x, const char* what) {
  if (!mask.empty() && mask.size() != x.dim(0) * x.dim(1)) {
    throw ShapeError(std::string(what) + ": mask has " + std::to_string(mask.size()) +
                     " entries for input " + to_string(x.shape()));
  }
}

// Expands a C×U key mask to the C×U×U score layout.
std::vector<std::uint8_t> expand_key_mask(SequenceMask key_mask, std::size_t batch,
                                          std::size_t len) {
  std::vector<std::uint8_t> full(batch * len * len, 1);
  if (key_mask.empty()) return full;
  for (std::size_t c = 0; c < batch; ++c)
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = 0; j < len; ++j) full[(c * len + i) * len + j] = key_mask[c * len + j];
  return full;
}

}  // namespace

Projections Projections::init(std::size_t d_model, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_model));
  Projections p;
  p.wq = uniform_matrix(d_model, d_model, bound, rng);
  p.wk = uniform_matrix(d_model, d_model, bound, rng);
  p.wv = uniform_matrix(d_model, d_model, bound, rng);
  return p;
}

void Projections::collect(const std::string& prefix, const std::string& suffix,
                          NamedTensors& out) const {
  out.emplace_back(prefix + ".wq." + suffix, wq);
  out.emplace_back(prefix + ".wk." + suffix, wk);
  out.emplace_back(prefix + ".wv." + suffix, wv);
}

CrossMode parse_cross_mode(std::string_view mode) {
  if (mode == "key") return CrossMode::kKey;
  if (mode == "value") return CrossMode::kValue;
  throw ConfigError("cross-attention mode must be \"key\" or \"value\", got \"" +
                    std::string(mode) + "\"");
}

DualAttentionParams DualAttentionParams::init(std::size_t d_model, std::size_t num_heads, Rng& rng) {
  if (num_heads == 0 || d_model % num_heads != 0) {
    throw ConfigError("num_heads=" + std::to_string(num_heads) + " must divide d_model=" +
                      std::to_string(d_model));
  }
  DualAttentionParams p;
  p.num_heads = num_heads;
  for (int s = 0; s < 2; ++s) {
    p.cross_src[s] = Projections::init(d_model, rng);
    p.cross_rep[s] = Projections::init(d_model, rng);
    p.self_src[s] = Projections::init(d_model, rng);
    p.self_rep[s] = Projections::init(d_model, rng);
  }
  return p;
}

void DualAttentionParams::collect(NamedTensors& out) const {
  for (int s = 0; s < 2; ++s) {
    const std::string stage = "stage" + std::to_string(s + 1);
    cross_src[s].collect("attn.src", stage, out);
    cross_rep[s].collect("attn.rep", stage, out);
    self_src[s].collect("attn.self.src", stage, out);
    self_rep[s].collect("attn.self.rep", stage, out);
  }
}

HanParams HanParams::init(std::size_t d_model, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_model));
  HanParams p;
  p.weight = uniform_matrix(d_model, d_model, bound, rng);
  p.bias = Tensor::zeros({d_model}, true);
  std::vector<double> c(d_model);
  for (double& x : c) {
    do {
      x = rng.uniform(-bound, bound);
    } while (x == 0.0);
  }
  p.context = Tensor::from({d_model}, std::move(c), true);
  return p;
}

void HanParams::collect(const std::string& prefix, NamedTensors& out) const {
  out.emplace_back(prefix + ".w", weight);
  out.emplace_back(prefix + ".b", bias);
  out.emplace_back(prefix + ".context", context);
}

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            std::size_t num_heads, SequenceMask key_mask,
                            std::vector<Tensor>* weights) {
  check_sequence(q, "attention");
  if (k.shape() != q.shape() || v.shape() != q.shape()) {
    throw ShapeError("attention: Q " + to_string(q.shape()) + ", K " + to_string(k.shape()) +
                     ", V " + to_string(v.shape()) + " must share one shape");
  }
  const std::size_t batch = q.dim(0), len = q.dim(1), d = q.dim(2);
  if (num_heads == 0 || d % num_heads != 0) {
    throw ShapeError("attention: num_heads=" + std::to_string(num_heads) +
                     " does not divide d_model=" + std::to_string(d));
  }
  check_mask(key_mask, q, "attention");
  const std::size_t depth = d / num_heads;
  const double inv_sqrt_depth = 1.0 / std::sqrt(static_cast<double>(depth));
  const std::vector<std::uint8_t> score_mask = expand_key_mask(key_mask, batch, len);

  std::vector<Tensor> heads;
  heads.reserve(num_heads);
  for (std::size_t h = 0; h < num_heads; ++h) {
    const Tensor qh = slice(q, -1, h * depth, depth);
    const Tensor kh = slice(k, -1, h * depth, depth);
    const Tensor vh = slice(v, -1, h * depth, depth);
    const Tensor scores = scale(matmul(qh, transpose(kh)), inv_sqrt_depth);
    const Tensor probs = softmax(scores, -1, score_mask);
    if (weights) weights->push_back(probs);
    heads.push_back(matmul(probs, vh));
  }
  return num_heads == 1 ? heads.front() : concat(heads, -1);
}

std::pair<Tensor, Tensor> cross_attention(const Tensor& xs, const Tensor& xr, CrossMode mode,
                                          const Projections& src, const Projections& rep,
                                          std::size_t num_heads, SequenceMask mask_s,
                                          SequenceMask mask_r) {
  check_sequence(xs, "cross_attention");
  if (xs.shape() != xr.shape()) {
    throw ShapeError("cross_attention: source " + to_string(xs.shape()) + " and reply " +
                     to_string(xr.shape()) + " differ");
  }
  check_mask(mask_s, xs, "cross_attention");
  check_mask(mask_r, xr, "cross_attention");
  const Tensor qs = matmul(xs, src.wq), ks = matmul(xs, src.wk), vs = matmul(xs, src.wv);
  const Tensor qr = matmul(xr, rep.wq), kr = matmul(xr, rep.wk), vr = matmul(xr, rep.wv);
  if (mode == CrossMode::kKey) {
    return {multi_head_attention(qs, kr, vs, num_heads, mask_r),
            multi_head_attention(qr, ks, vr, num_heads, mask_s)};
  }
  return {multi_head_attention(qs, ks, vr, num_heads, mask_s),
          multi_head_attention(qr, kr, vs, num_heads, mask_r)};
}

Tensor self_attention(const Tensor& x, const Projections& params, std::size_t num_heads,
                      SequenceMask mask) {
  check_sequence(x, "self_attention");
  check_mask(mask, x, "self_attention");
  return multi_head_attention(matmul(x, params.wq), matmul(x, params.wk), matmul(x, params.wv),
                              num_heads, mask);
}

std::pair<Tensor, Tensor> dual_pipeline(const Tensor& hs, const Tensor& hr,
                                        const DualAttentionParams& params, SequenceMask mask_s,
                                        SequenceMask mask_r) {
  const std::size_t heads = params.num_heads;
  auto [cs1, cr1] = cross_attention(hs, hr, CrossMode::kKey, params.cross_src[0],
                                    params.cross_rep[0], heads, mask_s, mask_r);
  const Tensor ss1 = self_attention(cs1, params.self_src[0], heads, mask_s);
  const Tensor sr1 = self_attention(cr1, params.self_rep[0], heads, mask_r);
  auto [cs2, cr2] = cross_attention(ss1, sr1, CrossMode::kValue, params.cross_src[1],
                                    params.cross_rep[1], heads, mask_s, mask_r);
  return {self_attention(cs2, params.self_src[1], heads, mask_s),
          self_attention(cr2, params.self_rep[1], heads, mask_r)};
}

Tensor hierarchical_attention(const Tensor& s, const HanParams& params, SequenceMask mask,
                              Tensor* weights) {
  check_sequence(s, "hierarchical_attention");
  check_mask(mask, s, "hierarchical_attention");
  const std::size_t batch = s.dim(0), len = s.dim(1), d = s.dim(2);
  if (params.weight.shape() != Shape{d, d} || params.bias.shape() != Shape{d} ||
      params.context.shape() != Shape{d}) {
    throw ShapeError("hierarchical_attention: parameters do not match d_model=" +
                     std::to_string(d));
  }
  const Tensor hidden = tanh(add(matmul(s, params.weight), params.bias));
  const Tensor scores = reshape(matmul(hidden, reshape(params.context, {d, 1})), {batch, len});
  const Tensor w = softmax(scores, 1, mask);
  if (weights) *weights = w;
  return reshape(matmul(reshape(w, {batch, 1, len}), s), {batch, d});
}

}  // namespace stance
