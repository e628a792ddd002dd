#pragma once

// Finite-difference checks over the op library, shared by the unit tests and
// the acceptance run.

#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "stance/ops.hpp"
#include "stance/random.hpp"

namespace gradcheck {

inline stance::Tensor random_tensor(stance::Shape shape, stance::Rng& rng, bool grad = true,
                                    double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(stance::numel(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return stance::Tensor::from(std::move(shape), std::move(v), grad);
}

// Checks every entry of every input against central differences.
inline double max_fd_error(const std::function<stance::Tensor()>& build,
                           const std::vector<stance::Tensor>& inputs) {
  for (auto t : inputs) t.zero_grad();
  const stance::Tensor loss = build();
  stance::backward(loss);
  double worst = 0.0;
  auto eval = [&] { return build().item(); };
  for (const auto& t : inputs) {
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    std::vector<std::size_t> all(t.size());
    std::iota(all.begin(), all.end(), 0);
    worst = std::max(worst, oracle::check_entries(eval, t, analytic, all).max_rel_error);
  }
  return worst;
}

// Weighted sum so every output entry gets a distinct upstream gradient.
inline stance::Tensor probe(const stance::Tensor& y) {
  std::vector<double> w(y.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::sin(1.0 + static_cast<double>(i));
  return stance::sum(stance::mul(y, stance::Tensor::from(y.shape(), w)));
}

// Worst relative error of each differentiable op for one seed.
inline std::vector<std::pair<std::string, double>> op_errors(std::uint64_t seed) {
  using namespace stance;
  Rng rng(seed);
  Tensor a = random_tensor({2, 3, 4}, rng), b = random_tensor({2, 3, 4}, rng);
  Tensor w = random_tensor({4, 5}, rng), bias = random_tensor({5}, rng);
  Tensor m = random_tensor({2, 4, 3}, rng);
  Tensor table = random_tensor({6, 4}, rng);
  const std::vector<std::uint8_t> mask{1, 1, 0, 1, 0, 1, 1, 1, 1, 0, 0, 0,
                                       1, 1, 1, 1, 0, 1, 1, 0, 1, 1, 1, 1};
  const std::vector<std::size_t> rows{2, kNoRow, 5};
  const std::vector<double> cw{1.0, 2.0, 0.5};
  const std::vector<std::size_t> labels{0, 2, 1, 2, 0, 1};

  const std::vector<std::pair<std::string, std::function<Tensor()>>> cases = {
      {"matmul", [&] { return probe(matmul(a, m)); }},
      {"matmul_broadcast", [&] { return probe(matmul(a, w)); }},
      {"transpose", [&] { return probe(transpose(a)); }},
      {"add", [&] { return probe(add(a, b)); }},
      {"add_bias", [&] { return probe(add(matmul(a, w), bias)); }},
      {"sub", [&] { return probe(sub(a, b)); }},
      {"mul", [&] { return probe(mul(a, b)); }},
      {"abs_diff", [&] { return probe(abs_diff(a, b)); }},
      {"scale", [&] { return probe(scale(a, -1.7)); }},
      {"tanh", [&] { return probe(tanh(a)); }},
      {"softmax", [&] { return probe(softmax(a, -1)); }},
      {"softmax_axis1", [&] { return probe(softmax(a, 1)); }},
      {"softmax_masked", [&] { return probe(softmax(a, -1, mask)); }},
      {"mean", [&] { return mean(mul(a, b)); }},
      {"mean_pool", [&] { return probe(mean_pool(a, 1)); }},
      {"l2_normalize", [&] { return probe(l2_normalize(a)); }},
      {"concat", [&] { return probe(concat({a, b}, 1)); }},
      {"slice", [&] { return probe(slice(a, -1, 1, 2)); }},
      {"reshape", [&] { return probe(reshape(a, {6, 4})); }},
      {"linear", [&] { return probe(linear(a, w, bias)); }},
      {"gather_rows", [&] { return probe(gather_rows(table, rows)); }},
      {"gather_mean", [&] { return probe(gather_mean(table, {{1, 2, 2}, {}, {5}})); }},
      {"dropout",
       [&] {
         Rng mask_rng(seed, 99);  // same mask on every evaluation
         return probe(dropout(a, 0.3, true, mask_rng));
       }},
      {"weighted_nll",
       [&] { return weighted_nll(softmax(reshape(slice(a, -1, 0, 3), {6, 3}), -1), labels, cw); }},
  };
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [name, build] : cases) out.emplace_back(name, max_fd_error(build, {a, b, w, bias, m, table}));
  return out;
}

}  // namespace gradcheck
