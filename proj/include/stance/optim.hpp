#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stance/tensor.hpp"

namespace stance {

struct AdamWConfig {
  double learning_rate = 2e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

// Moments for one parameter.
struct MomentState {
  std::vector<double> first;
  std::vector<double> second;
};

// One decoupled-weight-decay Adam update of `param` in place. `step` is the
// 1-based index of this update (used for bias correction).
void adamw_update(std::span<double> param, std::span<const double> grad, MomentState& moments,
                  std::uint64_t step, const AdamWConfig& config);

class AdamW {
 public:
  AdamW(std::vector<Tensor> params, AdamWConfig config);

  // Applies one update using each parameter's accumulated grad buffer; a
  // parameter with no gradient is treated as having a zero gradient.
  void step();
  void zero_grad();

  std::uint64_t step_count() const { return step_; }
  const AdamWConfig& config() const { return config_; }
  const MomentState& moments(std::size_t i) const { return moments_.at(i); }

 private:
  std::vector<Tensor> params_;
  std::vector<MomentState> moments_;
  AdamWConfig config_;
  std::uint64_t step_ = 0;
};

}  // namespace stance
