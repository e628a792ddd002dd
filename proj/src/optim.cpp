#include "stance/optim.hpp"

#include <cmath>
#include <string>

#include "stance/error.hpp"

namespace stance {

namespace {

void validate(const AdamWConfig& config) {
  if (!(config.learning_rate > 0.0)) {
    throw ConfigError("AdamW learning rate must be positive, got " +
                      std::to_string(config.learning_rate));
  }
  if (config.beta1 < 0.0 || config.beta1 >= 1.0 || config.beta2 < 0.0 || config.beta2 >= 1.0) {
    throw ConfigError("AdamW betas must lie in [0, 1)");
  }
  if (config.weight_decay < 0.0 || !(config.epsilon > 0.0)) {
    throw ConfigError("AdamW weight decay must be >= 0 and epsilon > 0");
  }
}

}  // namespace

void adamw_update(std::span<double> param, std::span<const double> grad, MomentState& moments,
                  std::uint64_t step, const AdamWConfig& config) {
  validate(config);
  if (grad.size() != param.size()) {
    throw ShapeError("adamw: gradient has " + std::to_string(grad.size()) +
                     " entries for a parameter of " + std::to_string(param.size()));
  }
  if (moments.first.size() != param.size()) moments.first.assign(param.size(), 0.0);
  if (moments.second.size() != param.size()) moments.second.assign(param.size(), 0.0);

  const double t = static_cast<double>(step);
  const double bias1 = 1.0 - std::pow(config.beta1, t);
  const double bias2 = 1.0 - std::pow(config.beta2, t);
  const double decay = 1.0 - config.learning_rate * config.weight_decay;
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    double& m = moments.first[i];
    double& v = moments.second[i];
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g * g;
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    param[i] = param[i] * decay - config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

AdamW::AdamW(std::vector<Tensor> params, AdamWConfig config)
    : params_(std::move(params)), moments_(params_.size()), config_(config) {
  validate(config_);
}

void AdamW::step() {
  ++step_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    auto grad = p.grad();
    if (grad.empty()) {
      const std::vector<double> zeros(p.size(), 0.0);
      adamw_update(p.mutable_data(), zeros, moments_[i], step_, config_);
    } else {
      adamw_update(p.mutable_data(), grad, moments_[i], step_, config_);
    }
  }
}

void AdamW::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace stance
