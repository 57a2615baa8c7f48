#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gatehub/tensor.hpp"

namespace gatehub {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-5;  // decoupled: p <- p * (1 - lr * weight_decay)
  double clip_norm = 0.0;      // global gradient norm cap; 0 disables clipping

  void validate() const;
  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

// Adaptive-moment state for a fixed list of parameters. Moment buffers are
// shaped like their parameters.
class OptimState {
 public:
  OptimState(std::span<const Tensor> params, const AdamConfig& config);

  const AdamConfig& config() const { return config_; }
  std::int64_t step() const { return step_; }
  std::span<const double> first_moment(std::size_t i) const { return m_.at(i); }
  std::span<const double> second_moment(std::size_t i) const { return v_.at(i); }

 private:
  friend double opt_step(std::span<Tensor> params, OptimState& state, double lr);

  AdamConfig config_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// Euclidean norm over every parameter's accumulated gradient.
double global_grad_norm(std::span<const Tensor> params);

// One bias-corrected update from the gradients accumulated on `params`,
// followed by decoupled weight decay. Returns the gradient norm measured
// before clipping. Throws ContractError when a parameter has no gradient or
// the list does not match the state.
double opt_step(std::span<Tensor> params, OptimState& state, double lr);

}  // namespace gatehub
