#include "gatehub/optim.hpp"

#include <cmath>
#include <string>

#include "gatehub/errors.hpp"

namespace gatehub {

void AdamConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be nonnegative");
  if (!(clip_norm >= 0.0)) throw ConfigError("clip norm must be nonnegative");
}

OptimState::OptimState(std::span<const Tensor> params, const AdamConfig& config) : config_(config) {
  config_.validate();
  for (const Tensor& p : params) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

double global_grad_norm(std::span<const Tensor> params) {
  double sq = 0.0;
  for (const Tensor& p : params) {
    for (double g : p.grad()) sq += g * g;
  }
  return std::sqrt(sq);
}

double opt_step(std::span<Tensor> params, OptimState& state, double lr) {
  if (params.size() != state.m_.size()) throw ContractError("parameter list does not match the optimizer state");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].has_grad()) throw ContractError("parameter " + std::to_string(i) + " has no gradient");
    if (params[i].numel() != state.m_[i].size()) throw ContractError("parameter shape changed under the optimizer");
  }
  const AdamConfig& c = state.config_;
  const double norm = global_grad_norm(params);
  const double scale = (c.clip_norm > 0.0 && norm > c.clip_norm) ? c.clip_norm / norm : 1.0;

  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  const double decay = 1.0 - lr * c.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].mutable_data();
    const auto grad = params[i].grad();
    auto& m = state.m_[i];
    auto& v = state.v_[i];
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double g = grad[k] * scale;
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g;
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[k] / bias1;
      const double v_hat = v[k] / bias2;
      values[k] -= lr * m_hat / (std::sqrt(v_hat) + c.eps);
      values[k] *= decay;
    }
  }
  return norm;
}

}  // namespace gatehub
