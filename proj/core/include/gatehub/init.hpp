#pragma once

#include <cmath>
#include <random>

#include "gatehub/tensor.hpp"

namespace gatehub {

using Rng = std::mt19937_64;

inline constexpr double kInitStd = 0.02;

// Normal(0, std) resampled until within two standard deviations.
inline Tensor truncated_normal(Shape shape, Rng& rng, double std = kInitStd, bool requires_grad = true) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values(shape.numel());
  for (double& v : values) {
    double z = normal(rng);
    while (std::abs(z) > 2.0) z = normal(rng);
    v = z * std;
  }
  return Tensor(shape, std::move(values), requires_grad);
}

inline Tensor random_normal(Shape shape, Rng& rng, double std = 1.0, bool requires_grad = false) {
  std::normal_distribution<double> normal(0.0, std);
  std::vector<double> values(shape.numel());
  for (double& v : values) v = normal(rng);
  return Tensor(shape, std::move(values), requires_grad);
}

inline Tensor random_uniform(Shape shape, Rng& rng, double lo, double hi, bool requires_grad = false) {
  std::uniform_real_distribution<double> uniform(lo, hi);
  std::vector<double> values(shape.numel());
  for (double& v : values) v = uniform(rng);
  return Tensor(shape, std::move(values), requires_grad);
}

}  // namespace gatehub
