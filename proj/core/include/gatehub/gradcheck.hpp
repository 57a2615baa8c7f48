#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gatehub/tensor.hpp"

namespace gatehub {

inline constexpr double kGradcheckStep = 1e-5;
inline constexpr double kGradcheckTolerance = 1e-4;

// Compares tape gradients of `loss_fn` against central differences with step
// `h`, for every tensor in `inputs`. The error for one tensor is
// ||analytic - numeric|| / max(||analytic||, ||numeric||, 1e-12); the max over
// tensors is returned. `loss_fn` must rebuild the graph on every call and
// return a single-element tensor.
double gradient_relative_error(const std::function<Tensor()>& loss_fn, std::span<Tensor> inputs,
                               double h = kGradcheckStep);

struct GradcheckResult {
  std::string name;
  int trials = 0;
  double max_relative_error = 0.0;
  double seconds = 0.0;
  bool passed() const { return max_relative_error < kGradcheckTolerance; }
};

// Every registered tensor op, each over `trials` randomized inputs.
std::vector<GradcheckResult> run_op_gradchecks(std::uint64_t seed, int trials = 100);

// Attention blocks, objective, and the end-to-end toy model (loss against
// every parameter tensor).
std::vector<GradcheckResult> run_model_gradchecks(std::uint64_t seed, int trials = 3);

// Both of the above.
std::vector<GradcheckResult> run_gradcheck_suite(std::uint64_t seed, int op_trials = 100, int model_trials = 3);

}  // namespace gatehub
