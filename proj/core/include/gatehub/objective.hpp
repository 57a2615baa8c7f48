#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "gatehub/tensor.hpp"

namespace gatehub {

enum class LossMode { kBackgroundSuppression, kCrossEntropy, kStandardFocal };

std::string_view to_string(LossMode mode);
LossMode parse_loss_mode(std::string_view name);

// Focal-style objective with separate exponents for action targets
// (gamma_action) and the background target (gamma_background). Class 0 is
// background.
struct LossConfig {
  LossMode mode = LossMode::kBackgroundSuppression;
  double gamma_action = 0.6;
  double gamma_background = 0.2;

  // gamma_a = 0.6, gamma_b = 0.2.
  static LossConfig training_default();
  // gamma_a = 0.05, gamma_b = 0.025, the best pair from the loss ablation.
  static LossConfig ablation_best();
  static LossConfig cross_entropy();
  static LossConfig standard_focal(double gamma);

  // The exponents actually applied: (0, 0) for cross-entropy, (g, g) with
  // g = gamma_action for standard focal.
  double effective_gamma_action() const;
  double effective_gamma_background() const;
  void validate() const;

  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

inline constexpr double kProbabilityClamp = 1e-7;

struct LabeledPrediction {
  std::span<const double> probs;  // C + 1 entries on the simplex
  std::size_t target = 0;         // index of the one-hot target
};

// Per-frame loss. Probabilities are clamped to [eps, 1 - eps] before the log.
// Throws ContractError when `probs` is not a probability vector (sum off by
// more than 1e-6 or a negative entry) or the target is out of range.
double loss_frame(const LabeledPrediction& pred, const LossConfig& config);

// Arithmetic mean of loss_frame; ContractError on an empty batch.
double loss_batch(std::span<const LabeledPrediction> preds, const LossConfig& config);

// Differentiable batch loss over the rows of `probs` [n, C + 1]. Rows whose
// target is negative are ignored; the mean runs over the remaining rows.
Tensor objective_loss(const Tensor& probs, std::span<const int> targets, const LossConfig& config);

}  // namespace gatehub
