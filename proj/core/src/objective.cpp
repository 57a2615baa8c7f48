#include "gatehub/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gatehub/errors.hpp"
#include "gatehub/tape.hpp"

namespace gatehub {

std::string_view to_string(LossMode mode) {
  switch (mode) {
    case LossMode::kBackgroundSuppression:
      return "background_suppression";
    case LossMode::kCrossEntropy:
      return "cross_entropy";
    case LossMode::kStandardFocal:
      return "standard_focal";
  }
  return "background_suppression";
}

LossMode parse_loss_mode(std::string_view name) {
  for (LossMode m : {LossMode::kBackgroundSuppression, LossMode::kCrossEntropy, LossMode::kStandardFocal}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown loss mode '" + std::string(name) + "'");
}

LossConfig LossConfig::training_default() { return LossConfig{}; }

LossConfig LossConfig::ablation_best() { return {LossMode::kBackgroundSuppression, 0.05, 0.025}; }

LossConfig LossConfig::cross_entropy() { return {LossMode::kCrossEntropy, 0.0, 0.0}; }

LossConfig LossConfig::standard_focal(double gamma) { return {LossMode::kStandardFocal, gamma, gamma}; }

double LossConfig::effective_gamma_action() const {
  switch (mode) {
    case LossMode::kCrossEntropy:
      return 0.0;
    default:
      return gamma_action;
  }
}

double LossConfig::effective_gamma_background() const {
  switch (mode) {
    case LossMode::kCrossEntropy:
      return 0.0;
    case LossMode::kStandardFocal:
      return gamma_action;
    default:
      return gamma_background;
  }
}

void LossConfig::validate() const {
  if (!(gamma_action >= 0.0) || !(gamma_background >= 0.0)) throw ConfigError("loss exponents must be >= 0");
}

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

// -(1 - p)^gamma * log(p) and its derivative in p (zero outside the clamp band).
double focal_term(double p, double gamma) {
  const double q = clamp_prob(p);
  return -std::pow(1.0 - q, gamma) * std::log(q);
}

double focal_term_derivative(double p, double gamma) {
  if (p < kProbabilityClamp || p > 1.0 - kProbabilityClamp) return 0.0;
  const double one_minus = 1.0 - p;
  double d = -std::pow(one_minus, gamma) / p;
  if (gamma != 0.0) d += gamma * std::pow(one_minus, gamma - 1.0) * std::log(p);
  return d;
}

void check_simplex(std::span<const double> probs, std::size_t target) {
  if (probs.size() < 2) throw ContractError("prediction needs at least two classes");
  if (target >= probs.size()) throw ContractError("target index out of range");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p)) throw NumericError("probabilities are not finite");
    if (!(p >= 0.0)) throw ContractError("probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ContractError("probabilities must sum to 1, got " + std::to_string(total));
}

double gamma_for(std::size_t target, const LossConfig& config) {
  return target == 0 ? config.effective_gamma_background() : config.effective_gamma_action();
}

}  // namespace

double loss_frame(const LabeledPrediction& pred, const LossConfig& config) {
  check_simplex(pred.probs, pred.target);
  return focal_term(pred.probs[pred.target], gamma_for(pred.target, config));
}

double loss_batch(std::span<const LabeledPrediction> preds, const LossConfig& config) {
  if (preds.empty()) throw ContractError("loss_batch on an empty batch");
  double total = 0.0;
  for (const auto& p : preds) total += loss_frame(p, config);
  return total / static_cast<double>(preds.size());
}

Tensor objective_loss(const Tensor& probs, std::span<const int> targets, const LossConfig& config) {
  const std::size_t rows = probs.rows();
  const std::size_t cols = probs.cols();
  if (targets.size() != rows) throw ShapeError("objective_loss: one target per row required");
  const auto pv = probs.data();
  std::size_t counted = 0;
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] < 0) continue;
    const auto target = static_cast<std::size_t>(targets[r]);
    check_simplex(pv.subspan(r * cols, cols), target);
    total += focal_term(pv[r * cols + target], gamma_for(target, config));
    ++counted;
  }
  if (counted == 0) throw ContractError("objective_loss: no labeled rows");
  const double n = static_cast<double>(counted);
  Tensor result = Tensor::scalar(total / n);

  Tape* tape = Tape::active();
  if (tape == nullptr || !probs.requires_grad()) return result;
  result.set_requires_grad(true);
  std::vector<int> owned(targets.begin(), targets.end());
  tape->record(Tape::Entry{
      "objective_loss", {probs}, result,
      [owned = std::move(owned), cols, n, config](const Tensor& y, std::vector<Tensor>& ins) {
        const double g = y.grad()[0] / n;
        const auto pv = ins[0].data();
        auto gp = ins[0].mutable_grad();
        for (std::size_t r = 0; r < owned.size(); ++r) {
          if (owned[r] < 0) continue;
          const auto target = static_cast<std::size_t>(owned[r]);
          const std::size_t i = r * cols + target;
          gp[i] += g * focal_term_derivative(pv[i], gamma_for(target, config));
        }
      }});
  return result;
}

}  // namespace gatehub
