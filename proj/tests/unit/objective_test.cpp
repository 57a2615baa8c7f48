#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gatehub/errors.hpp"
#include "gatehub/gradcheck.hpp"
#include "gatehub/init.hpp"
#include "gatehub/objective.hpp"
#include "gatehub/ops.hpp"

namespace gatehub {
namespace {

LossConfig custom(double ga, double gb) {
  LossConfig c;
  c.gamma_action = ga;
  c.gamma_background = gb;
  return c;
}

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::gamma_distribution<double> g(1.0, 1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (double& v : p) total += (v = g(rng) + 1e-12);
  for (double& v : p) v /= total;
  return p;
}

TEST(LossConfig, PresetsAndValidation) {
  EXPECT_EQ(LossConfig{}, LossConfig::training_default());
  EXPECT_DOUBLE_EQ(LossConfig::ablation_best().gamma_action, 0.05);
  EXPECT_DOUBLE_EQ(LossConfig::ablation_best().gamma_background, 0.025);
  EXPECT_EQ(LossConfig::cross_entropy().effective_gamma_action(), 0.0);
  EXPECT_EQ(LossConfig::standard_focal(2.0).effective_gamma_background(), 2.0);
  EXPECT_THROW(custom(-0.1, 0.2).validate(), ConfigError);
  EXPECT_EQ(parse_loss_mode(to_string(LossMode::kStandardFocal)), LossMode::kStandardFocal);
}

TEST(LossFrame, HandComputedValues) {
  const std::vector<double> half = {0.5, 0.5};
  EXPECT_NEAR(loss_frame({half, 0}, custom(0.6, 0.2)), 0.60341, 1e-5);
  EXPECT_NEAR(loss_frame({half, 1}, custom(0.0, 0.0)), std::log(2.0), 1e-12);
  EXPECT_NEAR(loss_frame({half, 0}, LossConfig::cross_entropy()), 0.693147, 1e-6);
  const std::vector<double> sure = {1.0, 0.0};
  EXPECT_NEAR(loss_frame({sure, 0}, LossConfig{}), 0.0, 1e-8);
  EXPECT_TRUE(std::isfinite(loss_frame({sure, 1}, LossConfig{})));
}

TEST(LossFrame, ContractErrors) {
  const std::vector<double> bad_sum = {0.5, 0.6};
  const std::vector<double> negative = {1.2, -0.2};
  const std::vector<double> ok = {0.5, 0.5};
  EXPECT_THROW(loss_frame({bad_sum, 0}, LossConfig{}), ContractError);
  EXPECT_THROW(loss_frame({negative, 0}, LossConfig{}), ContractError);
  EXPECT_THROW(loss_frame({ok, 2}, LossConfig{}), ContractError);
  EXPECT_THROW(loss_batch({}, LossConfig{}), ContractError);
}

TEST(LossFrame, ReductionIdentitiesOnRandomBatches) {
  Rng rng(42);
  std::uniform_real_distribution<double> gamma(0.0, 3.0);
  for (int batch = 0; batch < 1000; ++batch) {
    std::vector<std::vector<double>> storage;
    std::vector<LabeledPrediction> preds;
    for (int i = 0; i < 8; ++i) storage.push_back(random_simplex(rng, 5));
    for (int i = 0; i < 8; ++i) preds.push_back({storage[i], static_cast<std::size_t>((batch + i) % 5)});
    const double ce = loss_batch(preds, LossConfig::cross_entropy());
    EXPECT_NEAR(loss_batch(preds, custom(0.0, 0.0)), ce, 1e-8);
    const double g = gamma(rng);
    EXPECT_NEAR(loss_batch(preds, custom(g, g)), loss_batch(preds, LossConfig::standard_focal(g)), 1e-8);
  }
}

TEST(LossFrame, MonotoneAndBelowCrossEntropy) {
  const LossConfig bs = LossConfig::training_default();
  double previous = INFINITY;
  for (int i = 1; i < 100; ++i) {
    const double p = i / 100.0;
    const std::vector<double> probs = {1.0 - p, p};
    const double l = loss_frame({probs, 1}, bs);
    EXPECT_LT(l, previous);
    EXPECT_LT(l, -std::log(p));
    previous = l;
    // With gamma_a > gamma_b the action frame is never penalized more.
    const std::vector<double> mirrored = {p, 1.0 - p};
    EXPECT_LT(l, loss_frame({mirrored, 0}, bs));
  }
}

TEST(LossBatch, MeanReduction) {
  const std::vector<double> a = {0.3, 0.7};
  const std::vector<double> perfect = {1.0, 0.0};
  const LossConfig c{};
  const double one = loss_frame({a, 1}, c);
  const LabeledPrediction same[] = {{a, 1}, {a, 1}, {a, 1}};
  EXPECT_NEAR(loss_batch(same, c), one, 1e-15);
  const LabeledPrediction mixed[] = {{perfect, 0}, {a, 1}};
  EXPECT_NEAR(loss_batch(mixed, c), one / 2.0, 1e-8);
}

TEST(ObjectiveLoss, MatchesScalarLossAndSkipsNegativeTargets) {
  Rng rng(3);
  std::vector<double> flat;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 4; ++i) {
    rows.push_back(random_simplex(rng, 3));
    flat.insert(flat.end(), rows.back().begin(), rows.back().end());
  }
  const std::vector<int> targets = {2, -1, 0, 1};
  const LossConfig c{};
  const LabeledPrediction kept[] = {{rows[0], 2}, {rows[2], 0}, {rows[3], 1}};
  EXPECT_NEAR(objective_loss(Tensor(Shape{4, 3}, flat), targets, c).item(), loss_batch(kept, c), 1e-12);
}

TEST(ObjectiveLoss, LogitGradientMatchesFiniteDifferences) {
  Rng rng(8);
  for (const LossConfig& c : {LossConfig::training_default(), LossConfig::cross_entropy(),
                              LossConfig::standard_focal(2.0)}) {
    Tensor logits = random_normal(Shape{6, 5}, rng, 1.5, true);
    const std::vector<int> targets = {0, 1, 2, 3, 4, 0};
    Tensor inputs[] = {logits};
    const double err = gradient_relative_error(
        [&] { return objective_loss(softmax_rows(logits), targets, c); }, inputs);
    EXPECT_LT(err, 1e-5) << to_string(c.mode);
  }
}

}  // namespace
}  // namespace gatehub
