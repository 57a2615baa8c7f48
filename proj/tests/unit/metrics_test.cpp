#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "../support/oracles.hpp"
#include "gatehub/errors.hpp"
#include "gatehub/metrics.hpp"

namespace gatehub {
namespace {

using testing::brute_force_ap;
using testing::brute_force_cap;

std::vector<std::uint8_t> bits(std::uint32_t pattern, std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (pattern >> i) & 1u;
  return out;
}

TEST(AveragePrecision, HandExamples) {
  const std::vector<double> s = {0.9, 0.8, 0.7, 0.6};
  const std::vector<std::uint8_t> p = {1, 0, 1, 0};
  EXPECT_NEAR(average_precision(s, p), 0.833333, 1e-5);
  const std::vector<std::uint8_t> first = {1, 1, 0, 0};
  EXPECT_EQ(average_precision(s, first), 1.0);
  const std::vector<std::uint8_t> last = {0, 0, 0, 1};
  EXPECT_DOUBLE_EQ(average_precision(s, last), 0.25);
  const std::vector<std::uint8_t> none = {0, 0, 0, 0};
  EXPECT_THROW(average_precision(s, none), ContractError);
  EXPECT_THROW(average_precision(s, std::vector<std::uint8_t>{1}), ContractError);
}

TEST(AveragePrecision, TiesKeepIndexOrder) {
  const std::vector<double> s = {0.5, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(average_precision(s, std::vector<std::uint8_t>{1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(average_precision(s, std::vector<std::uint8_t>{0, 0, 1}), 1.0 / 3.0);
}

TEST(AveragePrecision, ExhaustiveSmallInputsMatchOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 3);
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::uint32_t pattern = 1; pattern < (1u << n); ++pattern) {
      const auto pos = bits(pattern, n);
      for (int rep = 0; rep < 3; ++rep) {
        std::vector<double> s(n);
        // Every third trial draws from four levels to exercise ties.
        for (double& v : s) v = rep == 2 ? coarse(rng) / 3.0 : u(rng);
        EXPECT_NEAR(average_precision(s, pos), brute_force_ap(s, pos), 1e-12);
        EXPECT_EQ(calibrated_average_precision(s, pos, 1.0), average_precision(s, pos));
        if (pattern != (1u << n) - 1) {
          EXPECT_NEAR(calibrated_average_precision(s, pos), brute_force_cap(s, pos), 1e-12);
        }
      }
    }
  }
}

TEST(AveragePrecision, LongRandomInputsMatchOracle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution coin(0.2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(1000);
    std::vector<std::uint8_t> p(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
      s[i] = u(rng);
      p[i] = coin(rng);
    }
    p[0] = 1;
    p[1] = 0;
    EXPECT_NEAR(average_precision(s, p), brute_force_ap(s, p), 1e-9);
    EXPECT_NEAR(calibrated_average_precision(s, p), brute_force_cap(s, p), 1e-9);
  }
}

TEST(CalibratedAveragePrecision, BalancedEqualsAp) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(10);
    for (double& v : s) v = u(rng);
    std::vector<std::uint8_t> p(10, 0);
    std::vector<std::size_t> idx(10);
    for (std::size_t i = 0; i < 10; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < 5; ++i) p[idx[i]] = 1;
    EXPECT_DOUBLE_EQ(calibrated_average_precision(s, p), average_precision(s, p));
  }
}

TEST(CalibratedAveragePrecision, PerfectRankingAndDuplicatedNegatives) {
  const std::vector<double> s = {0.9, 0.8, 0.1, 0.1};
  EXPECT_EQ(calibrated_average_precision(s, std::vector<std::uint8_t>{1, 1, 0, 0}), 1.0);
  const std::vector<double> dup = {0.9, 0.8, 0.8, 0.8};
  const std::vector<std::uint8_t> dup_pos = {1, 0, 0, 0};
  EXPECT_NEAR(calibrated_average_precision(dup, dup_pos), brute_force_cap(dup, dup_pos), 1e-15);
  EXPECT_THROW(calibrated_average_precision(s, std::vector<std::uint8_t>{1, 1, 1, 1}), ContractError);
}

TEST(AveragePrecision, InvariantToMonotoneTransforms) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(50), t(50);
    std::vector<std::uint8_t> p(50);
    for (std::size_t i = 0; i < 50; ++i) {
      s[i] = u(rng);
      t[i] = std::exp(3.0 * s[i]) + 7.0;
      p[i] = coin(rng);
    }
    p[0] = 1;
    p[1] = 0;
    EXPECT_DOUBLE_EQ(average_precision(s, p), average_precision(t, p));
    EXPECT_DOUBLE_EQ(calibrated_average_precision(s, p), calibrated_average_precision(t, p));
  }
}

TEST(AveragePrecision, RandomScoresApproachPositiveRate) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(10000);
  std::vector<std::uint8_t> p(10000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u(rng);
    p[i] = i % 2;
  }
  EXPECT_NEAR(average_precision(s, p), 0.5, 0.05);
}

TEST(RocAuc, BasicCases) {
  const std::vector<double> s = {0.9, 0.8, 0.2, 0.1};
  EXPECT_EQ(roc_auc(s, std::vector<std::uint8_t>{1, 1, 0, 0}), 1.0);
  EXPECT_EQ(roc_auc(s, std::vector<std::uint8_t>{0, 0, 1, 1}), 0.0);
  const std::vector<double> flat = {0.3, 0.3, 0.3, 0.3};
  EXPECT_EQ(roc_auc(flat, std::vector<std::uint8_t>{1, 0, 1, 0}), 0.5);
}

TEST(PrecisionRecall, CurveEndsAtFullRecall) {
  const std::vector<double> s = {0.9, 0.8, 0.7, 0.6};
  const auto curve = precision_recall_curve(s, std::vector<std::uint8_t>{1, 0, 1, 0});
  ASSERT_FALSE(curve.empty());
  EXPECT_DOUBLE_EQ(curve.front().precision, 1.0);
  EXPECT_DOUBLE_EQ(curve.back().recall, 1.0);
  EXPECT_DOUBLE_EQ(curve.back().precision, 0.5);
}

PredictionFrame frame(std::int64_t t, std::vector<double> probs, int label) {
  PredictionFrame f;
  f.time = t;
  f.probs = std::move(probs);
  f.label = label;
  return f;
}

TEST(Evaluate, PerfectPredictorAndMissingClass) {
  std::vector<PredictionFrame> preds = {
      frame(0, {0.8, 0.1, 0.1}, 0), frame(1, {0.1, 0.8, 0.1}, 1),
      frame(2, {0.7, 0.2, 0.1}, 0), frame(3, {0.2, 0.7, 0.1}, 1),
  };
  const Evaluation e = evaluate(preds, 2);
  EXPECT_EQ(e.report.mean_ap, 1.0);
  EXPECT_EQ(e.report.mean_cap, 1.0);
  EXPECT_TRUE(e.report.class_ap[0].has_value());
  EXPECT_FALSE(e.report.class_ap[1].has_value());
  EXPECT_EQ(e.report.warnings.size(), 1u);
  EXPECT_FALSE(e.gates.has_value());
  EXPECT_NE(metric_report_json(e).find("mAP"), std::string::npos);

  preds[0].probs = {0.5, 0.5};
  EXPECT_THROW(evaluate(preds, 2), ContractError);
}

TEST(GateDiagnostics, ConstantGatesAreUninformative) {
  GateSamples g;
  for (int i = 0; i < 40; ++i) {
    g.values.push_back(0.3);
    g.tags.push_back(i % 2 ? FrameTag::kDistractor : FrameTag::kTrigger);
  }
  g.tags.push_back(FrameTag::kPlainBackground);
  g.values.push_back(5.0);
  const GateDiagnostics d = gate_diagnostics(g);
  EXPECT_EQ(d.auc, 0.5);
  EXPECT_EQ(d.informative_count, 20u);
  EXPECT_EQ(d.distractor_count, 20u);
  g.values.assign(41, 0.0);
  for (std::size_t i = 0; i < 40; ++i) g.values[i] = g.tags[i] == FrameTag::kDistractor ? -1.0 : 1.0;
  EXPECT_EQ(gate_diagnostics(g).auc, 1.0);
}

}  // namespace
}  // namespace gatehub
