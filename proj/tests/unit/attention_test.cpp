#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gatehub/attention.hpp"
#include "gatehub/errors.hpp"
#include "gatehub/init.hpp"
#include "gatehub/ops.hpp"

namespace gatehub {
namespace {

double max_abs_diff(const Tensor& a, const Tensor& b) {
  EXPECT_EQ(a.shape(), b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double relative_diff(const Tensor& a, const Tensor& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    num += (a.data()[i] - b.data()[i]) * (a.data()[i] - b.data()[i]);
    den += b.data()[i] * b.data()[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

Tensor gate_logit_weights(std::size_t dim, double value) {
  // A single nonzero row so that z_h . w_g equals `value` times the first feature.
  std::vector<double> w(dim, 0.0);
  w[0] = value;
  return Tensor(Shape{dim, 1}, w);
}

AttentionConfig config_for(std::size_t dim, std::size_t heads, GateMode mode) {
  AttentionConfig c;
  c.model_dim = dim;
  c.num_heads = heads;
  c.gate_mode = mode;
  return c;
}

TEST(Gates, ZeroLogitGivesLogHalfPlusHalf) {
  const AttentionConfig c = config_for(4, 1, GateMode::kFull);
  const GateScores g = compute_gates(Tensor::zeros(Shape{3, 4}), Tensor::zeros(Shape{4, 1}), c);
  ASSERT_EQ(g.frames(), 3u);
  for (double v : g.values.data()) EXPECT_NEAR(v, -0.193147, 1e-6);
}

TEST(Gates, LimitsOfTheFullFormula) {
  const AttentionConfig c = config_for(2, 1, GateMode::kFull);
  const Tensor z = Tensor::matrix({{1.0, 0.0}});
  EXPECT_NEAR(compute_gates(z, gate_logit_weights(2, 60.0), c).values.item(), 1.0, 1e-12);
  EXPECT_EQ(compute_gates(z, gate_logit_weights(2, -1e6), c).values.item(), kGateFloor);
  const double mid = compute_gates(z, gate_logit_weights(2, -50.0), c).values.item();
  EXPECT_NEAR(mid, -50.0, 1e-9);
}

TEST(Gates, ModeFormulas) {
  const Tensor z = Tensor::matrix({{0.7, 0.0}});
  const Tensor w = gate_logit_weights(2, 1.0);
  const double s = 1.0 / (1.0 + std::exp(-0.7));
  EXPECT_NEAR(compute_gates(z, w, config_for(2, 1, GateMode::kSuppressOnly)).values.item(), std::log(s), 1e-12);
  EXPECT_NEAR(compute_gates(z, w, config_for(2, 1, GateMode::kEnhanceOnly)).values.item(), s, 1e-12);
  EXPECT_FALSE(compute_gates(z, w, config_for(2, 1, GateMode::kDisabled)).enabled());
  const GateScores per_head = compute_gates(Tensor::zeros(Shape{5, 4}), Tensor::zeros(Shape{4, 2}),
                                            config_for(4, 2, GateMode::kPerHead));
  EXPECT_EQ(per_head.columns(), 2u);
}

TEST(Gates, RangeOverRandomEvaluations) {
  Rng rng(21);
  const AttentionConfig c = config_for(8, 1, GateMode::kFull);
  const Tensor z = random_normal(Shape{10000, 8}, rng);
  const Tensor w = random_normal(Shape{8, 1}, rng);
  const GateScores g = compute_gates(z, w, c);
  const Tensor logits = matmul(z, w);
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < 10000; ++i) {
    const double v = g.values.data()[i];
    EXPECT_LT(v, 1.0);
    EXPECT_GT(std::exp(v), 0.0);
    EXPECT_LT(std::exp(v), std::exp(1.0));
    pairs.emplace_back(logits.data()[i], v);
  }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 1; i < pairs.size(); ++i) EXPECT_LE(pairs[i - 1].second, pairs[i].second);
}

TEST(Gates, SaturatedLogitsNeverExceedOne) {
  // Past a logit of about 37 the gap to 1 is below double resolution.
  const AttentionConfig c = config_for(2, 1, GateMode::kFull);
  for (double s = 20.0; s < 800.0; s *= 1.3) {
    const double v = compute_gates(Tensor::matrix({{1.0, 0.0}}), gate_logit_weights(2, s), c).values.item();
    EXPECT_LE(v, 1.0);
    if (s < 36.0) EXPECT_LT(v, 1.0);
  }
}

TEST(GatedCrossAttention, ConstantGatesMatchVanillaAttention) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const AttentionConfig c = config_for(8, 2, GateMode::kFull);
    const MultiHeadParams p = MultiHeadParams::init(8, rng);
    const Tensor q = random_normal(Shape{3, 8}, rng);
    const Tensor z = random_normal(Shape{6, 8}, rng);
    GateScores constant{Tensor::full(Shape{6, 1}, -3.0 + 0.2 * trial)};
    const Tensor gated = gated_cross_attention(q, z, constant, p, c);
    const Tensor vanilla = gated_cross_attention(q, z, GateScores{}, p, config_for(8, 2, GateMode::kDisabled));
    EXPECT_LT(relative_diff(gated, vanilla), 1e-6);
  }
}

TEST(GatedCrossAttention, BiasedTwoFrameWeights) {
  AttentionConfig c = config_for(2, 1, GateMode::kFull);
  MultiHeadParams p;
  p.w_q = Tensor::zeros(Shape{2, 2});
  p.w_k = Tensor::zeros(Shape{2, 2});
  p.w_v = Tensor::matrix({{1, 0}, {0, 1}});
  p.w_o = Tensor::matrix({{1, 0}, {0, 1}});
  const GateScores g{Tensor::matrix({{0.0}, {-std::log(3.0)}})};
  AttentionProbe probe;
  const Tensor out = gated_cross_attention(Tensor::matrix({{1, 2}, {3, 4}, {5, 6}}),
                                           Tensor::matrix({{1, 0}, {0, 1}}), g, p, c, {}, &probe);
  ASSERT_EQ(probe.weights.size(), 1u);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_NEAR(probe.weights[0].at(r, 0), 0.75, 1e-12);
    EXPECT_NEAR(probe.weights[0].at(r, 1), 0.25, 1e-12);
    EXPECT_NEAR(out.at(r, 0), 0.75, 1e-12);
  }
}

TEST(GatedCrossAttention, FlooredGateSuppressesFrame) {
  Rng rng(8);
  const AttentionConfig c = config_for(4, 1, GateMode::kFull);
  const MultiHeadParams p = MultiHeadParams::init(4, rng);
  std::vector<double> g(5, 0.0);
  g[2] = kGateFloor;
  AttentionProbe probe;
  gated_cross_attention(random_normal(Shape{2, 4}, rng), random_normal(Shape{5, 4}, rng),
                        GateScores{Tensor(Shape{5, 1}, g)}, p, c, {}, &probe);
  for (std::size_t r = 0; r < 2; ++r) EXPECT_LT(probe.weights[0].at(r, 2), 1e-40);
}

TEST(GatedCrossAttention, GateLengthMismatchIsShapeError) {
  Rng rng(1);
  const AttentionConfig c = config_for(4, 1, GateMode::kFull);
  const MultiHeadParams p = MultiHeadParams::init(4, rng);
  EXPECT_THROW(gated_cross_attention(Tensor::zeros(Shape{2, 4}), Tensor::zeros(Shape{5, 4}),
                                     GateScores{Tensor::zeros(Shape{4, 1})}, p, c),
               ShapeError);
}

TEST(GatedCrossAttention, WeightsAreRowStochastic) {
  Rng rng(13);
  const AttentionConfig c = config_for(8, 4, GateMode::kFull);
  const MultiHeadParams p = MultiHeadParams::init(8, rng);
  const Tensor z = random_normal(Shape{7, 8}, rng);
  const GateScores g = compute_gates(z, random_normal(Shape{8, 1}, rng), c);
  AttentionProbe probe;
  gated_cross_attention(random_normal(Shape{3, 8}, rng), z, g, p, c, {}, &probe);
  ASSERT_EQ(probe.weights.size(), 4u);
  for (const Tensor& w : probe.weights) {
    for (std::size_t r = 0; r < w.rows(); ++r) {
      double total = 0.0;
      for (std::size_t k = 0; k < w.cols(); ++k) {
        EXPECT_GE(w.at(r, k), 0.0);
        EXPECT_LE(w.at(r, k), 1.0);
        total += w.at(r, k);
      }
      EXPECT_NEAR(total, 1.0, 1e-6);
    }
  }
}

TEST(GatedCrossAttention, SingleHeadMatchesDirectFormula) {
  Rng rng(30);
  const std::size_t d = 4;
  const AttentionConfig c = config_for(d, 1, GateMode::kFull);
  const MultiHeadParams p = MultiHeadParams::init(d, rng);
  const Tensor q = random_normal(Shape{3, d}, rng);
  const Tensor z = random_normal(Shape{5, d}, rng);
  const GateScores g = compute_gates(z, random_normal(Shape{d, 1}, rng), c);
  const Tensor out = gated_cross_attention(q, z, g, p, c);

  const Tensor qq = matmul(q, p.w_q), kk = matmul(z, p.w_k), vv = matmul(z, p.w_v);
  std::vector<double> expected(3 * d, 0.0);
  for (std::size_t r = 0; r < 3; ++r) {
    std::vector<double> logits(5);
    for (std::size_t t = 0; t < 5; ++t) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += qq.at(r, j) * kk.at(t, j);
      logits[t] = dot / std::sqrt(static_cast<double>(d)) + g.values.at(t, 0);
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double z_sum = 0.0;
    for (double& l : logits) z_sum += (l = std::exp(l - top));
    for (std::size_t j = 0; j < d; ++j) {
      double mixed = 0.0;
      for (std::size_t t = 0; t < 5; ++t) mixed += logits[t] / z_sum * vv.at(t, j);
      expected[r * d + j] = mixed;
    }
  }
  const Tensor direct = matmul(Tensor(Shape{3, d}, expected), p.w_o);
  EXPECT_LT(max_abs_diff(out, direct), 1e-12);
}

TEST(SelfAttention, CausalPerturbationOnlyAffectsLaterRows) {
  Rng rng(6);
  AttentionConfig c = config_for(8, 2, GateMode::kDisabled);
  c.causal = true;
  const TransformerBlockParams p = TransformerBlockParams::init(8, rng);
  const Tensor x = random_normal(Shape{6, 8}, rng);
  const Tensor base = self_attention(x, p, c);
  for (std::size_t j = 0; j < 6; ++j) {
    Tensor y = x.clone();
    for (std::size_t k = j; k < 6; ++k) {
      for (std::size_t col = 0; col < 8; ++col) y.mutable_data()[k * 8 + col] += 10.0 * (col + 1.0);
    }
    const Tensor out = self_attention(y, p, c);
    for (std::size_t r = 0; r < j; ++r) {
      for (std::size_t col = 0; col < 8; ++col) EXPECT_EQ(out.at(r, col), base.at(r, col));
    }
    if (j < 6) EXPECT_NE(out.at(j, 0), base.at(j, 0));
  }
}

TEST(SelfAttention, SinglePositionHasUnitWeight) {
  Rng rng(3);
  const AttentionConfig c = config_for(8, 2, GateMode::kDisabled);
  const TransformerBlockParams p = TransformerBlockParams::init(8, rng);
  AttentionProbe probe;
  self_attention(random_normal(Shape{1, 8}, rng), p, c, {}, &probe);
  for (const Tensor& w : probe.weights) EXPECT_EQ(w.item(), 1.0);
}

TEST(SelfAttention, NonCausalBlockIsPermutationEquivariant) {
  Rng rng(12);
  const AttentionConfig c = config_for(8, 2, GateMode::kDisabled);
  const TransformerBlockParams p = TransformerBlockParams::init(8, rng);
  const Tensor x = random_normal(Shape{4, 8}, rng);
  const std::size_t perm[] = {2, 0, 3, 1};
  std::vector<double> permuted(32);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t col = 0; col < 8; ++col) permuted[r * 8 + col] = x.at(perm[r], col);
  }
  const Tensor out = self_attention(x, p, c);
  const Tensor out_perm = self_attention(Tensor(Shape{4, 8}, permuted), p, c);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t col = 0; col < 8; ++col) EXPECT_NEAR(out_perm.at(r, col), out.at(perm[r], col), 1e-12);
  }
}

TEST(CrossAttentionBlock, SingleMemoryRowGetsUnitWeight) {
  Rng rng(10);
  const TransformerBlockParams p = TransformerBlockParams::init(8, rng);
  AttentionProbe probe;
  cross_attention_block(random_normal(Shape{3, 8}, rng), random_normal(Shape{1, 8}, rng), p, 2, &probe);
  for (const Tensor& w : probe.weights) {
    for (double v : w.data()) EXPECT_EQ(v, 1.0);
  }
}

TEST(CrossAttentionBlock, DegenerateParametersAddMemory) {
  const std::size_t d = 4;
  Rng rng(1);
  TransformerBlockParams p = TransformerBlockParams::init(d, rng);
  std::vector<double> eye(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) eye[i * d + i] = 1.0;
  p.attn.w_v = Tensor(Shape{d, d}, eye);
  p.attn.w_o = Tensor(Shape{d, d}, eye);
  p.ffn.w1 = Tensor::zeros(p.ffn.w1.shape());
  p.ffn.w2 = Tensor::zeros(p.ffn.w2.shape());
  const Tensor x = random_normal(Shape{3, d}, rng);
  const Tensor memory = Tensor::matrix({{0.5, -1.0, 2.0, 0.0}});
  const Tensor out = cross_attention_block(x, memory, p, 1);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(out.at(r, j), x.at(r, j) + memory.at(0, j), 1e-12);
  }
}

TEST(AttentionConfig, HeadsMustDivideWidth) {
  EXPECT_THROW(config_for(6, 4, GateMode::kFull).validate(), ConfigError);
  EXPECT_NO_THROW(config_for(8, 4, GateMode::kFull).validate());
  EXPECT_EQ(parse_gate_mode(to_string(GateMode::kNoPositionGuidance)), GateMode::kNoPositionGuidance);
}

}  // namespace
}  // namespace gatehub
