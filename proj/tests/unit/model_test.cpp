#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <vector>

#include "../support/values.hpp"
#include "gatehub/checkpoint.hpp"
#include "gatehub/errors.hpp"
#include "gatehub/init.hpp"
#include "gatehub/model.hpp"
#include "gatehub/objective.hpp"
#include "gatehub/ops.hpp"
#include "gatehub/tape.hpp"

namespace gatehub {
namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.history_len = 8;
  c.present_len = 3;
  c.latent_len = 4;
  c.model_dim = 8;
  c.input_dim = 5;
  c.num_classes = 3;
  c.num_layers = 1;
  c.num_heads = 2;
  return c;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gatehub_model_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(ModelConfig, ValidationAndJson) {
  ModelConfig c = small_config();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(model_config_from_json(to_json(c)), c);
  c.present_len = 9;
  EXPECT_THROW(c.validate(), ConfigError);
  c.disjoint_history_present = true;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(model_config_from_json("{\"history_len\": 8, \"bogus\": 1}"), ConfigError);
}

TEST(ModelConfig, FullScaleGeometry) {
  const ModelConfig p = ModelConfig::full_scale();
  EXPECT_EQ(p.history_len, 1024u);
  EXPECT_EQ(p.present_len, 8u);
  EXPECT_EQ(p.latent_len, 16u);
  EXPECT_EQ(p.model_dim, 1024u);
  EXPECT_EQ(p.num_layers, 2u);
  EXPECT_EQ(p.num_heads, 16u);
}

TEST(ModelParams, CountIsDeterministicAndNamesAreUnique) {
  const ModelConfig c = small_config();
  const ModelParams a = ModelParams::init(c, 1);
  const ModelParams b = ModelParams::init(c, 2);
  EXPECT_EQ(a.parameter_count(), b.parameter_count());
  std::set<std::string> names;
  std::size_t total = 0;
  for (const auto& nt : a.named()) {
    EXPECT_TRUE(names.insert(nt.name).second) << nt.name;
    EXPECT_TRUE(nt.tensor.requires_grad()) << nt.name;
    total += nt.tensor.numel();
  }
  EXPECT_EQ(total, a.parameter_count());
}

TEST(ModelParams, GateVariantsDifferOnlyInGateParameters) {
  ModelConfig c = small_config();
  const std::size_t full = ModelParams::init(c, 1).parameter_count();
  c.gate_mode = GateMode::kDisabled;
  const std::size_t disabled = ModelParams::init(c, 1).parameter_count();
  c.gate_mode = GateMode::kPerHead;
  const std::size_t per_head = ModelParams::init(c, 1).parameter_count();
  EXPECT_EQ(full - disabled, c.model_dim);
  EXPECT_EQ(per_head - disabled, c.model_dim * c.num_heads);
  for (GateMode m : {GateMode::kSuppressOnly, GateMode::kEnhanceOnly, GateMode::kNoPositionGuidance}) {
    c.gate_mode = m;
    EXPECT_EQ(ModelParams::init(c, 1).parameter_count(), full);
  }
}

TEST(ModelParams, BiasesStartAtZero) {
  const ModelParams p = ModelParams::init(small_config(), 3);
  for (double v : p.classifier_bias.data()) EXPECT_EQ(v, 0.0);
  for (double v : p.encoder_layers[0].ffn.b1.data()) EXPECT_EQ(v, 0.0);
  for (double v : p.latent_query.data()) EXPECT_LE(std::abs(v), 2.0 * kInitStd);
}

TEST(Checkpoint, RoundTripAndMismatch) {
  const ModelConfig c = small_config();
  const ModelParams p = ModelParams::init(c, 5);
  const auto dir = temp_dir("roundtrip");
  save_checkpoint(dir, p, c);
  EXPECT_EQ(checkpoint_config(dir), c);
  const ModelParams back = load_checkpoint(dir, c);
  const auto a = p.named();
  const auto b = back.named();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(testing::values(a[i].tensor), testing::values(b[i].tensor)) << a[i].name;
  }
  ModelConfig other = c;
  other.num_layers = 2;
  EXPECT_THROW(load_checkpoint(dir, other), ConfigError);
  std::filesystem::remove(dir / "classifier.bias.ghtb");
  EXPECT_THROW(load_checkpoint(dir, c), FormatError);
  std::filesystem::remove_all(dir);
}

TEST(Forward, ProbabilitiesAreRowStochasticAndDeterministic) {
  const ModelConfig c = small_config();
  const ModelParams p = ModelParams::init(c, 7);
  Rng rng(7);
  const Tensor window = random_normal(Shape{c.history_len, c.input_dim}, rng);
  const ForwardOutput a = forward(window, {}, p, c);
  const ForwardOutput b = forward(window.clone(), {}, p, c);
  ASSERT_EQ(a.probs.shape(), (Shape{c.present_len, c.num_outputs()}));
  for (std::size_t r = 0; r < c.present_len; ++r) {
    double total = 0.0;
    for (std::size_t k = 0; k < c.num_outputs(); ++k) total += a.probs.at(r, k);
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
  EXPECT_EQ(testing::values(a.probs), testing::values(b.probs));
  EXPECT_THROW(forward(Tensor::zeros(Shape{c.history_len - 1, c.input_dim}), {}, p, c), ShapeError);
}

TEST(Forward, PassOneSelfAttentionIsCausal) {
  const ModelConfig c = small_config();
  const ModelParams p = ModelParams::init(c, 9);
  Rng rng(9);
  const Tensor latent = random_normal(Shape{c.latent_len, c.model_dim}, rng);
  const Tensor present = random_normal(Shape{c.present_len, c.input_dim}, rng);
  ForwardTrace base;
  decode_present(present, {}, latent, p, c, &base);
  for (std::size_t t = 0; t + 1 < c.present_len; ++t) {
    Tensor perturbed = present.clone();
    for (std::size_t r = t + 1; r < c.present_len; ++r) {
      for (std::size_t k = 0; k < c.input_dim; ++k) perturbed.mutable_data()[r * c.input_dim + k] += 3.0 + r;
    }
    ForwardTrace trace;
    decode_present(perturbed, {}, latent, p, c, &trace);
    for (std::size_t r = 0; r <= t; ++r) {
      for (std::size_t k = 0; k < c.model_dim; ++k) {
        EXPECT_EQ(trace.pass1_self_attention.at(r, k), base.pass1_self_attention.at(r, k));
      }
    }
  }
}

TEST(EncodeHistory, PermutingFramesWithPositionRowsKeepsLatent) {
  ModelConfig c = small_config();
  c.history_len = 6;
  ModelParams p = ModelParams::init(c, 11);
  Rng rng(11);
  const Tensor features = random_normal(Shape{6, c.input_dim}, rng);
  const Tensor latent = encode_history(features, {}, p, c);

  ModelParams q = p.clone();
  Tensor swapped = features.clone();
  auto swap_rows = [](Tensor& t, std::size_t i, std::size_t j) {
    const std::size_t w = t.cols();
    for (std::size_t k = 0; k < w; ++k) std::swap(t.mutable_data()[i * w + k], t.mutable_data()[j * w + k]);
  };
  swap_rows(swapped, 1, 4);
  swap_rows(q.history_position, 1, 4);
  const Tensor latent_swapped = encode_history(swapped, {}, q, c);
  for (std::size_t i = 0; i < latent.numel(); ++i) EXPECT_NEAR(latent.data()[i], latent_swapped.data()[i], 1e-12);
}

TEST(EncodeHistory, ZeroFeaturesAndPositionsMatchVanillaAttention) {
  ModelConfig c = small_config();
  ModelParams p = ModelParams::init(c, 4);
  p.history_position = Tensor::zeros(p.history_position.shape());
  const Tensor zeros = Tensor::zeros(Shape{c.history_len, c.input_dim});
  const Tensor gated = encode_history(zeros, {}, p, c);
  ModelConfig vanilla_config = c;
  vanilla_config.gate_mode = GateMode::kDisabled;
  ModelParams vanilla = p.clone();
  vanilla.gate_weight = Tensor();
  const Tensor plain = encode_history(zeros, {}, vanilla, vanilla_config);
  for (std::size_t i = 0; i < gated.numel(); ++i) EXPECT_NEAR(gated.data()[i], plain.data()[i], 1e-12);
}

TEST(Forward, FlooredGatesStayFinite) {
  ModelConfig c = small_config();
  ModelParams p = ModelParams::init(c, 12);
  // Every z_h entry is positive, so a huge negative projection floors every gate.
  p.history_position = Tensor::zeros(p.history_position.shape());
  p.input_encoding = Tensor::full(p.input_encoding.shape(), 0.1);
  p.gate_weight = Tensor::full(p.gate_weight.shape(), -1e8);
  const Tensor window = Tensor::full(Shape{c.history_len, c.input_dim}, 1.0);
  ForwardTrace trace;
  const ForwardOutput out = forward(window, {}, p, c, &trace);
  ASSERT_TRUE(trace.gates.enabled());
  for (double g : trace.gates.values.data()) EXPECT_LE(g, -1e3);
  for (double v : out.probs.data()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Forward, PaddedStartIgnoresPaddedContent) {
  const ModelConfig c = small_config();
  const ModelParams p = ModelParams::init(c, 13);
  Rng rng(13);
  Tensor a = random_normal(Shape{c.history_len, c.input_dim}, rng);
  Tensor b = a.clone();
  std::vector<std::uint8_t> padding(c.history_len, 0);
  for (std::size_t i = 0; i < 3; ++i) {
    padding[i] = 1;
    for (std::size_t k = 0; k < c.input_dim; ++k) b.mutable_data()[i * c.input_dim + k] = 100.0;
  }
  const ForwardOutput x = forward(a, padding, p, c);
  const ForwardOutput y = forward(b, padding, p, c);
  for (std::size_t i = 0; i < x.probs.numel(); ++i) EXPECT_NEAR(x.probs.data()[i], y.probs.data()[i], 1e-12);
}

TEST(Forward, DisjointHistoryUsesFewerSlots) {
  ModelConfig c = small_config();
  c.disjoint_history_present = true;
  const ModelParams p = ModelParams::init(c, 14);
  EXPECT_EQ(p.history_position.rows(), c.history_len - c.present_len);
  Rng rng(14);
  const ForwardOutput out = forward(random_normal(Shape{c.history_len, c.input_dim}, rng), {}, p, c);
  EXPECT_EQ(out.probs.rows(), c.present_len);
}

TEST(Forward, EveryParameterReceivesGradient) {
  for (GateMode mode : {GateMode::kFull, GateMode::kPerHead, GateMode::kDisabled}) {
    ModelConfig c = small_config();
    c.gate_mode = mode;
    const ModelParams p = ModelParams::init(c, 15);
    Rng rng(15);
    std::vector<Tensor> rows;
    std::vector<int> targets;
    Tape tape;
    Tape::Scope scope(tape);
    for (int s = 0; s < 4; ++s) {
      const ForwardOutput out = forward(random_normal(Shape{c.history_len, c.input_dim}, rng), {}, p, c);
      rows.push_back(out.probs);
      for (std::size_t r = 0; r < c.present_len; ++r) targets.push_back(static_cast<int>((s + r) % c.num_outputs()));
    }
    backward(objective_loss(concat_rows(rows), targets, LossConfig::training_default()));
    for (const auto& nt : p.named()) {
      double norm = 0.0;
      for (double g : nt.tensor.grad()) norm += g * g;
      EXPECT_GT(norm, 0.0) << to_string(mode) << " " << nt.name;
    }
  }
}

}  // namespace
}  // namespace gatehub
