#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gatehub/attention.hpp"
#include "gatehub/tensor.hpp"

namespace gatehub {

struct ModelConfig {
  static constexpr std::size_t kDecoderPasses = 2;

  std::size_t history_len = 64;  // T, frames in the observed window
  std::size_t present_len = 4;   // t_pr, most recent frames modeled by the decoder
  std::size_t latent_len = 8;    // L
  std::size_t model_dim = 64;    // D
  std::size_t input_dim = 16;    // M, per-frame feature width
  std::size_t num_classes = 4;   // C action classes; outputs have C + 1 columns
  std::size_t num_layers = 2;    // N latent self-attention layers
  std::size_t num_heads = 4;
  GateMode gate_mode = GateMode::kFull;
  bool ghu_residual = true;
  // History covers only the T - t_pr frames before the present.
  bool disjoint_history_present = false;
  // Decoder ablations: drop the present self-attention, or cross-attend only in the first pass.
  bool present_self_attention = true;
  bool cross_attention_every_pass = true;

  // Geometry used for the published model.
  static ModelConfig full_scale();
  // Desk-scale geometry: T=64, t_pr=4, L=8, D=64, M=16, C=4, 4 heads.
  static ModelConfig toy();

  AttentionConfig attention(bool causal = false) const;
  std::size_t history_slots() const { return disjoint_history_present ? history_len - present_len : history_len; }
  std::size_t num_outputs() const { return num_classes + 1; }
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct DecoderPassParams {
  std::optional<TransformerBlockParams> self_attn;
  std::optional<TransformerBlockParams> cross_attn;
};

struct ModelParams {
  Tensor input_encoding;    // E [M, D], shared by history and present frames
  Tensor history_position;  // E_pos [history_slots, D], row j <-> offset j - slots + 1
  Tensor present_position;  // E^pr_pos [t_pr, D]
  Tensor latent_query;      // q [L, D]
  Tensor gate_weight;       // W_g [D, gate_columns]; undefined when gating is disabled
  MultiHeadParams ghu;
  std::vector<TransformerBlockParams> encoder_layers;
  LayerNormParams encoder_norm;
  std::array<DecoderPassParams, ModelConfig::kDecoderPasses> decoder;
  LayerNormParams decoder_norm;
  Tensor classifier_weight;  // [D, C + 1]
  Tensor classifier_bias;    // [C + 1]

  static ModelParams init(const ModelConfig& config, std::uint64_t seed);

  // Every parameter tensor with a stable dotted name, in a fixed order.
  std::vector<NamedTensor> named() const;
  std::vector<Tensor> tensors() const;
  std::size_t parameter_count() const;
  ModelParams clone() const;
  void zero_grad() const;
};

// Intermediate activations exposed for diagnostics and tests.
struct ForwardTrace {
  GateScores gates;
  Tensor history_encoding;  // z_h
  Tensor latent;
  Tensor pass1_self_attention;
  AttentionProbe ghu_attention;
};

struct ForwardOutput {
  Tensor logits;  // [t_pr, C + 1]
  Tensor probs;   // row-wise softmax of logits; the last row predicts the current frame
  GateScores gates;
};

// History features [history_slots, M], oldest first, to the latent encoding [L, D].
// `padding` (history_slots entries, nonzero = padded slot) removes pre-stream slots.
Tensor encode_history(const Tensor& features, std::span<const std::uint8_t> padding, const ModelParams& params,
                      const ModelConfig& config, ForwardTrace* trace = nullptr);

// Present features [t_pr, M] ending at the current frame, to logits [t_pr, C + 1].
Tensor decode_present(const Tensor& present_features, std::span<const std::uint8_t> present_padding,
                      const Tensor& latent, const ModelParams& params, const ModelConfig& config,
                      ForwardTrace* trace = nullptr);

// A full observed window [T, M] (times -T+1 .. 0) to per-present-row class probabilities.
ForwardOutput forward(const Tensor& window, std::span<const std::uint8_t> padding, const ModelParams& params,
                      const ModelConfig& config, ForwardTrace* trace = nullptr);

std::string to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);

}  // namespace gatehub
