#include "gatehub/attention.hpp"

#include <cmath>

#include "gatehub/errors.hpp"
#include "gatehub/ops.hpp"

namespace gatehub {

std::string_view to_string(GateMode mode) {
  switch (mode) {
    case GateMode::kFull:
      return "full";
    case GateMode::kSuppressOnly:
      return "suppress_only";
    case GateMode::kEnhanceOnly:
      return "enhance_only";
    case GateMode::kNoPositionGuidance:
      return "no_position_guidance";
    case GateMode::kPerHead:
      return "per_head";
    case GateMode::kDisabled:
      return "disabled";
  }
  return "full";
}

GateMode parse_gate_mode(std::string_view name) {
  for (GateMode m : {GateMode::kFull, GateMode::kSuppressOnly, GateMode::kEnhanceOnly,
                     GateMode::kNoPositionGuidance, GateMode::kPerHead, GateMode::kDisabled}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown gate mode '" + std::string(name) + "'");
}

std::size_t AttentionConfig::gate_columns() const {
  switch (gate_mode) {
    case GateMode::kDisabled:
      return 0;
    case GateMode::kPerHead:
      return num_heads;
    default:
      return 1;
  }
}

void AttentionConfig::validate() const {
  if (model_dim == 0 || num_heads == 0) throw ConfigError("model_dim and num_heads must be positive");
  if (model_dim % num_heads != 0) {
    throw ConfigError("model_dim " + std::to_string(model_dim) + " is not divisible by num_heads " +
                      std::to_string(num_heads));
  }
}

GateScores compute_gates(const Tensor& z_h, const Tensor& w_g, const AttentionConfig& config) {
  if (config.gate_mode == GateMode::kDisabled) return {};
  const std::size_t columns = config.gate_columns();
  if (w_g.rank() != 2 || w_g.shape()[1] != columns) {
    throw ShapeError("gate projection must be [D, " + std::to_string(columns) + "], got " + w_g.shape().str());
  }
  const Tensor logits = matmul(z_h, w_g);
  Tensor g;
  switch (config.gate_mode) {
    case GateMode::kSuppressOnly:
      g = log_sigmoid(logits);
      break;
    case GateMode::kEnhanceOnly:
      g = sigmoid(logits);
      break;
    default:
      g = add(log_sigmoid(logits), sigmoid(logits));
      break;
  }
  return GateScores{clamp_min(g, kGateFloor)};
}

MultiHeadParams MultiHeadParams::init(std::size_t model_dim, Rng& rng) {
  const Shape s{model_dim, model_dim};
  MultiHeadParams p;
  p.w_q = truncated_normal(s, rng);
  p.w_k = truncated_normal(s, rng);
  p.w_v = truncated_normal(s, rng);
  p.w_o = truncated_normal(s, rng);
  return p;
}

LayerNormParams LayerNormParams::init(std::size_t model_dim) {
  return {Tensor::full(Shape{model_dim}, 1.0, true), Tensor::zeros(Shape{model_dim}, true)};
}

FeedForwardParams FeedForwardParams::init(std::size_t model_dim, Rng& rng) {
  const std::size_t hidden = 4 * model_dim;
  FeedForwardParams p;
  p.w1 = truncated_normal(Shape{model_dim, hidden}, rng);
  p.b1 = Tensor::zeros(Shape{hidden}, true);
  p.w2 = truncated_normal(Shape{hidden, model_dim}, rng);
  p.b2 = Tensor::zeros(Shape{model_dim}, true);
  return p;
}

TransformerBlockParams TransformerBlockParams::init(std::size_t model_dim, Rng& rng) {
  TransformerBlockParams p;
  p.attn_norm = LayerNormParams::init(model_dim);
  p.attn = MultiHeadParams::init(model_dim, rng);
  p.ffn_norm = LayerNormParams::init(model_dim);
  p.ffn = FeedForwardParams::init(model_dim, rng);
  return p;
}

Tensor multi_head_attention(const Tensor& queries, const Tensor& keys_values, const MultiHeadParams& params,
                            std::size_t num_heads, const GateScores* gates, std::span<const std::uint8_t> mask,
                            AttentionProbe* probe) {
  if (queries.rank() != 2 || keys_values.rank() != 2) throw ShapeError("attention inputs must be rank 2");
  const std::size_t model_dim = queries.cols();
  if (keys_values.cols() != model_dim) throw ShapeError("query and key/value widths differ");
  if (num_heads == 0 || model_dim % num_heads != 0) throw ShapeError("model_dim must divide into heads");
  const std::size_t keys = keys_values.rows();
  const bool gated = gates != nullptr && gates->enabled();
  if (gated) {
    if (gates->frames() != keys) {
      throw ShapeError("gate length " + std::to_string(gates->frames()) + " does not match " +
                       std::to_string(keys) + " history frames");
    }
    if (gates->columns() != 1 && gates->columns() != num_heads) {
      throw ShapeError("gate scores need 1 or num_heads columns");
    }
  }

  const std::size_t head_dim = model_dim / num_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const Tensor q = matmul(queries, params.w_q);
  const Tensor k = matmul(keys_values, params.w_k);
  const Tensor v = matmul(keys_values, params.w_v);

  Tensor shared_bias;
  if (gated && gates->columns() == 1) shared_bias = transpose(gates->values);

  std::vector<Tensor> heads;
  heads.reserve(num_heads);
  if (probe) probe->weights.clear();
  for (std::size_t h = 0; h < num_heads; ++h) {
    const std::size_t start = h * head_dim;
    const Tensor qh = slice_lastdim(q, start, head_dim);
    const Tensor kh = slice_lastdim(k, start, head_dim);
    const Tensor vh = slice_lastdim(v, start, head_dim);
    const Tensor logits = scale(matmul(qh, transpose(kh)), inv_sqrt);
    Tensor bias;
    if (gated) bias = gates->columns() == 1 ? shared_bias : transpose(slice_lastdim(gates->values, h, 1));
    const Tensor weights = softmax_rows(logits, bias, mask);
    if (probe) probe->weights.push_back(weights);
    heads.push_back(matmul(weights, vh));
  }
  const Tensor joined = num_heads == 1 ? heads.front() : concat_lastdim(heads);
  return matmul(joined, params.w_o);
}

Tensor gated_cross_attention(const Tensor& q_latent, const Tensor& z_h, const GateScores& gates,
                             const MultiHeadParams& params, const AttentionConfig& config,
                             std::span<const std::uint8_t> key_padding, AttentionProbe* probe) {
  config.validate();
  if (q_latent.cols() != config.model_dim || z_h.cols() != config.model_dim) {
    throw ShapeError("gated_cross_attention: inputs must have model_dim columns");
  }
  if (gates.enabled() && gates.frames() != z_h.rows()) {
    throw ShapeError("gate length " + std::to_string(gates.frames()) + " does not match T = " +
                     std::to_string(z_h.rows()));
  }
  std::vector<std::uint8_t> mask;
  if (!key_padding.empty()) {
    if (key_padding.size() != z_h.rows()) throw ShapeError("key padding length does not match T");
    const std::size_t rows = q_latent.rows();
    mask.resize(rows * key_padding.size());
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t t = 0; t < key_padding.size(); ++t) mask[r * key_padding.size() + t] = key_padding[t];
    }
  }
  return multi_head_attention(q_latent, z_h, params, config.num_heads, &gates, mask, probe);
}

std::vector<std::uint8_t> self_attention_mask(std::size_t length, bool causal,
                                              std::span<const std::uint8_t> padding) {
  if (!padding.empty() && padding.size() != length) throw ShapeError("padding length does not match sequence");
  std::vector<std::uint8_t> mask(length * length, 0);
  for (std::size_t i = 0; i < length; ++i) {
    for (std::size_t j = 0; j < length; ++j) {
      const bool future = causal && j > i;
      const bool padded = !padding.empty() && padding[j] && j != i;
      mask[i * length + j] = (future || padded) ? 1 : 0;
    }
  }
  return mask;
}

Tensor feed_forward(const Tensor& x, const FeedForwardParams& params) {
  const Tensor hidden = gelu(add(matmul(x, params.w1), params.b1));
  return add(matmul(hidden, params.w2), params.b2);
}

Tensor self_attention(const Tensor& x, const TransformerBlockParams& params, const AttentionConfig& config,
                      std::span<const std::uint8_t> padding, AttentionProbe* probe) {
  const std::size_t length = x.rows();
  std::vector<std::uint8_t> mask;
  if (config.causal || !padding.empty()) mask = self_attention_mask(length, config.causal, padding);
  const Tensor normed = layer_norm(x, params.attn_norm.gamma, params.attn_norm.beta);
  const Tensor attended =
      add(x, multi_head_attention(normed, normed, params.attn, config.num_heads, nullptr, mask, probe));
  const Tensor ffn_in = layer_norm(attended, params.ffn_norm.gamma, params.ffn_norm.beta);
  return add(attended, feed_forward(ffn_in, params.ffn));
}

Tensor cross_attention_block(const Tensor& x, const Tensor& memory, const TransformerBlockParams& params,
                             std::size_t num_heads, AttentionProbe* probe) {
  const Tensor normed = layer_norm(x, params.attn_norm.gamma, params.attn_norm.beta);
  const Tensor attended =
      add(x, multi_head_attention(normed, memory, params.attn, num_heads, nullptr, {}, probe));
  const Tensor ffn_in = layer_norm(attended, params.ffn_norm.gamma, params.ffn_norm.beta);
  return add(attended, feed_forward(ffn_in, params.ffn));
}

}  // namespace gatehub
