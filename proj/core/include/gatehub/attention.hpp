#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gatehub/init.hpp"
#include "gatehub/tensor.hpp"

namespace gatehub {

// How history-frame gating scores are formed. kDisabled is vanilla
// cross-attention; the rest are the gated variants.
enum class GateMode {
  kFull,                // G = log(z) + z, z = sigmoid(z_h W_g)
  kSuppressOnly,        // G = log(z)
  kEnhanceOnly,         // G = z
  kNoPositionGuidance,  // full formula on features before position encoding
  kPerHead,             // full formula, one W_g column per head
  kDisabled,            // no gate
};

std::string_view to_string(GateMode mode);
GateMode parse_gate_mode(std::string_view name);

struct AttentionConfig {
  std::size_t model_dim = 64;
  std::size_t num_heads = 4;
  GateMode gate_mode = GateMode::kFull;
  bool causal = false;
  // Add the gated read back onto the latent queries before the latent self-attention stack.
  bool ghu_residual = true;

  std::size_t head_dim() const { return model_dim / num_heads; }
  // Columns of W_g: 0 when disabled, num_heads per head, otherwise 1.
  std::size_t gate_columns() const;
  void validate() const;
};

// Gate values are floored here before they reach the softmax.
inline constexpr double kGateFloor = -1e4;

struct GateScores {
  Tensor values;  // [T, 1], or [T, num_heads] per head; undefined when gating is off

  bool enabled() const { return values.defined(); }
  std::size_t frames() const { return enabled() ? values.rows() : 0; }
  std::size_t columns() const { return enabled() ? values.cols() : 0; }
};

// Gating scores for T history frames from their encoded features z_h [T, D]
// and the projection w_g [D, gate_columns()].
GateScores compute_gates(const Tensor& z_h, const Tensor& w_g, const AttentionConfig& config);

struct MultiHeadParams {
  Tensor w_q, w_k, w_v, w_o;  // each [D, D]; head i owns columns [i*d_k, (i+1)*d_k)

  static MultiHeadParams init(std::size_t model_dim, Rng& rng);
};

struct LayerNormParams {
  Tensor gamma, beta;  // [D]

  static LayerNormParams init(std::size_t model_dim);
};

struct FeedForwardParams {
  Tensor w1, b1, w2, b2;  // [D, 4D], [4D], [4D, D], [D]

  static FeedForwardParams init(std::size_t model_dim, Rng& rng);
};

// Pre-norm transformer block: attention sublayer then feed-forward sublayer,
// each with a residual connection.
struct TransformerBlockParams {
  LayerNormParams attn_norm;
  MultiHeadParams attn;
  LayerNormParams ffn_norm;
  FeedForwardParams ffn;

  static TransformerBlockParams init(std::size_t model_dim, Rng& rng);
};

// Captures per-head attention weights (each [queries, keys]) for diagnostics.
struct AttentionProbe {
  std::vector<Tensor> weights;
};

// Concat_i(softmax(Q_i K_i^T / sqrt(d_k) + G_i^T, mask) V_i) W_o.
// `gates` may be null or disabled. `mask` has queries*keys entries, nonzero = forbidden.
Tensor multi_head_attention(const Tensor& queries, const Tensor& keys_values, const MultiHeadParams& params,
                            std::size_t num_heads, const GateScores* gates = nullptr,
                            std::span<const std::uint8_t> mask = {}, AttentionProbe* probe = nullptr);

// MultiHeadGHU: latent queries [L, D] read the history z_h [T, D], with each
// frame's logit shifted by its gate score. `key_padding` (size T, nonzero =
// padded) removes frames from attention entirely.
Tensor gated_cross_attention(const Tensor& q_latent, const Tensor& z_h, const GateScores& gates,
                             const MultiHeadParams& params, const AttentionConfig& config,
                             std::span<const std::uint8_t> key_padding = {}, AttentionProbe* probe = nullptr);

// Row i may not attend to row j when (causal && j > i) or when j is padding
// (a row may always attend to itself).
std::vector<std::uint8_t> self_attention_mask(std::size_t length, bool causal,
                                              std::span<const std::uint8_t> padding = {});

Tensor feed_forward(const Tensor& x, const FeedForwardParams& params);

Tensor self_attention(const Tensor& x, const TransformerBlockParams& params, const AttentionConfig& config,
                      std::span<const std::uint8_t> padding = {}, AttentionProbe* probe = nullptr);

Tensor cross_attention_block(const Tensor& x, const Tensor& memory, const TransformerBlockParams& params,
                             std::size_t num_heads, AttentionProbe* probe = nullptr);

}  // namespace gatehub
