#include "gatehub/model.hpp"

#include <algorithm>

#include "gatehub/errors.hpp"
#include "gatehub/ops.hpp"

namespace gatehub {

ModelConfig ModelConfig::full_scale() {
  ModelConfig c;
  c.history_len = 1024;
  c.present_len = 8;
  c.latent_len = 16;
  c.model_dim = 1024;
  c.input_dim = 3072;  // RGB 2048 + optical flow 1024
  c.num_classes = 20;
  c.num_layers = 2;
  c.num_heads = 16;
  return c;
}

ModelConfig ModelConfig::toy() { return ModelConfig{}; }

AttentionConfig ModelConfig::attention(bool causal) const {
  AttentionConfig a;
  a.model_dim = model_dim;
  a.num_heads = num_heads;
  a.gate_mode = gate_mode;
  a.causal = causal;
  a.ghu_residual = ghu_residual;
  return a;
}

void ModelConfig::validate() const {
  attention().validate();
  if (history_len == 0 || present_len == 0 || latent_len == 0 || input_dim == 0 || num_classes == 0) {
    throw ConfigError("model extents must be positive");
  }
  if (present_len > history_len) throw ConfigError("present_len must not exceed history_len");
  if (disjoint_history_present && present_len >= history_len) {
    throw ConfigError("disjoint history needs history_len > present_len");
  }
}

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const std::size_t d = config.model_dim;
  ModelParams p;
  p.input_encoding = truncated_normal(Shape{config.input_dim, d}, rng);
  p.history_position = truncated_normal(Shape{config.history_slots(), d}, rng);
  p.present_position = truncated_normal(Shape{config.present_len, d}, rng);
  p.latent_query = truncated_normal(Shape{config.latent_len, d}, rng);
  const std::size_t gate_columns = config.attention().gate_columns();
  if (gate_columns > 0) p.gate_weight = truncated_normal(Shape{d, gate_columns}, rng);
  p.ghu = MultiHeadParams::init(d, rng);
  for (std::size_t i = 0; i < config.num_layers; ++i) p.encoder_layers.push_back(TransformerBlockParams::init(d, rng));
  p.encoder_norm = LayerNormParams::init(d);
  for (std::size_t pass = 0; pass < ModelConfig::kDecoderPasses; ++pass) {
    if (config.present_self_attention) p.decoder[pass].self_attn = TransformerBlockParams::init(d, rng);
    if (pass == 0 || config.cross_attention_every_pass) {
      p.decoder[pass].cross_attn = TransformerBlockParams::init(d, rng);
    }
  }
  p.decoder_norm = LayerNormParams::init(d);
  p.classifier_weight = truncated_normal(Shape{d, config.num_outputs()}, rng);
  p.classifier_bias = Tensor::zeros(Shape{config.num_outputs()}, true);
  return p;
}

namespace {

void append_block(std::vector<NamedTensor>& out, const std::string& prefix, const TransformerBlockParams& b) {
  out.push_back({prefix + ".attn_norm.gamma", b.attn_norm.gamma});
  out.push_back({prefix + ".attn_norm.beta", b.attn_norm.beta});
  out.push_back({prefix + ".attn.w_q", b.attn.w_q});
  out.push_back({prefix + ".attn.w_k", b.attn.w_k});
  out.push_back({prefix + ".attn.w_v", b.attn.w_v});
  out.push_back({prefix + ".attn.w_o", b.attn.w_o});
  out.push_back({prefix + ".ffn_norm.gamma", b.ffn_norm.gamma});
  out.push_back({prefix + ".ffn_norm.beta", b.ffn_norm.beta});
  out.push_back({prefix + ".ffn.w1", b.ffn.w1});
  out.push_back({prefix + ".ffn.b1", b.ffn.b1});
  out.push_back({prefix + ".ffn.w2", b.ffn.w2});
  out.push_back({prefix + ".ffn.b2", b.ffn.b2});
}

TransformerBlockParams clone_block(const TransformerBlockParams& b) {
  TransformerBlockParams c;
  c.attn_norm = {b.attn_norm.gamma.clone(), b.attn_norm.beta.clone()};
  c.attn = {b.attn.w_q.clone(), b.attn.w_k.clone(), b.attn.w_v.clone(), b.attn.w_o.clone()};
  c.ffn_norm = {b.ffn_norm.gamma.clone(), b.ffn_norm.beta.clone()};
  c.ffn = {b.ffn.w1.clone(), b.ffn.b1.clone(), b.ffn.w2.clone(), b.ffn.b2.clone()};
  return c;
}

}  // namespace

std::vector<NamedTensor> ModelParams::named() const {
  std::vector<NamedTensor> out;
  out.push_back({"input_encoding", input_encoding});
  out.push_back({"history_position", history_position});
  out.push_back({"present_position", present_position});
  out.push_back({"latent_query", latent_query});
  if (gate_weight.defined()) out.push_back({"ghu.w_g", gate_weight});
  out.push_back({"ghu.w_q", ghu.w_q});
  out.push_back({"ghu.w_k", ghu.w_k});
  out.push_back({"ghu.w_v", ghu.w_v});
  out.push_back({"ghu.w_o", ghu.w_o});
  for (std::size_t i = 0; i < encoder_layers.size(); ++i) {
    append_block(out, "encoder." + std::to_string(i), encoder_layers[i]);
  }
  out.push_back({"encoder_norm.gamma", encoder_norm.gamma});
  out.push_back({"encoder_norm.beta", encoder_norm.beta});
  for (std::size_t pass = 0; pass < decoder.size(); ++pass) {
    const std::string prefix = "decoder." + std::to_string(pass);
    if (decoder[pass].self_attn) append_block(out, prefix + ".self_attn", *decoder[pass].self_attn);
    if (decoder[pass].cross_attn) append_block(out, prefix + ".cross_attn", *decoder[pass].cross_attn);
  }
  out.push_back({"decoder_norm.gamma", decoder_norm.gamma});
  out.push_back({"decoder_norm.beta", decoder_norm.beta});
  out.push_back({"classifier.weight", classifier_weight});
  out.push_back({"classifier.bias", classifier_bias});
  return out;
}

std::vector<Tensor> ModelParams::tensors() const {
  std::vector<Tensor> out;
  for (auto& nt : named()) out.push_back(nt.tensor);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& nt : named()) n += nt.tensor.numel();
  return n;
}

ModelParams ModelParams::clone() const {
  ModelParams c;
  c.input_encoding = input_encoding.clone();
  c.history_position = history_position.clone();
  c.present_position = present_position.clone();
  c.latent_query = latent_query.clone();
  c.gate_weight = gate_weight.clone();
  c.ghu = {ghu.w_q.clone(), ghu.w_k.clone(), ghu.w_v.clone(), ghu.w_o.clone()};
  for (const auto& layer : encoder_layers) c.encoder_layers.push_back(clone_block(layer));
  c.encoder_norm = {encoder_norm.gamma.clone(), encoder_norm.beta.clone()};
  for (std::size_t pass = 0; pass < decoder.size(); ++pass) {
    if (decoder[pass].self_attn) c.decoder[pass].self_attn = clone_block(*decoder[pass].self_attn);
    if (decoder[pass].cross_attn) c.decoder[pass].cross_attn = clone_block(*decoder[pass].cross_attn);
  }
  c.decoder_norm = {decoder_norm.gamma.clone(), decoder_norm.beta.clone()};
  c.classifier_weight = classifier_weight.clone();
  c.classifier_bias = classifier_bias.clone();
  return c;
}

void ModelParams::zero_grad() const {
  for (auto& nt : named()) {
    Tensor t = nt.tensor;
    t.zero_grad();
  }
}

Tensor encode_history(const Tensor& features, std::span<const std::uint8_t> padding, const ModelParams& params,
                      const ModelConfig& config, ForwardTrace* trace) {
  const std::size_t slots = config.history_slots();
  if (features.rank() != 2 || features.rows() != slots || features.cols() != config.input_dim) {
    throw ShapeError("history features must be [" + std::to_string(slots) + "x" + std::to_string(config.input_dim) +
                     "], got " + features.shape().str());
  }
  if (!padding.empty() && padding.size() != slots) throw ShapeError("history padding length mismatch");

  const AttentionConfig attn = config.attention();
  const Tensor encoded = matmul(features, params.input_encoding);
  const Tensor z_h = add(encoded, params.history_position);
  const Tensor& gate_input = config.gate_mode == GateMode::kNoPositionGuidance ? encoded : z_h;
  const GateScores gates = compute_gates(gate_input, params.gate_weight, attn);

  // With every slot padded there is nothing to exclude; the latent then reads
  // position encodings only.
  const bool all_padded =
      !padding.empty() && std::all_of(padding.begin(), padding.end(), [](std::uint8_t p) { return p != 0; });
  const std::span<const std::uint8_t> key_padding = all_padded ? std::span<const std::uint8_t>{} : padding;

  const Tensor read = gated_cross_attention(params.latent_query, z_h, gates, params.ghu, attn, key_padding,
                                            trace ? &trace->ghu_attention : nullptr);
  Tensor latent = config.ghu_residual ? add(params.latent_query, read) : read;
  for (const auto& layer : params.encoder_layers) latent = self_attention(latent, layer, attn);
  latent = layer_norm(latent, params.encoder_norm.gamma, params.encoder_norm.beta);

  if (trace) {
    trace->gates = gates;
    trace->history_encoding = z_h;
    trace->latent = latent;
  }
  return latent;
}

Tensor decode_present(const Tensor& present_features, std::span<const std::uint8_t> present_padding,
                      const Tensor& latent, const ModelParams& params, const ModelConfig& config,
                      ForwardTrace* trace) {
  if (present_features.rank() != 2 || present_features.rows() != config.present_len ||
      present_features.cols() != config.input_dim) {
    throw ShapeError("present features must be [" + std::to_string(config.present_len) + "x" +
                     std::to_string(config.input_dim) + "], got " + present_features.shape().str());
  }
  if (latent.rank() != 2 || latent.rows() != config.latent_len || latent.cols() != config.model_dim) {
    throw ShapeError("history latent must be [" + std::to_string(config.latent_len) + "x" +
                     std::to_string(config.model_dim) + "], got " + latent.shape().str());
  }
  if (!present_padding.empty() && present_padding.size() != config.present_len) {
    throw ShapeError("present padding length mismatch");
  }

  Tensor x = add(matmul(present_features, params.input_encoding), params.present_position);
  for (std::size_t pass = 0; pass < ModelConfig::kDecoderPasses; ++pass) {
    const DecoderPassParams& p = params.decoder[pass];
    if (p.self_attn) {
      x = self_attention(x, *p.self_attn, config.attention(/*causal=*/pass == 0), present_padding);
      if (pass == 0 && trace) trace->pass1_self_attention = x;
    }
    if (p.cross_attn) x = cross_attention_block(x, latent, *p.cross_attn, config.num_heads);
  }
  x = layer_norm(x, params.decoder_norm.gamma, params.decoder_norm.beta);
  return add(matmul(x, params.classifier_weight), params.classifier_bias);
}

ForwardOutput forward(const Tensor& window, std::span<const std::uint8_t> padding, const ModelParams& params,
                      const ModelConfig& config, ForwardTrace* trace) {
  const std::size_t t = config.history_len;
  if (window.rank() != 2 || window.rows() != t || window.cols() != config.input_dim) {
    throw ShapeError("window must be [" + std::to_string(t) + "x" + std::to_string(config.input_dim) + "], got " +
                     window.shape().str());
  }
  if (!padding.empty() && padding.size() != t) throw ShapeError("window padding length mismatch");

  const std::size_t slots = config.history_slots();
  const std::size_t present_start = t - config.present_len;
  const Tensor history = slots == t ? window : slice_rows(window, 0, slots);
  const Tensor present = slice_rows(window, present_start, config.present_len);
  const auto history_padding = padding.empty() ? padding : padding.first(slots);
  const auto present_padding = padding.empty() ? padding : padding.subspan(present_start, config.present_len);

  ForwardTrace local;
  ForwardTrace* tr = trace ? trace : &local;
  const Tensor latent = encode_history(history, history_padding, params, config, tr);
  ForwardOutput out;
  out.logits = decode_present(present, present_padding, latent, params, config, tr);
  out.probs = softmax_rows(out.logits);
  out.gates = tr->gates;
  return out;
}

}  // namespace gatehub
