#include "gatehub/experiment.hpp"

#include <string>

#include "gatehub/errors.hpp"
#include "gatehub/feature_source.hpp"

namespace gatehub {

void ExperimentConfig::validate() const {
  model.validate();
  loss.validate();
  synth.validate();
  adam.validate();
  const auto source = make_feature_source(feature_source, synth.feature_dim);
  if (source->feature_dim() != model.input_dim) {
    throw ConfigError(feature_source + " features are " + std::to_string(source->feature_dim()) +
                      " wide but the model expects " + std::to_string(model.input_dim));
  }
  if (model.num_classes != synth.num_classes) throw ConfigError("model and data disagree on the class count");
  if (fah.future_frames >= model.history_len) throw ConfigError("future horizon must be shorter than the history");
  if (train_sequences < 1 || eval_sequences < 1) throw ConfigError("need at least one train and one eval sequence");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (!(peak_lr > 0.0)) throw ConfigError("peak learning rate must be positive");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      // gated history unit variants
      "full", "no_ghu", "ghu_suppress_only", "ghu_enhance_only", "ghu_no_position_guidance", "ghu_per_head",
      // objectives
      "bg_suppression", "gamma_a_lt_b", "cross_entropy", "standard_focal",
      // future-augmented history horizons
      "no_fah", "fah_0_5s", "fah_1s", "fah_2s", "fah_4s",
      // decoder and history layout
      "no_present_self_attention", "cross_attention_first_layer_only", "disjoint_history_present",
      // second feature stream at a different temporal resolution
      "flow_free"};
  return names;
}

ExperimentConfig apply_preset(ExperimentConfig c, std::string_view preset) {
  const std::string name(preset);
  auto fah_frames = [&](std::size_t frames) { c.fah.future_frames = frames; };
  if (name == "full" || name == "bg_suppression") {
  } else if (name == "no_ghu") {
    c.model.gate_mode = GateMode::kDisabled;
  } else if (name == "ghu_suppress_only") {
    c.model.gate_mode = GateMode::kSuppressOnly;
  } else if (name == "ghu_enhance_only") {
    c.model.gate_mode = GateMode::kEnhanceOnly;
  } else if (name == "ghu_no_position_guidance") {
    c.model.gate_mode = GateMode::kNoPositionGuidance;
  } else if (name == "ghu_per_head") {
    c.model.gate_mode = GateMode::kPerHead;
  } else if (name == "gamma_a_lt_b") {
    c.loss = {LossMode::kBackgroundSuppression, c.loss.gamma_background, c.loss.gamma_action};
  } else if (name == "cross_entropy") {
    c.loss = LossConfig::cross_entropy();
  } else if (name == "standard_focal") {
    c.loss = LossConfig::standard_focal(c.loss.gamma_action);
  } else if (name == "no_fah") {
    fah_frames(0);
  } else if (name == "fah_0_5s") {
    fah_frames(2);
  } else if (name == "fah_1s") {
    fah_frames(4);
  } else if (name == "fah_2s") {
    fah_frames(8);
  } else if (name == "fah_4s") {
    fah_frames(16);
  } else if (name == "no_present_self_attention") {
    c.model.present_self_attention = false;
  } else if (name == "cross_attention_first_layer_only") {
    c.model.cross_attention_every_pass = false;
  } else if (name == "disjoint_history_present") {
    c.model.disjoint_history_present = true;
  } else if (name == "flow_free") {
    c.feature_source = "dual_rate";
    c.model.input_dim = make_feature_source("dual_rate", c.synth.feature_dim)->feature_dim();
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.preset = name;
  return c;
}

}  // namespace gatehub
