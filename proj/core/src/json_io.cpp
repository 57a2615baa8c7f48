#include "json_io.hpp"

#include <set>
#include <string>

#include "gatehub/errors.hpp"

namespace gatehub::json_io {
namespace {

// Tracks which keys of an object have been consumed so leftovers can be reported.
class Reader {
 public:
  Reader(const Json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(context_ + ": expected a JSON object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(context_ + "." + key + ": " + e.what());
    }
  }

  template <typename T, typename Parse>
  void read_enum(const char* key, T& out, Parse parse) {
    std::string name;
    read(key, name);
    if (!name.empty()) out = parse(name);
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(context_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const Json& j_;
  std::string context_;
  std::set<std::string, std::less<>> seen_;
};

}  // namespace

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

Json encode(const ModelConfig& c) {
  return Json{{"history_len", c.history_len},
              {"present_len", c.present_len},
              {"latent_len", c.latent_len},
              {"model_dim", c.model_dim},
              {"input_dim", c.input_dim},
              {"num_classes", c.num_classes},
              {"num_layers", c.num_layers},
              {"num_heads", c.num_heads},
              {"gate_mode", std::string(to_string(c.gate_mode))},
              {"ghu_residual", c.ghu_residual},
              {"disjoint_history_present", c.disjoint_history_present},
              {"present_self_attention", c.present_self_attention},
              {"cross_attention_every_pass", c.cross_attention_every_pass}};
}

ModelConfig decode(const Json& j, ModelConfig c) {
  Reader r(j, "model");
  r.read("history_len", c.history_len);
  r.read("present_len", c.present_len);
  r.read("latent_len", c.latent_len);
  r.read("model_dim", c.model_dim);
  r.read("input_dim", c.input_dim);
  r.read("num_classes", c.num_classes);
  r.read("num_layers", c.num_layers);
  r.read("num_heads", c.num_heads);
  r.read_enum("gate_mode", c.gate_mode, parse_gate_mode);
  r.read("ghu_residual", c.ghu_residual);
  r.read("disjoint_history_present", c.disjoint_history_present);
  r.read("present_self_attention", c.present_self_attention);
  r.read("cross_attention_every_pass", c.cross_attention_every_pass);
  r.finish();
  return c;
}

Json encode(const LossConfig& c) {
  return Json{{"mode", std::string(to_string(c.mode))},
              {"gamma_action", c.gamma_action},
              {"gamma_background", c.gamma_background}};
}

LossConfig decode(const Json& j, LossConfig c) {
  Reader r(j, "loss");
  r.read_enum("mode", c.mode, parse_loss_mode);
  r.read("gamma_action", c.gamma_action);
  r.read("gamma_background", c.gamma_background);
  r.finish();
  return c;
}

Json encode(const FahConfig& c) {
  return Json{{"future_frames", c.future_frames}, {"past_frames", c.past_frames}};
}

FahConfig decode(const Json& j, FahConfig c) {
  Reader r(j, "fah");
  r.read("future_frames", c.future_frames);
  r.read("past_frames", c.past_frames);
  r.finish();
  return c;
}

Json encode(const SynthConfig& c) {
  return Json{{"num_classes", c.num_classes},
              {"feature_dim", c.feature_dim},
              {"length", c.length},
              {"segment_min", c.segment_min},
              {"segment_max", c.segment_max},
              {"gap_min", c.gap_min},
              {"gap_max", c.gap_max},
              {"trigger_lag_min", c.trigger_lag_min},
              {"trigger_lag_max", c.trigger_lag_max},
              {"distractor_rate", c.distractor_rate},
              {"decoy_rate", c.decoy_rate},
              {"hard_background_rate", c.hard_background_rate},
              {"noise_std", c.noise_std},
              {"distractor_std", c.distractor_std},
              {"class_signal", c.class_signal},
              {"trigger_scale", c.trigger_scale},
              {"seed", c.seed},
              {"basis_seed", c.basis_seed}};
}

SynthConfig decode(const Json& j, SynthConfig c) {
  Reader r(j, "synth");
  r.read("num_classes", c.num_classes);
  r.read("feature_dim", c.feature_dim);
  r.read("length", c.length);
  r.read("segment_min", c.segment_min);
  r.read("segment_max", c.segment_max);
  r.read("gap_min", c.gap_min);
  r.read("gap_max", c.gap_max);
  r.read("trigger_lag_min", c.trigger_lag_min);
  r.read("trigger_lag_max", c.trigger_lag_max);
  r.read("distractor_rate", c.distractor_rate);
  r.read("decoy_rate", c.decoy_rate);
  r.read("hard_background_rate", c.hard_background_rate);
  r.read("noise_std", c.noise_std);
  r.read("distractor_std", c.distractor_std);
  r.read("class_signal", c.class_signal);
  r.read("trigger_scale", c.trigger_scale);
  r.read("seed", c.seed);
  r.read("basis_seed", c.basis_seed);
  r.finish();
  return c;
}

Json encode(const AdamConfig& c) {
  return Json{{"beta1", c.beta1},
              {"beta2", c.beta2},
              {"eps", c.eps},
              {"weight_decay", c.weight_decay},
              {"clip_norm", c.clip_norm}};
}

AdamConfig decode(const Json& j, AdamConfig c) {
  Reader r(j, "adam");
  r.read("beta1", c.beta1);
  r.read("beta2", c.beta2);
  r.read("eps", c.eps);
  r.read("weight_decay", c.weight_decay);
  r.read("clip_norm", c.clip_norm);
  r.finish();
  return c;
}

Json encode(const ExperimentConfig& c) {
  return Json{{"preset", c.preset},
              {"seed", c.seed},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"max_steps", c.max_steps},
              {"peak_lr", c.peak_lr},
              {"train_sequences", c.train_sequences},
              {"eval_sequences", c.eval_sequences},
              {"feature_source", c.feature_source},
              {"model", encode(c.model)},
              {"loss", encode(c.loss)},
              {"fah", encode(c.fah)},
              {"synth", encode(c.synth)},
              {"adam", encode(c.adam)}};
}

ExperimentConfig decode(const Json& j, ExperimentConfig c) {
  Reader r(j, "experiment");
  r.read("preset", c.preset);
  r.read("seed", c.seed);
  r.read("epochs", c.epochs);
  r.read("batch_size", c.batch_size);
  r.read("max_steps", c.max_steps);
  r.read("peak_lr", c.peak_lr);
  r.read("train_sequences", c.train_sequences);
  r.read("eval_sequences", c.eval_sequences);
  r.read("feature_source", c.feature_source);
  if (const Json* m = r.child("model")) c.model = decode(*m, c.model);
  if (const Json* l = r.child("loss")) c.loss = decode(*l, c.loss);
  if (const Json* f = r.child("fah")) c.fah = decode(*f, c.fah);
  if (const Json* s = r.child("synth")) c.synth = decode(*s, c.synth);
  if (const Json* a = r.child("adam")) c.adam = decode(*a, c.adam);
  r.finish();
  return c;
}

}  // namespace gatehub::json_io

namespace gatehub {

std::string to_json(const ModelConfig& config) { return json_io::encode(config).dump(2); }

ModelConfig model_config_from_json(const std::string& text) {
  ModelConfig c = json_io::decode(json_io::parse(text), ModelConfig{});
  c.validate();
  return c;
}

std::string to_json(const ExperimentConfig& config) { return json_io::encode(config).dump(2); }

ExperimentConfig experiment_config_from_json(const std::string& text, const ExperimentConfig& base) {
  return json_io::decode(json_io::parse(text), base);
}

}  // namespace gatehub
