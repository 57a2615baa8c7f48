#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gatehub/fah.hpp"
#include "gatehub/model.hpp"
#include "gatehub/objective.hpp"
#include "gatehub/optim.hpp"
#include "gatehub/synth.hpp"

namespace gatehub {

// Everything that determines a training run. The data split depends only on
// `synth` and the sequence counts, so runs that differ in `seed` or preset
// train and evaluate on identical sequences.
struct ExperimentConfig {
  std::string preset = "full";
  ModelConfig model = ModelConfig::toy();
  LossConfig loss = LossConfig::training_default();
  FahConfig fah;
  SynthConfig synth;
  std::string feature_source = "window_mean";
  std::size_t train_sequences = 4;  // seeds synth.seed, synth.seed + 1, ...
  std::size_t eval_sequences = 2;   // seeds synth.seed + kEvalSeedOffset, ...
  std::size_t epochs = 10;
  std::size_t batch_size = 50;
  std::size_t max_steps = 0;  // caps the optimizer steps; 0 keeps every epoch
  double peak_lr = 1e-3;
  AdamConfig adam;
  std::uint64_t seed = 1;  // parameter init and batch sampling

  static constexpr std::uint64_t kEvalSeedOffset = 1000;

  // Throws ConfigError when the parts disagree (feature width vs input_dim,
  // future horizon vs history length, class counts).
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Ablation rows, in table order.
const std::vector<std::string>& preset_names();
// `base` with the named preset's changes applied on top. ConfigError for an unknown name.
ExperimentConfig apply_preset(ExperimentConfig base, std::string_view preset);

// Canonical JSON: every field, fixed key order.
std::string to_json(const ExperimentConfig& config);
// Fields missing from `text` keep their value in `base`; unknown keys are a ConfigError.
ExperimentConfig experiment_config_from_json(const std::string& text, const ExperimentConfig& base = {});

}  // namespace gatehub
