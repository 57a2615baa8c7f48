#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gatehub/tensor.hpp"

namespace gatehub {

// Ground-truth role of a synthetic frame for history gating.
enum class FrameTag : std::uint8_t {
  kPlainBackground = 0,
  kTrigger = 1,         // background-labeled, identifies the upcoming action class
  kAction = 2,
  kHardBackground = 3,  // background-labeled, drawn near an action class mean
  kDistractor = 4,      // uninformative noise, sometimes shaped like a trigger
};

std::string_view to_string(FrameTag tag);
FrameTag parse_frame_tag(std::string_view name);
inline bool is_informative(FrameTag tag) { return tag == FrameTag::kTrigger || tag == FrameTag::kAction; }

// Streaming action benchmark in which the class of an action is carried
// mostly by a trigger frame a few frames before it starts. Action frames
// share one "action" direction and only a weak class-specific component.
struct SynthConfig {
  std::size_t num_classes = 4;
  std::size_t feature_dim = 16;
  std::size_t length = 1000;
  std::size_t segment_min = 8;  // action segment length range
  std::size_t segment_max = 20;
  std::size_t gap_min = 12;  // background run between segments
  std::size_t gap_max = 40;
  std::size_t trigger_lag_min = 2;  // trigger sits this many frames before the action starts
  std::size_t trigger_lag_max = 4;
  double distractor_rate = 0.15;      // fraction of background frames replaced by distractors
  double decoy_rate = 0.0;            // fraction of distractors that carry a trigger pattern
  double hard_background_rate = 0.05; // fraction of background frames placed near an action mean
  double noise_std = 0.5;
  double distractor_std = 1.0;
  double class_signal = 0.3;   // weight of the class direction inside action frames
  double trigger_scale = 1.5;  // magnitude of the trigger direction
  std::uint64_t seed = 1;
  // Seeds the direction vectors; splits that share it share the task.
  std::uint64_t basis_seed = 7;

  void validate() const;
  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

struct SynthSequence {
  Tensor frames;  // [length, feature_dim]
  std::vector<int> labels;  // 0 = background, 1..C = action class
  std::vector<FrameTag> tags;

  std::size_t length() const { return labels.size(); }
};

// Deterministic in config.seed. Throws ConfigError for num_classes < 1,
// feature_dim < 2, or inconsistent ranges.
SynthSequence generate(const SynthConfig& config);

// The direction vectors the generator draws from, for inspection and tests.
struct SynthBasis {
  std::vector<double> background;
  std::vector<double> action;
  std::vector<std::vector<double>> class_dirs;    // per class
  std::vector<std::vector<double>> trigger_dirs;  // per class
};
SynthBasis synth_basis(const SynthConfig& config);

// Mean of class-`c` action frames (c >= 1).
std::vector<double> action_mean(const SynthBasis& basis, const SynthConfig& config, int c);

}  // namespace gatehub
