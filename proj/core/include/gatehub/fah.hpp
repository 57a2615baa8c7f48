#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gatehub/feature_source.hpp"
#include "gatehub/model.hpp"
#include "gatehub/prediction.hpp"
#include "gatehub/tensor.hpp"

namespace gatehub {

// Future-augmented history horizons, in frames. A history frame at offset t
// is described by frames [t, t + future_frames] once they have all been
// observed, and by [t - past_frames, t] until then. future_frames == 0 turns
// the future branch off.
struct FahConfig {
  std::size_t future_frames = 8;  // 2 s at 4 FPS
  std::size_t past_frames = 4;    // 1 s at 4 FPS

  static FahConfig from_seconds(double future_seconds, double past_seconds, double fps);
  static FahConfig disabled(std::size_t past_frames = 4) { return {0, past_frames}; }

  bool enabled() const { return future_frames > 0; }

  friend bool operator==(const FahConfig&, const FahConfig&) = default;
};

// Window of frame offsets (relative to the current frame at 0) whose raw
// frames describe the frame at `offset`. Throws ContractError for offset > 0.
FrameInterval fah_window(std::int64_t offset, const FahConfig& config);

struct FeatureSlot {
  std::int64_t time = -1;  // absolute frame index; -1 for a slot never written
  std::vector<double> feature;
  int writes = 0;
};

// A model input window: features [T, M] oldest first and a per-row padding flag.
struct ObservedWindow {
  Tensor features;
  std::vector<std::uint8_t> padding;
};

// Live state of one stream: raw frames needed for the next extractions and a
// ring of T feature slots, one per time index.
class StreamState {
 public:
  StreamState(std::size_t history_len, const FahConfig& fah, std::size_t raw_dim, std::size_t feature_dim);

  // Consumes the frame with absolute index `time` (must be exactly one past
  // the previous frame; the first frame is time 0). Extracts the new frame's
  // past-window feature, then rewrites the slot that just reached offset
  // -future_frames with its future window.
  void step(std::int64_t time, std::span<const double> raw_frame, FeatureSource& source);

  // Index of the most recent frame, -1 before the first step.
  std::int64_t now() const { return now_; }
  std::size_t history_len() const { return slots_.size(); }
  std::size_t feature_dim() const { return feature_dim_; }
  const FahConfig& fah() const { return fah_; }

  // Slot holding offset `offset` in [-T+1, 0]; null when that time precedes the stream.
  const FeatureSlot* slot_at_offset(std::int64_t offset) const;
  // Largest write count any slot has ever reached.
  int max_writes() const { return max_writes_; }

  ObservedWindow window() const;

 private:
  FeatureSlot& slot_for_time(std::int64_t time);

  FahConfig fah_;
  std::size_t feature_dim_;
  FrameStore raw_;
  std::vector<FeatureSlot> slots_;
  std::int64_t now_ = -1;
  int max_writes_ = 0;
};

// Current-frame prediction from the buffered window.
PredictionFrame predict_current(const StreamState& state, const ModelParams& params, const ModelConfig& config,
                                GateScores* gates = nullptr);

// Whole-sequence feature computation for offline evaluation and training:
// both the past-window and the future-window feature of every frame, from
// which the window any streaming step would hold is assembled directly.
class OfflineFeatureBank {
 public:
  OfflineFeatureBank(const Tensor& raw_frames, FeatureSource& source, const FahConfig& fah);

  std::size_t length() const { return length_; }
  std::size_t feature_dim() const { return feature_dim_; }

  // The feature the streaming buffer holds for frame `time` after step `step`.
  std::span<const double> feature_at(std::int64_t time, std::int64_t step) const;
  // The T-row window a stream holds right after step `step`.
  ObservedWindow window_at(std::int64_t step, std::size_t history_len) const;
  void fill_window(std::int64_t step, std::size_t history_len, std::span<double> features,
                   std::span<std::uint8_t> padding) const;

 private:
  FahConfig fah_;
  std::size_t length_;
  std::size_t feature_dim_;
  std::vector<double> past_;
  std::vector<double> future_;
};

}  // namespace gatehub
