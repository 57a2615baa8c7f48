#include "gatehub/fah.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gatehub/errors.hpp"
#include "gatehub/tape.hpp"

namespace gatehub {

FahConfig FahConfig::from_seconds(double future_seconds, double past_seconds, double fps) {
  if (!(fps > 0.0) || future_seconds < 0.0 || past_seconds < 0.0) throw ConfigError("invalid FaH durations");
  return {static_cast<std::size_t>(std::lround(future_seconds * fps)),
          static_cast<std::size_t>(std::lround(past_seconds * fps))};
}

FrameInterval fah_window(std::int64_t offset, const FahConfig& config) {
  if (offset > 0) throw ContractError("fah_window: offset " + std::to_string(offset) + " lies in the future");
  const auto tf = static_cast<std::int64_t>(config.future_frames);
  const auto tps = static_cast<std::int64_t>(config.past_frames);
  if (config.enabled() && offset <= -tf) return {offset, offset + tf};
  return {offset - tps, offset};
}

StreamState::StreamState(std::size_t history_len, const FahConfig& fah, std::size_t raw_dim, std::size_t feature_dim)
    : fah_(fah),
      feature_dim_(feature_dim),
      raw_(raw_dim, std::max(fah.future_frames, fah.past_frames) + 1),
      slots_(history_len) {
  if (history_len == 0) throw ConfigError("history length must be positive");
  if (fah.future_frames >= history_len) throw ConfigError("future horizon must be shorter than the history");
}

FeatureSlot& StreamState::slot_for_time(std::int64_t time) {
  return slots_[static_cast<std::size_t>(time) % slots_.size()];
}

void StreamState::step(std::int64_t time, std::span<const double> raw_frame, FeatureSource& source) {
  if (time != now_ + 1) {
    throw ContractError("frame " + std::to_string(time) + " arrived out of order; expected " +
                        std::to_string(now_ + 1));
  }
  raw_.push(raw_frame);
  now_ = time;

  const FrameInterval past = fah_window(0, fah_);
  FeatureSlot& fresh = slot_for_time(now_);
  fresh.time = now_;
  fresh.feature = source.extract(raw_, {now_ + past.first, now_ + past.last});
  fresh.writes = 1;
  max_writes_ = std::max(max_writes_, 1);

  if (!fah_.enabled()) return;
  const auto tf = static_cast<std::int64_t>(fah_.future_frames);
  const std::int64_t target = now_ - tf;
  if (target < 0) return;
  FeatureSlot& slot = slot_for_time(target);
  if (slot.time != target) throw ContractError("FaH rewrite target was evicted");
  if (slot.writes >= 2) throw ContractError("FaH slot " + std::to_string(target) + " rewritten twice");
  const FrameInterval future = fah_window(-tf, fah_);
  slot.feature = source.extract(raw_, {now_ + future.first, now_ + future.last});
  ++slot.writes;
  max_writes_ = std::max(max_writes_, slot.writes);
}

const FeatureSlot* StreamState::slot_at_offset(std::int64_t offset) const {
  const auto t = static_cast<std::int64_t>(slots_.size());
  if (offset > 0 || offset <= -t) throw ContractError("offset outside the history window");
  const std::int64_t time = now_ + offset;
  if (time < 0) return nullptr;
  const FeatureSlot& slot = slots_[static_cast<std::size_t>(time) % slots_.size()];
  return slot.time == time ? &slot : nullptr;
}

ObservedWindow StreamState::window() const {
  const std::size_t t = slots_.size();
  std::vector<double> values(t * feature_dim_, 0.0);
  ObservedWindow out;
  out.padding.assign(t, 1);
  for (std::size_t r = 0; r < t; ++r) {
    const auto offset = static_cast<std::int64_t>(r) - static_cast<std::int64_t>(t) + 1;
    const FeatureSlot* slot = slot_at_offset(offset);
    if (slot == nullptr) continue;
    std::copy(slot->feature.begin(), slot->feature.end(), values.begin() + static_cast<std::ptrdiff_t>(r * feature_dim_));
    out.padding[r] = 0;
  }
  out.features = Tensor(Shape{t, feature_dim_}, std::move(values));
  return out;
}

PredictionFrame predict_current(const StreamState& state, const ModelParams& params, const ModelConfig& config,
                                GateScores* gates) {
  if (state.now() < 0) throw ContractError("predict_current before the first frame");
  if (state.history_len() != config.history_len || state.feature_dim() != config.input_dim) {
    throw ShapeError("stream buffer geometry does not match the model config");
  }
  Tape::Pause no_recording;
  const ObservedWindow w = state.window();
  const ForwardOutput out = forward(w.features, w.padding, params, config);
  if (gates) *gates = out.gates;

  PredictionFrame frame;
  frame.time = state.now();
  const std::size_t cols = out.probs.cols();
  const auto row = out.probs.data().subspan((out.probs.rows() - 1) * cols, cols);
  frame.probs.assign(row.begin(), row.end());
  frame.predicted = static_cast<std::size_t>(std::max_element(frame.probs.begin(), frame.probs.end()) -
                                             frame.probs.begin());
  return frame;
}

OfflineFeatureBank::OfflineFeatureBank(const Tensor& raw_frames, FeatureSource& source, const FahConfig& fah)
    : fah_(fah), length_(raw_frames.rows()), feature_dim_(source.feature_dim()) {
  if (raw_frames.rank() != 2) throw ShapeError("raw frames must be [length, dim]");
  FrameStore store(raw_frames.cols());
  const std::size_t dim = raw_frames.cols();
  for (std::size_t i = 0; i < length_; ++i) store.push(raw_frames.data().subspan(i * dim, dim));

  past_.assign(length_ * feature_dim_, 0.0);
  future_.assign(length_ * feature_dim_, 0.0);
  const FrameInterval past = fah_window(0, fah_);
  const auto tf = static_cast<std::int64_t>(fah_.future_frames);
  for (std::size_t i = 0; i < length_; ++i) {
    const auto t = static_cast<std::int64_t>(i);
    const auto p = source.extract(store, {t + past.first, t + past.last});
    std::copy(p.begin(), p.end(), past_.begin() + static_cast<std::ptrdiff_t>(i * feature_dim_));
    if (fah_.enabled() && t + tf < static_cast<std::int64_t>(length_)) {
      const auto f = source.extract(store, {t, t + tf});
      std::copy(f.begin(), f.end(), future_.begin() + static_cast<std::ptrdiff_t>(i * feature_dim_));
    }
  }
}

std::span<const double> OfflineFeatureBank::feature_at(std::int64_t time, std::int64_t step) const {
  if (time < 0 || time > step || step >= static_cast<std::int64_t>(length_)) {
    throw ContractError("feature_at: frame " + std::to_string(time) + " is not observable at step " +
                        std::to_string(step));
  }
  const auto tf = static_cast<std::int64_t>(fah_.future_frames);
  const auto offset = static_cast<std::size_t>(time) * feature_dim_;
  if (fah_.enabled() && time <= step - tf) return std::span<const double>(future_).subspan(offset, feature_dim_);
  return std::span<const double>(past_).subspan(offset, feature_dim_);
}

void OfflineFeatureBank::fill_window(std::int64_t step, std::size_t history_len, std::span<double> features,
                                     std::span<std::uint8_t> padding) const {
  if (features.size() != history_len * feature_dim_ || padding.size() != history_len) {
    throw ShapeError("fill_window: output buffers have the wrong size");
  }
  for (std::size_t r = 0; r < history_len; ++r) {
    const std::int64_t time = step - static_cast<std::int64_t>(history_len) + 1 + static_cast<std::int64_t>(r);
    auto dst = features.subspan(r * feature_dim_, feature_dim_);
    if (time < 0) {
      std::fill(dst.begin(), dst.end(), 0.0);
      padding[r] = 1;
      continue;
    }
    const auto src = feature_at(time, step);
    std::copy(src.begin(), src.end(), dst.begin());
    padding[r] = 0;
  }
}

ObservedWindow OfflineFeatureBank::window_at(std::int64_t step, std::size_t history_len) const {
  std::vector<double> values(history_len * feature_dim_);
  ObservedWindow out;
  out.padding.resize(history_len);
  fill_window(step, history_len, values, out.padding);
  out.features = Tensor(Shape{history_len, feature_dim_}, std::move(values));
  return out;
}

}  // namespace gatehub
