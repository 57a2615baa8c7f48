#include "gatehub/feature_source.hpp"

#include <algorithm>
#include <string>

#include "gatehub/errors.hpp"

namespace gatehub {

FrameStore::FrameStore(std::size_t frame_dim, std::size_t capacity) : frame_dim_(frame_dim), capacity_(capacity) {
  if (frame_dim == 0) throw ConfigError("frame dimension must be positive");
}

void FrameStore::push(std::span<const double> frame) {
  if (frame.size() != frame_dim_) {
    throw ShapeError("raw frame has " + std::to_string(frame.size()) + " values, expected " +
                     std::to_string(frame_dim_));
  }
  frames_.emplace_back(frame.begin(), frame.end());
  if (capacity_ > 0 && frames_.size() > capacity_) frames_.pop_front();
  ++count_;
}

std::int64_t FrameStore::oldest_retained() const {
  return static_cast<std::int64_t>(count_) - static_cast<std::int64_t>(frames_.size());
}

std::span<const double> FrameStore::frame(std::int64_t index) const {
  if (index < oldest_retained() || index > newest()) {
    throw ContractError("raw frame " + std::to_string(index) + " is not available");
  }
  return frames_[static_cast<std::size_t>(index - oldest_retained())];
}

std::vector<double> FeatureSource::extract(const FrameStore& frames, FrameInterval window) {
  if (frames.empty()) throw ContractError("feature extraction before any frame arrived");
  window.first = std::max<std::int64_t>(window.first, 0);
  window.last = std::min(window.last, frames.newest());
  if (window.first > window.last) throw ContractError("feature window is empty after clamping");
  invocations_.fetch_add(1);
  return do_extract(frames, window);
}

namespace {

void accumulate_mean(const FrameStore& frames, std::span<const std::int64_t> indices, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::int64_t i : indices) {
    const auto f = frames.frame(i);
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += f[d];
  }
  const double n = static_cast<double>(indices.size());
  for (double& v : out) v /= n;
}

}  // namespace

std::vector<double> WindowMeanSource::do_extract(const FrameStore& frames, FrameInterval window) {
  std::vector<std::int64_t> indices;
  for (std::int64_t i = window.first; i <= window.last; ++i) indices.push_back(i);
  std::vector<double> out(frame_dim_);
  accumulate_mean(frames, indices, out);
  return out;
}

DualRateSource::DualRateSource(std::size_t frame_dim, std::size_t short_len, std::size_t long_span,
                               std::size_t long_stride)
    : frame_dim_(frame_dim), short_len_(short_len), long_span_(long_span), long_stride_(long_stride) {
  if (short_len == 0 || long_span == 0 || long_stride == 0) throw ConfigError("dual_rate windows must be positive");
}

std::vector<double> DualRateSource::do_extract(const FrameStore& frames, FrameInterval window) {
  std::vector<std::int64_t> dense;
  const auto short_first = std::max(window.first, window.last - static_cast<std::int64_t>(short_len_) + 1);
  for (std::int64_t i = short_first; i <= window.last; ++i) dense.push_back(i);

  std::vector<std::int64_t> sparse;
  const auto long_first = std::max(window.first, window.last - static_cast<std::int64_t>(long_span_) + 1);
  for (std::int64_t i = window.last; i >= long_first; i -= static_cast<std::int64_t>(long_stride_)) {
    sparse.push_back(i);
  }

  std::vector<double> out(2 * frame_dim_);
  accumulate_mean(frames, dense, std::span<double>(out).first(frame_dim_));
  accumulate_mean(frames, sparse, std::span<double>(out).subspan(frame_dim_));
  return out;
}

void RecordedSource::record(FrameInterval window, std::vector<double> feature) {
  if (feature.size() != feature_dim_) throw ShapeError("recorded feature has the wrong width");
  table_[window] = std::move(feature);
}

std::vector<double> RecordedSource::do_extract(const FrameStore&, FrameInterval window) {
  auto it = table_.find(window);
  if (it == table_.end()) {
    throw ContractError("no recorded feature for window [" + std::to_string(window.first) + ", " +
                        std::to_string(window.last) + "]");
  }
  return it->second;
}

std::vector<double> RecordingSource::do_extract(const FrameStore& frames, FrameInterval window) {
  auto feature = inner_.extract(frames, window);
  sink_.record(window, feature);
  return feature;
}

std::unique_ptr<FeatureSource> make_feature_source(std::string_view kind, std::size_t frame_dim) {
  if (kind == "window_mean") return std::make_unique<WindowMeanSource>(frame_dim);
  if (kind == "dual_rate") return std::make_unique<DualRateSource>(frame_dim);
  throw ConfigError("unknown feature source '" + std::string(kind) + "'");
}

}  // namespace gatehub
