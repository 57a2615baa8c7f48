#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "gatehub/tensor.hpp"

namespace gatehub {

// Inclusive range of absolute frame indices.
struct FrameInterval {
  std::int64_t first = 0;
  std::int64_t last = 0;

  std::int64_t length() const { return last - first + 1; }
  friend bool operator==(const FrameInterval&, const FrameInterval&) = default;
  friend auto operator<=>(const FrameInterval&, const FrameInterval&) = default;
};

// Raw frames addressed by absolute index. With a nonzero capacity only the
// newest `capacity` frames are retained.
class FrameStore {
 public:
  explicit FrameStore(std::size_t frame_dim, std::size_t capacity = 0);

  void push(std::span<const double> frame);

  std::size_t frame_dim() const { return frame_dim_; }
  bool empty() const { return count_ == 0; }
  // Index of the newest frame, or -1 when empty.
  std::int64_t newest() const { return static_cast<std::int64_t>(count_) - 1; }
  std::int64_t oldest_retained() const;
  std::span<const double> frame(std::int64_t index) const;

 private:
  std::size_t frame_dim_;
  std::size_t capacity_;
  std::size_t count_ = 0;
  std::deque<std::vector<double>> frames_;
};

// The backbone u: maps a window of raw frames to one feature vector. Windows
// are clamped to [0, newest] before extraction.
class FeatureSource {
 public:
  virtual ~FeatureSource() = default;

  virtual std::size_t feature_dim() const = 0;
  virtual std::string_view kind() const = 0;

  std::vector<double> extract(const FrameStore& frames, FrameInterval window);

  std::uint64_t invocations() const { return invocations_.load(); }
  void reset_invocations() { invocations_.store(0); }

 protected:
  virtual std::vector<double> do_extract(const FrameStore& frames, FrameInterval window) = 0;

 private:
  std::atomic<std::uint64_t> invocations_{0};
};

// Mean of the raw frames in the window.
class WindowMeanSource final : public FeatureSource {
 public:
  explicit WindowMeanSource(std::size_t frame_dim) : frame_dim_(frame_dim) {}
  std::size_t feature_dim() const override { return frame_dim_; }
  std::string_view kind() const override { return "window_mean"; }

 protected:
  std::vector<double> do_extract(const FrameStore& frames, FrameInterval window) override;

 private:
  std::size_t frame_dim_;
};

// Two temporal resolutions concatenated: the mean of the last `short_len`
// frames of the window at stride 1, then the mean of frames sampled at
// `long_stride` back from the window's end across a `long_span`-frame span.
// Both parts stay inside the window.
class DualRateSource final : public FeatureSource {
 public:
  explicit DualRateSource(std::size_t frame_dim, std::size_t short_len = 4, std::size_t long_span = 8,
                          std::size_t long_stride = 2);
  std::size_t feature_dim() const override { return 2 * frame_dim_; }
  std::string_view kind() const override { return "dual_rate"; }

 protected:
  std::vector<double> do_extract(const FrameStore& frames, FrameInterval window) override;

 private:
  std::size_t frame_dim_;
  std::size_t short_len_;
  std::size_t long_span_;
  std::size_t long_stride_;
};

// Replays features stored per window; a window never recorded is an error.
class RecordedSource final : public FeatureSource {
 public:
  explicit RecordedSource(std::size_t feature_dim) : feature_dim_(feature_dim) {}
  std::size_t feature_dim() const override { return feature_dim_; }
  std::string_view kind() const override { return "recorded"; }

  void record(FrameInterval window, std::vector<double> feature);
  std::size_t size() const { return table_.size(); }

 protected:
  std::vector<double> do_extract(const FrameStore& frames, FrameInterval window) override;

 private:
  std::size_t feature_dim_;
  std::map<FrameInterval, std::vector<double>> table_;
};

// Forwards to another source and copies every result into a RecordedSource.
class RecordingSource final : public FeatureSource {
 public:
  RecordingSource(FeatureSource& inner, RecordedSource& sink) : inner_(inner), sink_(sink) {}
  std::size_t feature_dim() const override { return inner_.feature_dim(); }
  std::string_view kind() const override { return inner_.kind(); }

 protected:
  std::vector<double> do_extract(const FrameStore& frames, FrameInterval window) override;

 private:
  FeatureSource& inner_;
  RecordedSource& sink_;
};

// "window_mean" or "dual_rate" over raw frames of width `frame_dim`.
std::unique_ptr<FeatureSource> make_feature_source(std::string_view kind, std::size_t frame_dim);

}  // namespace gatehub
