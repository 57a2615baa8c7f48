#include "gatehub/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "gatehub/errors.hpp"
#include "gatehub/init.hpp"

namespace gatehub {
namespace {

constexpr std::array<std::string_view, 5> kTagNames = {"plain_background", "trigger", "action", "hard_background",
                                                       "distractor"};

// Weight of the class direction mixed into a trigger frame.
constexpr double kTriggerClassMix = 0.5;

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(Vec& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

Vec gaussian(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(dim);
  for (double& x : v) x = normal(rng);
  return v;
}

// Orthonormal while the count fits in the dimension, unit-norm random beyond it.
std::vector<Vec> directions(std::size_t count, std::size_t dim, Rng& rng) {
  std::vector<Vec> out;
  while (out.size() < count) {
    Vec v = gaussian(dim, rng);
    if (out.size() < dim) {
      for (const Vec& u : out) {
        const double p = dot(v, u);
        for (std::size_t i = 0; i < dim; ++i) v[i] -= p * u[i];
      }
    }
    if (std::sqrt(dot(v, v)) < 1e-6) continue;
    normalize(v);
    out.push_back(std::move(v));
  }
  return out;
}

std::size_t uniform_size(std::size_t lo, std::size_t hi, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

void check_rate(double r, const char* name) {
  if (!(r >= 0.0 && r <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

std::string_view to_string(FrameTag tag) { return kTagNames.at(static_cast<std::size_t>(tag)); }

FrameTag parse_frame_tag(std::string_view name) {
  for (std::size_t i = 0; i < kTagNames.size(); ++i) {
    if (kTagNames[i] == name) return static_cast<FrameTag>(i);
  }
  throw FormatError("unknown frame tag '" + std::string(name) + "'");
}

void SynthConfig::validate() const {
  if (num_classes < 1) throw ConfigError("synthetic task needs at least one action class");
  if (feature_dim < 2) throw ConfigError("synthetic feature_dim must be at least 2");
  if (length < 1) throw ConfigError("synthetic sequence length must be positive");
  if (segment_min < 1 || segment_min > segment_max) throw ConfigError("invalid action segment length range");
  if (gap_min > gap_max) throw ConfigError("invalid background gap range");
  if (trigger_lag_min < 1 || trigger_lag_min > trigger_lag_max) throw ConfigError("invalid trigger_lag range");
  if (gap_min < trigger_lag_max) throw ConfigError("gap_min must be at least trigger_lag_max");
  check_rate(distractor_rate, "distractor_rate");
  check_rate(decoy_rate, "decoy_rate");
  check_rate(hard_background_rate, "hard_background_rate");
  if (distractor_rate + hard_background_rate > 1.0) {
    throw ConfigError("distractor_rate + hard_background_rate exceeds 1");
  }
  if (!(noise_std >= 0.0) || !(distractor_std >= 0.0) || !(class_signal >= 0.0) || !(trigger_scale >= 0.0)) {
    throw ConfigError("synthetic magnitudes must be nonnegative");
  }
}

SynthBasis synth_basis(const SynthConfig& config) {
  config.validate();
  Rng rng(config.basis_seed);
  auto dirs = directions(2 + 2 * config.num_classes, config.feature_dim, rng);
  SynthBasis basis;
  basis.background = dirs[0];
  basis.action = dirs[1];
  for (std::size_t c = 0; c < config.num_classes; ++c) {
    basis.class_dirs.push_back(dirs[2 + c]);
    basis.trigger_dirs.push_back(dirs[2 + config.num_classes + c]);
  }
  return basis;
}

std::vector<double> action_mean(const SynthBasis& basis, const SynthConfig& config, int c) {
  if (c < 1 || static_cast<std::size_t>(c) > basis.class_dirs.size()) throw ContractError("class out of range");
  Vec mean = basis.action;
  const Vec& k = basis.class_dirs[static_cast<std::size_t>(c - 1)];
  for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += config.class_signal * k[i];
  return mean;
}

SynthSequence generate(const SynthConfig& config) {
  const SynthBasis basis = synth_basis(config);
  const std::size_t len = config.length;
  const std::size_t dim = config.feature_dim;
  Rng rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_class = [&] { return static_cast<int>(uniform_size(1, config.num_classes, rng)); };

  SynthSequence seq;
  seq.labels.assign(len, 0);
  seq.tags.assign(len, FrameTag::kPlainBackground);
  std::vector<int> cls(len, 0);  // class an informative or hard frame refers to

  // Layout: alternating background gaps and action segments, each segment
  // announced by one trigger frame; the frames between trigger and action
  // stay plain so no other trigger-like frame intervenes.
  std::vector<bool> reserved(len, false);
  std::size_t pos = 0;
  while (pos < len) {
    const std::size_t gap = uniform_size(config.gap_min, config.gap_max, rng);
    const std::size_t seg = uniform_size(config.segment_min, config.segment_max, rng);
    const std::size_t lag = uniform_size(config.trigger_lag_min, config.trigger_lag_max, rng);
    const int c = random_class();
    const std::size_t start = pos + gap;
    if (start >= len) break;
    const std::size_t trig = start - lag;
    seq.tags[trig] = FrameTag::kTrigger;
    cls[trig] = c;
    for (std::size_t t = start - config.trigger_lag_max; t < start; ++t) reserved[t] = true;
    for (std::size_t t = start; t < std::min(len, start + seg); ++t) {
      seq.labels[t] = c;
      seq.tags[t] = FrameTag::kAction;
      cls[t] = c;
    }
    pos = start + seg;
  }
  for (std::size_t t = 0; t < len; ++t) {
    if (seq.tags[t] != FrameTag::kPlainBackground || reserved[t]) continue;
    const double u = unit(rng);
    if (u < config.distractor_rate) {
      seq.tags[t] = FrameTag::kDistractor;
      if (unit(rng) < config.decoy_rate) cls[t] = random_class();
    } else if (u < config.distractor_rate + config.hard_background_rate) {
      seq.tags[t] = FrameTag::kHardBackground;
      cls[t] = random_class();
    }
  }

  std::vector<double> values(len * dim);
  for (std::size_t t = 0; t < len; ++t) {
    double* row = values.data() + t * dim;
    double noise = config.noise_std;
    const int c = cls[t];
    switch (seq.tags[t]) {
      case FrameTag::kPlainBackground:
        for (std::size_t i = 0; i < dim; ++i) row[i] = basis.background[i];
        break;
      case FrameTag::kAction:
      case FrameTag::kHardBackground: {
        const Vec mean = action_mean(basis, config, c);
        for (std::size_t i = 0; i < dim; ++i) row[i] = mean[i];
        break;
      }
      case FrameTag::kTrigger:
        for (std::size_t i = 0; i < dim; ++i) {
          row[i] = config.trigger_scale * basis.trigger_dirs[static_cast<std::size_t>(c - 1)][i] +
                   kTriggerClassMix * basis.class_dirs[static_cast<std::size_t>(c - 1)][i];
        }
        break;
      case FrameTag::kDistractor:
        noise = config.distractor_std;
        for (std::size_t i = 0; i < dim; ++i) {
          row[i] = c > 0 ? config.trigger_scale * basis.trigger_dirs[static_cast<std::size_t>(c - 1)][i] +
                               kTriggerClassMix * basis.class_dirs[static_cast<std::size_t>(c - 1)][i]
                         : 0.0;
        }
        break;
    }
    if (noise > 0.0) {
      for (std::size_t i = 0; i < dim; ++i) row[i] += noise * normal(rng);
    }
  }
  seq.frames = Tensor(Shape{len, dim}, std::move(values));
  return seq;
}

}  // namespace gatehub
