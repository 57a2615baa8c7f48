#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <vector>

#include "gatehub/dataset_io.hpp"
#include "gatehub/errors.hpp"
#include "gatehub/metrics.hpp"
#include "gatehub/synth.hpp"

namespace gatehub {
namespace {

TEST(Synth, SameSeedSameSequence) {
  SynthConfig c;
  c.length = 300;
  const SynthSequence a = generate(c);
  const SynthSequence b = generate(c);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.tags, b.tags);
  EXPECT_EQ(std::vector<double>(a.frames.data().begin(), a.frames.data().end()),
            std::vector<double>(b.frames.data().begin(), b.frames.data().end()));
  c.seed = 2;
  EXPECT_NE(generate(c).labels, a.labels);
}

TEST(Synth, ConfigErrors) {
  SynthConfig c;
  c.num_classes = 0;
  EXPECT_THROW(generate(c), ConfigError);
  c = SynthConfig{};
  c.feature_dim = 1;
  EXPECT_THROW(generate(c), ConfigError);
  c = SynthConfig{};
  c.distractor_rate = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SynthConfig{};
  c.gap_min = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_frame_tag(to_string(FrameTag::kHardBackground)), FrameTag::kHardBackground);
  EXPECT_THROW(parse_frame_tag("nope"), FormatError);
}

TEST(Synth, EverySegmentHasExactlyOneTriggerWithinLag) {
  SynthConfig c;
  c.length = 2000;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    c.seed = seed;
    const SynthSequence s = generate(c);
    for (std::size_t t = 0; t < s.length(); ++t) {
      const bool starts = s.labels[t] != 0 && (t == 0 || s.labels[t - 1] == 0);
      if (!starts) continue;
      std::size_t triggers = 0;
      for (std::size_t lag = 1; lag <= c.trigger_lag_max; ++lag) {
        if (s.tags[t - lag] == FrameTag::kTrigger) {
          ++triggers;
          EXPECT_GE(lag, c.trigger_lag_min);
        }
        EXPECT_NE(s.tags[t - lag], FrameTag::kDistractor);
      }
      EXPECT_EQ(triggers, 1u) << "segment at " << t;
    }
  }
}

TEST(Synth, ActionFractionMatchesSegmentStatistics) {
  SynthConfig c;
  c.length = 5000;
  std::size_t action = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    c.seed = seed;
    const SynthSequence s = generate(c);
    for (int l : s.labels) action += l != 0;
    total += s.length();
  }
  const double expected = 14.0 / 40.0;  // mean segment / (mean gap + mean segment)
  EXPECT_NEAR(static_cast<double>(action) / static_cast<double>(total), expected, 0.03);
}

TEST(Synth, BasisIsOrthonormal) {
  const SynthConfig c;
  const SynthBasis b = synth_basis(c);
  std::vector<std::vector<double>> all = {b.background, b.action};
  all.insert(all.end(), b.class_dirs.begin(), b.class_dirs.end());
  all.insert(all.end(), b.trigger_dirs.begin(), b.trigger_dirs.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < c.feature_dim; ++k) dot += all[i][k] * all[j][k];
      EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(Synth, NoiselessTaskIsLinearlySeparable) {
  SynthConfig c;
  c.length = 1500;
  c.distractor_rate = 0.0;
  c.hard_background_rate = 0.0;
  c.noise_std = 0.0;
  const SynthSequence s = generate(c);
  const auto n = static_cast<Eigen::Index>(s.length());
  const auto m = static_cast<Eigen::Index>(c.feature_dim);
  const auto k = static_cast<Eigen::Index>(c.num_classes + 1);
  Eigen::MatrixXd x(n, m + 1);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) x(i, j) = s.frames.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    x(i, m) = 1.0;
    y(i, s.labels[static_cast<std::size_t>(i)]) = 1.0;
  }
  const Eigen::MatrixXd w = x.completeOrthogonalDecomposition().solve(y);
  const Eigen::MatrixXd scores = x * w;
  std::vector<PredictionFrame> preds;
  for (Eigen::Index i = 0; i < n; ++i) {
    PredictionFrame f;
    f.time = i;
    f.label = s.labels[static_cast<std::size_t>(i)];
    // Softmax turns the probe outputs into a valid probability row.
    double z = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) z += std::exp(20.0 * scores(i, j));
    for (Eigen::Index j = 0; j < k; ++j) f.probs.push_back(std::exp(20.0 * scores(i, j)) / z);
    preds.push_back(f);
  }
  EXPECT_NEAR(evaluate(preds, c.num_classes).report.mean_ap, 1.0, 1e-12);
}

TEST(Dataset, SplitsShareBasisAndRoundTrip) {
  SynthConfig c;
  c.length = 120;
  const Dataset d = make_dataset(c, 2, 1);
  ASSERT_EQ(d.train.size(), 2u);
  ASSERT_EQ(d.eval.size(), 1u);
  EXPECT_EQ(d.train[1].seed, c.seed + 1);
  EXPECT_EQ(d.eval[0].seed, c.seed + 1000);

  const auto dir = std::filesystem::temp_directory_path() / "gatehub_synth_test_dataset";
  std::filesystem::remove_all(dir);
  save_dataset(dir, d);
  EXPECT_TRUE(std::filesystem::exists(dir / (d.train[0].name + ".csv")));
  const Dataset back = load_dataset(dir);
  EXPECT_EQ(back.synth, d.synth);
  ASSERT_EQ(back.train.size(), 2u);
  EXPECT_EQ(back.train[1].sequence.labels, d.train[1].sequence.labels);
  EXPECT_EQ(back.eval[0].sequence.tags, d.eval[0].sequence.tags);
  for (std::size_t i = 0; i < d.eval[0].sequence.frames.numel(); ++i) {
    EXPECT_EQ(back.eval[0].sequence.frames.data()[i], d.eval[0].sequence.frames.data()[i]);
  }
  std::filesystem::remove(dir / (d.eval[0].name + ".ghtb"));
  EXPECT_THROW(load_dataset(dir), FormatError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace gatehub
