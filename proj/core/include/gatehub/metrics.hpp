#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gatehub/prediction.hpp"
#include "gatehub/synth.hpp"

namespace gatehub {

// Frames are ranked by descending score; equal scores keep ascending index
// order. AP is the mean, over positives, of the precision at each positive's
// rank. Throws ContractError on length mismatch or when there is no positive.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> positives);

// As average_precision, with false positives down-weighted by
// w = negatives / positives. Needs at least one positive and one negative.
double calibrated_average_precision(std::span<const double> scores, std::span<const std::uint8_t> positives);
// Explicit weight; w = 1 reduces to average_precision.
double calibrated_average_precision(std::span<const double> scores, std::span<const std::uint8_t> positives,
                                    double w);

// Mann-Whitney estimate of P(score_pos > score_neg), ties counting one half.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> positives);

struct PrecisionRecallPoint {
  double threshold;
  double precision;
  double recall;
};
std::vector<PrecisionRecallPoint> precision_recall_curve(std::span<const double> scores,
                                                         std::span<const std::uint8_t> positives);

struct MetricReport {
  std::size_t num_classes = 0;
  std::size_t frames = 0;
  std::vector<std::size_t> positives;              // per action class, index 0 is class 1
  std::vector<std::optional<double>> class_ap;     // empty when the class has no positives
  std::vector<std::optional<double>> class_cap;
  double mean_ap = 0.0;   // over classes with a defined AP
  double mean_cap = 0.0;
  std::vector<std::string> warnings;
};

struct GateDiagnostics {
  double mean_informative = 0.0;  // trigger and action frames
  double mean_distractor = 0.0;
  double auc = 0.5;               // gates as a detector of informative vs distractor frames
  std::size_t informative_count = 0;
  std::size_t distractor_count = 0;
};

// Per-frame gate values paired with ground-truth tags.
struct GateSamples {
  std::vector<double> values;
  std::vector<FrameTag> tags;
};

struct Evaluation {
  MetricReport report;
  std::optional<GateDiagnostics> gates;
};

// Pools every frame; labels come from PredictionFrame::label, which must be
// set. Throws ContractError for misaligned probabilities or gate samples.
Evaluation evaluate(std::span<const PredictionFrame> preds, std::size_t num_classes,
                    const GateSamples* gates = nullptr);

GateDiagnostics gate_diagnostics(const GateSamples& gates);

std::string metric_report_json(const Evaluation& evaluation);

// Columns: class,threshold,precision,recall.
std::string precision_recall_csv(std::span<const PredictionFrame> preds, std::size_t num_classes);

}  // namespace gatehub
