#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gatehub/dataset_io.hpp"
#include "gatehub/experiment.hpp"
#include "gatehub/fah.hpp"
#include "gatehub/metrics.hpp"
#include "gatehub/model.hpp"
#include "gatehub/schedule.hpp"

namespace gatehub {

struct TrainLogEntry {
  std::int64_t step = 0;  // 1-based optimizer step
  std::size_t epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;
};

// A sequence with its per-frame features computed once for every streaming step.
struct PreparedSequence {
  std::vector<int> labels;
  std::vector<FrameTag> tags;
  OfflineFeatureBank bank;
};

std::vector<PreparedSequence> prepare_sequences(const std::vector<NamedSequence>& sequences,
                                                const ExperimentConfig& config);

// Optimizer steps a run with this config and this many training frames takes.
std::int64_t planned_steps(const ExperimentConfig& config, std::size_t train_frames);
ScheduleConfig schedule_for(const ExperimentConfig& config, std::int64_t total_steps);

// Differentiable mean loss over the present rows of the windows ending at
// `steps` (pairs of sequence index and step).
Tensor batch_loss(const std::vector<PreparedSequence>& data,
                  const std::vector<std::pair<std::size_t, std::int64_t>>& steps, const ModelParams& params,
                  const ExperimentConfig& config);

struct EvalOutput {
  std::vector<PredictionFrame> predictions;  // every step of every sequence, in order
  GateSamples gates;                         // every observed history slot at every step; empty without gating
  Evaluation evaluation;
};

// Current-frame predictions at every step, as a stream would produce them.
EvalOutput evaluate_model(const ModelParams& params, const ExperimentConfig& config,
                          const std::vector<PreparedSequence>& sequences);

struct TrainOptions {
  bool evaluate = true;
  std::function<void(const TrainLogEntry&)> on_step;
};

struct TrainResult {
  ModelParams params;
  std::vector<TrainLogEntry> log;
  double final_loss = 0.0;  // loss of the last optimizer step; NaN with zero steps
  std::optional<EvalOutput> eval;
  double seconds = 0.0;
};

// Deterministic in config.seed. Throws NumericError with the step, learning
// rate and last gradient norm when the loss stops being finite.
TrainResult train(const ExperimentConfig& config, const Dataset& dataset, const TrainOptions& options = {});

// Repeats one fixed batch of `batch_size` windows for `steps` steps at a
// constant learning rate; returns the loss after every step.
std::vector<double> overfit_single_batch(const ExperimentConfig& config, const Dataset& dataset, std::size_t steps,
                                         double lr);

// Columns: step,epoch,loss,lr,grad_norm.
std::string training_log_csv(const std::vector<TrainLogEntry>& log);

}  // namespace gatehub
