#include "gatehub/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "gatehub/errors.hpp"
#include "gatehub/feature_source.hpp"
#include "gatehub/init.hpp"
#include "gatehub/objective.hpp"
#include "gatehub/ops.hpp"
#include "gatehub/optim.hpp"
#include "gatehub/tape.hpp"

namespace gatehub {
namespace {

using StepList = std::vector<std::pair<std::size_t, std::int64_t>>;

// Separates the batch-sampling stream from the parameter-init stream.
constexpr std::uint64_t kSamplingSalt = 0x5a17c0ffee;

StepList all_steps(const std::vector<PreparedSequence>& data) {
  StepList steps;
  for (std::size_t s = 0; s < data.size(); ++s) {
    for (std::size_t k = 0; k < data[s].labels.size(); ++k) steps.emplace_back(s, static_cast<std::int64_t>(k));
  }
  return steps;
}

std::size_t total_frames(const std::vector<NamedSequence>& sequences) {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.sequence.length();
  return n;
}

PredictionFrame last_row(const Tensor& probs, std::int64_t time, int label) {
  PredictionFrame frame;
  frame.time = time;
  frame.label = label;
  const std::size_t cols = probs.cols();
  const auto row = probs.data().subspan((probs.rows() - 1) * cols, cols);
  frame.probs.assign(row.begin(), row.end());
  frame.predicted = static_cast<std::size_t>(std::max_element(frame.probs.begin(), frame.probs.end()) -
                                             frame.probs.begin());
  return frame;
}

}  // namespace

std::vector<PreparedSequence> prepare_sequences(const std::vector<NamedSequence>& sequences,
                                                const ExperimentConfig& config) {
  std::vector<PreparedSequence> out;
  out.reserve(sequences.size());
  for (const NamedSequence& s : sequences) {
    const auto source = make_feature_source(config.feature_source, s.sequence.frames.cols());
    out.push_back({s.sequence.labels, s.sequence.tags, OfflineFeatureBank(s.sequence.frames, *source, config.fah)});
  }
  return out;
}

std::int64_t planned_steps(const ExperimentConfig& config, std::size_t train_frames) {
  const auto per_epoch = static_cast<std::int64_t>((train_frames + config.batch_size - 1) / config.batch_size);
  std::int64_t total = per_epoch * static_cast<std::int64_t>(config.epochs);
  if (config.max_steps > 0) total = std::min(total, static_cast<std::int64_t>(config.max_steps));
  return total;
}

ScheduleConfig schedule_for(const ExperimentConfig& config, std::int64_t total_steps) {
  ScheduleConfig s;
  s.total_steps = total_steps;
  s.peak_lr = config.peak_lr;
  return s;
}

Tensor batch_loss(const std::vector<PreparedSequence>& data, const StepList& steps, const ModelParams& params,
                  const ExperimentConfig& config) {
  const ModelConfig& m = config.model;
  std::vector<Tensor> probs;
  std::vector<int> targets;
  probs.reserve(steps.size());
  for (const auto& [s, k] : steps) {
    const PreparedSequence& seq = data.at(s);
    const ObservedWindow w = seq.bank.window_at(k, m.history_len);
    probs.push_back(forward(w.features, w.padding, params, m).probs);
    for (std::size_t r = 0; r < m.present_len; ++r) {
      const std::int64_t time = k - static_cast<std::int64_t>(m.present_len) + 1 + static_cast<std::int64_t>(r);
      targets.push_back(time < 0 ? -1 : seq.labels[static_cast<std::size_t>(time)]);
    }
  }
  return objective_loss(concat_rows(probs), targets, config.loss);
}

EvalOutput evaluate_model(const ModelParams& params, const ExperimentConfig& config,
                          const std::vector<PreparedSequence>& sequences) {
  const ModelConfig& m = config.model;
  Tape::Pause no_recording;
  EvalOutput out;
  for (const PreparedSequence& seq : sequences) {
    for (std::size_t k = 0; k < seq.labels.size(); ++k) {
      const auto step = static_cast<std::int64_t>(k);
      const ObservedWindow w = seq.bank.window_at(step, m.history_len);
      const ForwardOutput f = forward(w.features, w.padding, params, m);
      out.predictions.push_back(last_row(f.probs, step, seq.labels[k]));
      if (!f.gates.enabled()) continue;
      const std::size_t cols = f.gates.columns();
      const auto g = f.gates.values.data();
      for (std::size_t r = 0; r < f.gates.frames(); ++r) {
        if (w.padding[r]) continue;
        const std::int64_t time = step - static_cast<std::int64_t>(m.history_len) + 1 + static_cast<std::int64_t>(r);
        double v = 0.0;
        for (std::size_t c = 0; c < cols; ++c) v += g[r * cols + c];
        out.gates.values.push_back(v / static_cast<double>(cols));
        out.gates.tags.push_back(seq.tags[static_cast<std::size_t>(time)]);
      }
    }
  }
  out.evaluation = evaluate(out.predictions, m.num_classes, out.gates.values.empty() ? nullptr : &out.gates);
  return out;
}

TrainResult train(const ExperimentConfig& config, const Dataset& dataset, const TrainOptions& options) {
  config.validate();
  if (dataset.synth.feature_dim != config.synth.feature_dim) {
    throw ConfigError("dataset feature width does not match the experiment");
  }
  const auto started = std::chrono::steady_clock::now();
  const auto train_data = prepare_sequences(dataset.train, config);

  TrainResult result{ModelParams::init(config.model, config.seed), {}, std::nan(""), std::nullopt, 0.0};
  std::vector<Tensor> params = result.params.tensors();
  OptimState optim(params, config.adam);
  const std::int64_t total = planned_steps(config, total_frames(dataset.train));

  if (total > 0) {
    const ScheduleConfig schedule = schedule_for(config, total);
    Rng rng(config.seed ^ kSamplingSalt);
    StepList order = all_steps(train_data);
    std::size_t cursor = order.size();
    std::size_t epoch = 0;
    double last_norm = 0.0;
    for (std::int64_t step = 0; step < total; ++step) {
      StepList batch;
      while (batch.size() < config.batch_size) {
        if (cursor == order.size()) {
          std::shuffle(order.begin(), order.end(), rng);
          cursor = 0;
          ++epoch;
        }
        batch.push_back(order[cursor++]);
        if (cursor == order.size()) break;
      }
      const double lr = lr_at(step, schedule);
      result.params.zero_grad();
      Tape tape;
      double loss_value = 0.0;
      {
        Tape::Scope scope(tape);
        auto diverged = [&](const std::string& what) {
          return NumericError(what + " at step " + std::to_string(step + 1) + " (lr " + std::to_string(lr) +
                              ", previous grad norm " + std::to_string(last_norm) + ")");
        };
        Tensor loss;
        try {
          loss = batch_loss(train_data, batch, result.params, config);
        } catch (const NumericError& e) {
          throw diverged(e.what());
        }
        loss_value = loss.item();
        if (!std::isfinite(loss_value)) throw diverged("training loss is " + std::to_string(loss_value));
        tape.backward(loss);
      }
      last_norm = opt_step(params, optim, lr);
      result.final_loss = loss_value;
      TrainLogEntry entry{step + 1, epoch, loss_value, lr, last_norm};
      result.log.push_back(entry);
      if (options.on_step) options.on_step(entry);
    }
  }

  if (options.evaluate) {
    const auto eval_data = prepare_sequences(dataset.eval, config);
    result.eval = evaluate_model(result.params, config, eval_data);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::vector<double> overfit_single_batch(const ExperimentConfig& config, const Dataset& dataset, std::size_t steps,
                                         double lr) {
  config.validate();
  const auto train_data = prepare_sequences(dataset.train, config);
  StepList batch = all_steps(train_data);
  Rng rng(config.seed ^ kSamplingSalt);
  std::shuffle(batch.begin(), batch.end(), rng);
  batch.resize(std::min(batch.size(), config.batch_size));

  ModelParams model = ModelParams::init(config.model, config.seed);
  std::vector<Tensor> params = model.tensors();
  OptimState optim(params, config.adam);
  std::vector<double> losses;
  for (std::size_t i = 0; i < steps; ++i) {
    model.zero_grad();
    Tape tape;
    Tape::Scope scope(tape);
    const Tensor loss = batch_loss(train_data, batch, model, config);
    tape.backward(loss);
    opt_step(params, optim, lr);
    losses.push_back(loss.item());
  }
  return losses;
}

std::string training_log_csv(const std::vector<TrainLogEntry>& log) {
  std::ostringstream out;
  out << "step,epoch,loss,lr,grad_norm\n";
  char buf[160];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%lld,%zu,%.10g,%.10g,%.10g\n", static_cast<long long>(e.step), e.epoch, e.loss,
                  e.lr, e.grad_norm);
    out << buf;
  }
  return out.str();
}

}  // namespace gatehub
