#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "gatehub/ablation.hpp"
#include "gatehub/checkpoint.hpp"
#include "gatehub/dataset_io.hpp"
#include "gatehub/errors.hpp"
#include "gatehub/fah.hpp"
#include "gatehub/feature_source.hpp"
#include "gatehub/gradcheck.hpp"
#include "gatehub/metrics.hpp"
#include "gatehub/stream_io.hpp"
#include "gatehub/trainer.hpp"

namespace gatehub::cli {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kExperimentFile = "experiment.json";

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << text;
  if (!out) throw FormatError("cannot write " + path.string());
}

void apply_override(Json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  Json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
}

// The experiment a checkpoint was trained with, when it was saved alongside.
ExperimentConfig checkpoint_experiment(const fs::path& checkpoint) {
  ExperimentConfig base;
  if (fs::exists(checkpoint / kExperimentFile)) {
    base = experiment_config_from_json(read_file(checkpoint / kExperimentFile));
  } else {
    base.model = checkpoint_config(checkpoint);
  }
  return base;
}

Dataset dataset_for(const ExperimentConfig& config, const std::string& data_dir) {
  if (!data_dir.empty()) return load_dataset(data_dir);
  return make_dataset(config.synth, config.train_sequences, config.eval_sequences, ExperimentConfig::kEvalSeedOffset);
}

std::string stream_file(const SynthSequence& seq) {
  std::string out = "# time,features\n";
  const std::size_t dim = seq.frames.cols();
  for (std::size_t t = 0; t < seq.length(); ++t) {
    StreamRecord rec;
    rec.time = static_cast<std::int64_t>(t);
    const auto row = seq.frames.data().subspan(t * dim, dim);
    rec.frame.assign(row.begin(), row.end());
    out += format_stream_record(rec) + "\n";
  }
  return out;
}

std::string predictions_csv(const std::vector<PredictionFrame>& preds, std::size_t outputs) {
  std::string out = "time";
  for (std::size_t c = 0; c < outputs; ++c) out += ",p" + std::to_string(c);
  out += ",argmax,label\n";
  char buf[40];
  for (const auto& p : preds) {
    out += std::to_string(p.time);
    for (double v : p.probs) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out += buf;
    }
    out += "," + std::to_string(p.predicted) + "," + std::to_string(p.label) + "\n";
  }
  return out;
}

void write_evaluation(const fs::path& dir, const EvalOutput& eval, std::size_t num_classes) {
  write_file(dir / "metrics.json", metric_report_json(eval.evaluation) + "\n");
  write_file(dir / "pr_curves.csv", precision_recall_csv(eval.predictions, num_classes));
  write_file(dir / "predictions.csv", predictions_csv(eval.predictions, num_classes + 1));
}

bool report_in_range(const MetricReport& r) {
  auto ok = [](double v) { return v >= 0.0 && v <= 1.0; };
  return ok(r.mean_ap) && ok(r.mean_cap);
}

void print_report(const Evaluation& ev) {
  std::printf("mAP %.4f  mcAP %.4f  frames %zu\n", ev.report.mean_ap, ev.report.mean_cap, ev.report.frames);
  if (ev.gates) {
    std::printf("gate mean informative %.4f  distractor %.4f  AUC %.4f\n", ev.gates->mean_informative,
                ev.gates->mean_distractor, ev.gates->auc);
  }
  for (const auto& w : ev.report.warnings) std::printf("warning: %s\n", w.c_str());
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::lround(q * static_cast<double>(v.size() - 1)));
  return v[idx];
}

}  // namespace

ExperimentConfig resolve_config(const CommonOptions& common, const ExperimentConfig& base) {
  ExperimentConfig config = base;
  if (!common.config_path.empty()) config = experiment_config_from_json(read_file(common.config_path), config);
  if (!common.preset.empty()) config = apply_preset(config, common.preset);
  if (common.seed) config.seed = *common.seed;
  if (!common.overrides.empty()) {
    Json root = Json::parse(to_json(config));
    for (const auto& o : common.overrides) apply_override(root, o);
    config = experiment_config_from_json(root.dump());
  }
  config.validate();
  return config;
}

fs::path output_dir(const CommonOptions& common) {
  if (!common.out_dir.empty()) return common.out_dir;
  if (const char* env = std::getenv("GATEHUB_OUT_DIR"); env && *env) return env;
  return "gatehub_out";
}

int run_gen_data(const GenDataOptions& options) {
  const ExperimentConfig config = resolve_config(options.common);
  const fs::path dir = output_dir(options.common) / "data";
  const Dataset dataset = dataset_for(config, "");
  save_dataset(dir, dataset);
  for (const auto& s : dataset.eval) write_file(dir / (s.name + ".stream.csv"), stream_file(s.sequence));
  std::printf("wrote %zu train and %zu eval sequences to %s\n", dataset.train.size(), dataset.eval.size(),
              dir.string().c_str());
  return kOk;
}

int run_train(const TrainOptions& options) {
  const ExperimentConfig config = resolve_config(options.common);
  const fs::path dir = output_dir(options.common);
  const Dataset dataset = dataset_for(config, options.data_dir);
  const std::int64_t total = planned_steps(config, [&] {
    std::size_t n = 0;
    for (const auto& s : dataset.train) n += s.sequence.length();
    return n;
  }());
  gatehub::TrainOptions train_options;
  if (!options.quiet) {
    const std::int64_t every = std::max<std::int64_t>(1, total / 20);
    train_options.on_step = [every, total](const TrainLogEntry& e) {
      if (e.step % every == 0 || e.step == total) {
        std::printf("step %lld/%lld  epoch %zu  loss %.5f  lr %.3g  grad_norm %.4f\n", static_cast<long long>(e.step),
                    static_cast<long long>(total), e.epoch, e.loss, e.lr, e.grad_norm);
        std::fflush(stdout);
      }
    };
  }
  const TrainResult result = train(config, dataset, train_options);

  save_checkpoint(dir / "checkpoint", result.params, config.model);
  write_file(dir / "checkpoint" / kExperimentFile, to_json(config) + "\n");
  write_file(dir / "train_log.csv", training_log_csv(result.log));
  write_evaluation(dir, *result.eval, config.model.num_classes);
  print_report(result.eval->evaluation);
  std::printf("trained %zu steps in %.1f s; outputs in %s\n", result.log.size(), result.seconds,
              dir.string().c_str());

  const bool finite = std::all_of(result.log.begin(), result.log.end(),
                                  [](const TrainLogEntry& e) { return std::isfinite(e.grad_norm); });
  return finite && report_in_range(result.eval->evaluation.report) ? kOk : kCheckFailed;
}

int run_eval(const EvalOptions& options) {
  if (options.checkpoint.empty()) throw ConfigError("eval needs --checkpoint");
  const ExperimentConfig config = resolve_config(options.common, checkpoint_experiment(options.checkpoint));
  const ModelParams params = load_checkpoint(options.checkpoint, config.model);
  const Dataset dataset = dataset_for(config, options.data_dir);
  const auto eval = evaluate_model(params, config, prepare_sequences(dataset.eval, config));
  const fs::path dir = output_dir(options.common);
  write_evaluation(dir, eval, config.model.num_classes);
  print_report(eval.evaluation);
  return report_in_range(eval.evaluation.report) ? kOk : kCheckFailed;
}

int run_stream(const StreamOptions& options) {
  if (options.checkpoint.empty()) throw ConfigError("stream needs --checkpoint");
  const ExperimentConfig config = resolve_config(options.common, checkpoint_experiment(options.checkpoint));
  const ModelParams params = load_checkpoint(options.checkpoint, config.model);
  const auto source = make_feature_source(config.feature_source, config.synth.feature_dim);
  StreamState state(config.model.history_len, config.fah, config.synth.feature_dim, source->feature_dim());

  std::ifstream file_in;
  std::istream* in = &std::cin;
  if (options.input != "-") {
    file_in.open(options.input);
    if (!file_in) throw ConfigError("cannot read " + options.input);
    in = &file_in;
  }
  std::ofstream file_out;
  std::ostream* out = &std::cout;
  if (options.output != "-") {
    file_out.open(options.output);
    if (!file_out) throw ConfigError("cannot write " + options.output);
    out = &file_out;
  }

  std::string line;
  while (std::getline(*in, line)) {
    const auto record = parse_stream_record(line);
    if (!record) continue;
    if (record->frame.size() != config.synth.feature_dim) {
      throw ShapeError("frame " + std::to_string(record->time) + " has " + std::to_string(record->frame.size()) +
                       " values, expected " + std::to_string(config.synth.feature_dim));
    }
    const auto start = std::chrono::steady_clock::now();
    state.step(record->time, record->frame, *source);
    const PredictionFrame frame = predict_current(state, params, config.model);
    const double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
    *out << format_prediction_record(frame, us) << '\n';
  }
  out->flush();
  return state.max_writes() <= 2 ? kOk : kCheckFailed;
}

int run_bench(const BenchOptions& options) {
  const ExperimentConfig config = resolve_config(options.common);
  if (options.steps < 1) throw ConfigError("bench needs at least one step");
  const ModelParams params = ModelParams::init(config.model, config.seed);
  const auto source = make_feature_source(config.feature_source, config.synth.feature_dim);
  SynthConfig synth = config.synth;
  synth.length = options.steps;
  const SynthSequence seq = generate(synth);
  StreamState state(config.model.history_len, config.fah, synth.feature_dim, source->feature_dim());

  std::vector<double> latencies;
  const std::size_t warm = std::min(options.steps / 2, config.fah.future_frames + 1);
  const std::size_t dim = synth.feature_dim;
  std::uint64_t steady_calls_start = 0;
  for (std::size_t t = 0; t < options.steps; ++t) {
    if (t == warm) steady_calls_start = source->invocations();
    const auto start = std::chrono::steady_clock::now();
    state.step(static_cast<std::int64_t>(t), seq.frames.data().subspan(t * dim, dim), *source);
    predict_current(state, params, config.model);
    latencies.push_back(std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count());
  }
  const double steady_steps = static_cast<double>(options.steps - warm);
  const double calls_per_step = static_cast<double>(source->invocations() - steady_calls_start) / steady_steps;
  double mean = 0.0;
  for (double l : latencies) mean += l;
  mean /= static_cast<double>(latencies.size());

  Json report{{"model", Json::parse(to_json(config.model))},
              {"feature_source", config.feature_source},
              {"future_frames", config.fah.future_frames},
              {"parameter_count", params.parameter_count()},
              {"steps", options.steps},
              {"steady_state_from_step", warm},
              {"extractor_invocations_per_step", calls_per_step},
              {"latency_us", {{"mean", mean}, {"p50", percentile(latencies, 0.5)}, {"p95", percentile(latencies, 0.95)}}},
              {"model_fps", 1e6 / mean},
              {"reference_published_model",
               {{"parameters_millions", 45.2}, {"gflops", 6.98}, {"model_fps", 71.2}, {"note", "context only"}}}};
  const std::string text = report.dump(2);
  write_file(output_dir(options.common) / "bench.json", text + "\n");
  std::printf("%s\n", text.c_str());
  const double expected = config.fah.enabled() ? 2.0 : 1.0;
  return calls_per_step == expected ? kOk : kCheckFailed;
}

int run_gradcheck(const GradcheckOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto results = run_gradcheck_suite(options.seed, options.op_trials, options.model_trials);
  bool all = true;
  double worst = 0.0;
  for (const auto& r : results) {
    std::printf("%-40s trials %4d  max_rel_err %.3e  %s\n", r.name.c_str(), r.trials, r.max_relative_error,
                r.passed() ? "PASS" : "FAIL");
    all = all && r.passed();
    worst = std::max(worst, r.max_relative_error);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("overall max_rel_err %.3e (tolerance %.0e) in %.1f s: %s\n", worst, kGradcheckTolerance, seconds,
              all ? "PASS" : "FAIL");
  return all ? kOk : kCheckFailed;
}

int run_ablate(const AblateOptions& options) {
  const ExperimentConfig config = resolve_config(options.common);
  AblationOptions ablation;
  ablation.seeds = options.seeds;
  ablation.first_seed = config.seed;
  ablation.on_run = [](const std::string& preset, const SeedRun& run) {
    std::printf("%-34s seed %llu  mAP %.4f  mcAP %.4f  %.1f s\n", preset.c_str(),
                static_cast<unsigned long long>(run.seed), run.map, run.mcap, run.seconds);
    std::fflush(stdout);
  };
  const auto rows = run_ablation(config, options.presets, ablation);
  const fs::path dir = output_dir(options.common);
  write_file(dir / "ablation.json", ablation_json(rows) + "\n");
  const std::string csv = ablation_csv(rows);
  write_file(dir / "ablation.csv", csv);
  std::printf("%s", csv.c_str());
  return kOk;
}

}  // namespace gatehub::cli
