#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "gatehub/errors.hpp"
#include "gatehub/experiment.hpp"

namespace {

void add_common(CLI::App* cmd, gatehub::cli::CommonOptions& common) {
  cmd->add_option("-c,--config", common.config_path, "Experiment config (canonical JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--set", common.overrides, "Override a config field, e.g. --set model.gate_mode=disabled");
  cmd->add_option("--preset", common.preset, "Ablation preset applied on top of the config");
  cmd->add_option("--seed", common.seed, "Seed for parameter init and batch sampling");
  cmd->add_option("-o,--out", common.out_dir, "Output directory (default: $GATEHUB_OUT_DIR or ./gatehub_out)");
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = gatehub::cli;
  CLI::App app{"GateHUB online action detection: training, evaluation and streaming inference"};
  app.require_subcommand(1);

  cli::GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate the synthetic trigger-lag dataset");
  add_common(gen_cmd, gen.common);

  cli::TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a model and evaluate it on the held-out split");
  add_common(train_cmd, train.common);
  train_cmd->add_option("--data", train.data_dir, "Dataset directory written by gen-data");
  train_cmd->add_flag("-q,--quiet", train.quiet, "Suppress per-step progress");

  cli::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the held-out split");
  add_common(eval_cmd, eval.common);
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint directory")->required();
  eval_cmd->add_option("--data", eval.data_dir, "Dataset directory written by gen-data");

  cli::StreamOptions stream;
  auto* stream_cmd = app.add_subcommand("stream", "Per-frame online prediction over a frame stream");
  add_common(stream_cmd, stream.common);
  stream_cmd->add_option("--checkpoint", stream.checkpoint, "Checkpoint directory")->required();
  stream_cmd->add_option("-i,--input", stream.input, "Frame stream file, '-' for stdin");
  stream_cmd->add_option("--output", stream.output, "Prediction output file, '-' for stdout");

  cli::BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Per-step streaming latency and extractor calls");
  add_common(bench_cmd, bench.common);
  bench_cmd->add_option("--steps", bench.steps, "Stream length");

  cli::GradcheckOptions grad;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  grad_cmd->add_option("--seed", grad.seed, "Seed for the random cases");
  grad_cmd->add_option("--op-trials", grad.op_trials, "Random cases per tensor op");
  grad_cmd->add_option("--model-trials", grad.model_trials, "Random cases per model-level check");

  cli::AblateOptions ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Train a preset grid over several seeds");
  add_common(ablate_cmd, ablate.common);
  ablate_cmd->add_option("--presets", ablate.presets, "Presets to compare")->delimiter(',');
  ablate_cmd->add_option("--seeds", ablate.seeds, "Seeds per preset");
  ablate_cmd->add_flag_callback(
      "--list-presets",
      [] {
        for (const auto& p : gatehub::preset_names()) std::printf("%s\n", p.c_str());
        throw CLI::Success();
      },
      "Print the preset names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kOk : cli::kUsageError;
  }

  try {
    if (*gen_cmd) return cli::run_gen_data(gen);
    if (*train_cmd) return cli::run_train(train);
    if (*eval_cmd) return cli::run_eval(eval);
    if (*stream_cmd) return cli::run_stream(stream);
    if (*bench_cmd) return cli::run_bench(bench);
    if (*grad_cmd) return cli::run_gradcheck(grad);
    if (*ablate_cmd) return cli::run_ablate(ablate);
  } catch (const gatehub::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return cli::kUsageError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cli::kCheckFailed;
  }
  return cli::kUsageError;
}
