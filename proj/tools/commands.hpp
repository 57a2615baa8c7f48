#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gatehub/experiment.hpp"

namespace gatehub::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kUsageError = 2;

struct CommonOptions {
  std::string config_path;             // canonical JSON; missing keys keep defaults
  std::vector<std::string> overrides;  // dotted.key=value, value parsed as JSON when possible
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out_dir;                 // falls back to $GATEHUB_OUT_DIR, then ./gatehub_out
};

// Layers: defaults (or `base`), config file, preset, seed, then --set overrides.
ExperimentConfig resolve_config(const CommonOptions& common, const ExperimentConfig& base = {});
std::filesystem::path output_dir(const CommonOptions& common);

struct GenDataOptions {
  CommonOptions common;
};
int run_gen_data(const GenDataOptions& options);

struct TrainOptions {
  CommonOptions common;
  std::string data_dir;  // generated from the config when empty
  bool quiet = false;
};
int run_train(const TrainOptions& options);

struct EvalOptions {
  CommonOptions common;
  std::string checkpoint;
  std::string data_dir;
};
int run_eval(const EvalOptions& options);

struct StreamOptions {
  CommonOptions common;
  std::string checkpoint;
  std::string input = "-";   // "-" reads stdin
  std::string output = "-";  // "-" writes stdout
};
int run_stream(const StreamOptions& options);

struct BenchOptions {
  CommonOptions common;
  std::size_t steps = 200;
};
int run_bench(const BenchOptions& options);

struct GradcheckOptions {
  std::uint64_t seed = 1;
  int op_trials = 100;
  int model_trials = 3;
};
int run_gradcheck(const GradcheckOptions& options);

struct AblateOptions {
  CommonOptions common;
  std::vector<std::string> presets = {"full", "no_ghu", "no_fah"};
  std::size_t seeds = 5;
};
int run_ablate(const AblateOptions& options);

}  // namespace gatehub::cli
