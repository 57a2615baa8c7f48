#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gatehub/experiment.hpp"
#include "gatehub/trainer.hpp"

namespace gatehub {

struct SeedRun {
  std::uint64_t seed = 0;
  double map = 0.0;
  double mcap = 0.0;
  std::optional<double> gate_auc;
  double final_loss = 0.0;
  double seconds = 0.0;
};

struct AblationRow {
  std::string preset;
  std::size_t parameter_count = 0;
  std::vector<SeedRun> runs;

  double mean_map() const;
  double std_map() const;  // population standard deviation
  double mean_mcap() const;
  double std_mcap() const;
  // Over the runs that report a gate AUC; nullopt when none do.
  std::optional<double> mean_gate_auc() const;
};

struct AblationOptions {
  std::size_t seeds = 5;
  std::uint64_t first_seed = 1;
  std::function<void(const std::string& preset, const SeedRun& run)> on_run;
};

// Trains every preset once per seed on one shared dataset built from base.synth.
std::vector<AblationRow> run_ablation(const ExperimentConfig& base, const std::vector<std::string>& presets,
                                      const AblationOptions& options = {});

std::string ablation_json(const std::vector<AblationRow>& rows);
// Columns: preset,params,seeds,map_mean,map_std,mcap_mean,mcap_std,gate_auc_mean.
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace gatehub
