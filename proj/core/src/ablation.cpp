#include "gatehub/ablation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "gatehub/dataset_io.hpp"
#include "gatehub/errors.hpp"

namespace gatehub {
namespace {

template <typename Get>
double mean_of(const std::vector<SeedRun>& runs, Get get) {
  if (runs.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : runs) s += get(r);
  return s / static_cast<double>(runs.size());
}

template <typename Get>
double std_of(const std::vector<SeedRun>& runs, Get get) {
  if (runs.empty()) return 0.0;
  const double m = mean_of(runs, get);
  double s = 0.0;
  for (const auto& r : runs) s += (get(r) - m) * (get(r) - m);
  return std::sqrt(s / static_cast<double>(runs.size()));
}

}  // namespace

double AblationRow::mean_map() const { return mean_of(runs, [](const SeedRun& r) { return r.map; }); }
double AblationRow::std_map() const { return std_of(runs, [](const SeedRun& r) { return r.map; }); }
double AblationRow::mean_mcap() const { return mean_of(runs, [](const SeedRun& r) { return r.mcap; }); }
double AblationRow::std_mcap() const { return std_of(runs, [](const SeedRun& r) { return r.mcap; }); }

std::optional<double> AblationRow::mean_gate_auc() const {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : runs) {
    if (!r.gate_auc) continue;
    s += *r.gate_auc;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& base, const std::vector<std::string>& presets,
                                      const AblationOptions& options) {
  if (presets.empty()) throw ConfigError("ablation grid is empty");
  if (options.seeds < 1) throw ConfigError("ablation needs at least one seed");
  std::vector<ExperimentConfig> configs;
  for (const auto& name : presets) {
    configs.push_back(apply_preset(base, name));
    configs.back().validate();
  }
  const Dataset dataset = make_dataset(base.synth, base.train_sequences, base.eval_sequences,
                                       ExperimentConfig::kEvalSeedOffset);

  std::vector<AblationRow> rows;
  for (const ExperimentConfig& preset_config : configs) {
    AblationRow row;
    row.preset = preset_config.preset;
    row.parameter_count = ModelParams::init(preset_config.model, 0).parameter_count();
    for (std::size_t i = 0; i < options.seeds; ++i) {
      ExperimentConfig c = preset_config;
      c.seed = options.first_seed + i;
      const TrainResult result = train(c, dataset);
      SeedRun run;
      run.seed = c.seed;
      run.map = result.eval->evaluation.report.mean_ap;
      run.mcap = result.eval->evaluation.report.mean_cap;
      if (result.eval->evaluation.gates) run.gate_auc = result.eval->evaluation.gates->auc;
      run.final_loss = result.final_loss;
      run.seconds = result.seconds;
      if (options.on_run) options.on_run(row.preset, run);
      row.runs.push_back(run);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_json(const std::vector<AblationRow>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const auto& r : row.runs) {
      runs.push_back({{"seed", r.seed},
                      {"mAP", r.map},
                      {"mcAP", r.mcap},
                      {"gate_auc", r.gate_auc ? nlohmann::ordered_json(*r.gate_auc) : nlohmann::ordered_json(nullptr)},
                      {"final_loss", r.final_loss},
                      {"seconds", r.seconds}});
    }
    const auto auc = row.mean_gate_auc();
    out.push_back({{"preset", row.preset},
                   {"parameter_count", row.parameter_count},
                   {"mAP_mean", row.mean_map()},
                   {"mAP_std", row.std_map()},
                   {"mcAP_mean", row.mean_mcap()},
                   {"mcAP_std", row.std_mcap()},
                   {"gate_auc_mean", auc ? nlohmann::ordered_json(*auc) : nlohmann::ordered_json(nullptr)},
                   {"runs", runs}});
  }
  return out.dump(2);
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "preset,params,seeds,map_mean,map_std,mcap_mean,mcap_std,gate_auc_mean\n";
  char buf[256];
  for (const auto& row : rows) {
    const auto auc = row.mean_gate_auc();
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.6f,%.6f,%.6f,%.6f,", row.preset.c_str(), row.parameter_count,
                  row.runs.size(), row.mean_map(), row.std_map(), row.mean_mcap(), row.std_mcap());
    out << buf;
    if (auc) {
      std::snprintf(buf, sizeof buf, "%.6f", *auc);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace gatehub
