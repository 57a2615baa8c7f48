#pragma once

#include <filesystem>

#include "gatehub/model.hpp"

namespace gatehub {

// A checkpoint directory holds manifest.json (the model config and the list
// of parameter names and shapes) and one GHTB file per parameter.
void save_checkpoint(const std::filesystem::path& dir, const ModelParams& params, const ModelConfig& config);

// Reads a checkpoint written for `config`. Throws ConfigError when the stored
// config differs and FormatError for missing or malformed files.
ModelParams load_checkpoint(const std::filesystem::path& dir, const ModelConfig& config);

// The config recorded in a checkpoint manifest.
ModelConfig checkpoint_config(const std::filesystem::path& dir);

}  // namespace gatehub
