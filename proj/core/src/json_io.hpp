#pragma once

#include <json.hpp>

#include "gatehub/experiment.hpp"
#include "gatehub/schedule.hpp"

namespace gatehub::json_io {

using Json = nlohmann::ordered_json;

Json encode(const ModelConfig& c);
Json encode(const LossConfig& c);
Json encode(const FahConfig& c);
Json encode(const SynthConfig& c);
Json encode(const AdamConfig& c);
Json encode(const ExperimentConfig& c);

// Each decoder starts from `base` and overwrites the keys present in `j`.
// Unknown keys and mistyped values raise ConfigError.
ModelConfig decode(const Json& j, ModelConfig base);
LossConfig decode(const Json& j, LossConfig base);
FahConfig decode(const Json& j, FahConfig base);
SynthConfig decode(const Json& j, SynthConfig base);
AdamConfig decode(const Json& j, AdamConfig base);
ExperimentConfig decode(const Json& j, ExperimentConfig base);

Json parse(const std::string& text);

}  // namespace gatehub::json_io
