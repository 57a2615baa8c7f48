#include "gatehub/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gatehub/errors.hpp"
#include "gatehub/serialize.hpp"
#include "json_io.hpp"

namespace gatehub {
namespace {

constexpr const char* kManifest = "manifest.json";

json_io::Json read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / kManifest);
  if (!in) throw FormatError("checkpoint manifest missing in " + dir.string());
  std::stringstream text;
  text << in.rdbuf();
  try {
    return json_io::Json::parse(text.str());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint manifest: ") + e.what());
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const ModelParams& params, const ModelConfig& config) {
  std::filesystem::create_directories(dir);
  json_io::Json tensors = json_io::Json::array();
  for (const NamedTensor& nt : params.named()) {
    const std::string file = nt.name + ".ghtb";
    save_tensor(dir / file, nt.tensor);
    const auto extents = nt.tensor.shape().extents();
    tensors.push_back({{"name", nt.name},
                       {"file", file},
                       {"shape", std::vector<std::size_t>(extents.begin(), extents.end())}});
  }
  json_io::Json manifest{{"format", "gatehub-checkpoint"}, {"version", 1}, {"model", json_io::encode(config)},
                         {"tensors", tensors}};
  std::ofstream out(dir / kManifest);
  out << manifest.dump(2) << '\n';
  if (!out) throw FormatError("failed to write " + (dir / kManifest).string());
}

ModelConfig checkpoint_config(const std::filesystem::path& dir) {
  const auto manifest = read_manifest(dir);
  if (!manifest.contains("model")) throw FormatError("checkpoint manifest has no model config");
  return json_io::decode(manifest["model"], ModelConfig{});
}

ModelParams load_checkpoint(const std::filesystem::path& dir, const ModelConfig& config) {
  const auto manifest = read_manifest(dir);
  const ModelConfig stored = json_io::decode(manifest.at("model"), ModelConfig{});
  if (!(stored == config)) {
    throw ConfigError("checkpoint config differs from the requested config:\n" + to_json(stored));
  }
  ModelParams params = ModelParams::init(config, 0);
  const auto named = params.named();
  const auto& entries = manifest.at("tensors");
  if (entries.size() != named.size()) throw FormatError("checkpoint tensor count does not match the model");
  for (const auto& entry : entries) {
    const std::string name = entry.at("name").get<std::string>();
    const auto it = std::find_if(named.begin(), named.end(), [&](const NamedTensor& nt) { return nt.name == name; });
    if (it == named.end()) throw FormatError("checkpoint holds unknown tensor '" + name + "'");
    const Tensor loaded = load_tensor(dir / entry.at("file").get<std::string>());
    if (!(loaded.shape() == it->tensor.shape())) {
      throw FormatError("tensor '" + name + "' has shape " + loaded.shape().str() + ", expected " +
                        it->tensor.shape().str());
    }
    Tensor target = it->tensor;
    std::copy(loaded.data().begin(), loaded.data().end(), target.mutable_data().begin());
  }
  return params;
}

}  // namespace gatehub
