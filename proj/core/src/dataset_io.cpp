#include "gatehub/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gatehub/errors.hpp"
#include "gatehub/serialize.hpp"
#include "json_io.hpp"

namespace gatehub {
namespace {

std::string sequence_name(const char* split, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03zu", split, i);
  return buf;
}

void write_labels(const std::filesystem::path& path, const SynthSequence& seq) {
  std::ofstream out(path);
  out << "time,label,tag\n";
  for (std::size_t t = 0; t < seq.length(); ++t) out << t << ',' << seq.labels[t] << ',' << to_string(seq.tags[t]) << '\n';
  if (!out) throw FormatError("failed to write " + path.string());
}

void read_labels(const std::filesystem::path& path, SynthSequence& seq) {
  std::ifstream in(path);
  if (!in) throw FormatError("missing label file " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "time,label,tag") throw FormatError("unexpected label header in " + path.string());
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string time, label, tag;
    if (!std::getline(row, time, ',') || !std::getline(row, label, ',') || !std::getline(row, tag)) {
      throw FormatError("malformed label row '" + line + "' in " + path.string());
    }
    try {
      if (std::stoull(time) != expected) throw FormatError("label rows out of order in " + path.string());
      seq.labels.push_back(std::stoi(label));
    } catch (const std::logic_error&) {
      throw FormatError("malformed label row '" + line + "' in " + path.string());
    }
    seq.tags.push_back(parse_frame_tag(tag));
    ++expected;
  }
}

}  // namespace

Dataset make_dataset(const SynthConfig& synth, std::size_t train_sequences, std::size_t eval_sequences,
                     std::uint64_t eval_seed_offset) {
  Dataset d;
  d.synth = synth;
  auto build = [&](const char* split, std::size_t count, std::uint64_t first_seed, std::vector<NamedSequence>& out) {
    for (std::size_t i = 0; i < count; ++i) {
      SynthConfig c = synth;
      c.seed = first_seed + i;
      out.push_back({sequence_name(split, i), c.seed, generate(c)});
    }
  };
  build("train", train_sequences, synth.seed, d.train);
  build("eval", eval_sequences, synth.seed + eval_seed_offset, d.eval);
  return d;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  auto split_json = [&](const std::vector<NamedSequence>& split) {
    json_io::Json list = json_io::Json::array();
    for (const NamedSequence& s : split) {
      save_tensor(dir / (s.name + ".ghtb"), s.sequence.frames);
      write_labels(dir / (s.name + ".csv"), s.sequence);
      list.push_back({{"name", s.name}, {"seed", s.seed}, {"length", s.sequence.length()}});
    }
    return list;
  };
  json_io::Json manifest{{"format", "gatehub-dataset"},
                         {"version", 1},
                         {"synth", json_io::encode(dataset.synth)},
                         {"train", split_json(dataset.train)},
                         {"eval", split_json(dataset.eval)}};
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw FormatError("failed to write dataset manifest in " + dir.string());
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw FormatError("dataset manifest missing in " + dir.string());
  std::stringstream text;
  text << in.rdbuf();
  json_io::Json manifest;
  try {
    manifest = json_io::Json::parse(text.str());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed dataset manifest: ") + e.what());
  }
  Dataset d;
  d.synth = json_io::decode(manifest.at("synth"), SynthConfig{});
  auto load_split = [&](const char* key, std::vector<NamedSequence>& out) {
    for (const auto& entry : manifest.at(key)) {
      NamedSequence s;
      s.name = entry.at("name").get<std::string>();
      s.seed = entry.at("seed").get<std::uint64_t>();
      s.sequence.frames = load_tensor(dir / (s.name + ".ghtb"));
      read_labels(dir / (s.name + ".csv"), s.sequence);
      if (s.sequence.frames.rank() != 2 || s.sequence.frames.rows() != s.sequence.length() ||
          s.sequence.frames.cols() != d.synth.feature_dim) {
        throw FormatError("sequence " + s.name + " frames do not match its labels or the feature width");
      }
      out.push_back(std::move(s));
    }
  };
  load_split("train", d.train);
  load_split("eval", d.eval);
  return d;
}

}  // namespace gatehub
