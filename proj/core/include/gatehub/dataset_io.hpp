#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gatehub/synth.hpp"

namespace gatehub {

struct NamedSequence {
  std::string name;
  std::uint64_t seed = 0;
  SynthSequence sequence;
};

// Train and held-out sequences that share one SynthConfig (and so one basis),
// differing only in their generation seeds.
struct Dataset {
  SynthConfig synth;
  std::vector<NamedSequence> train;
  std::vector<NamedSequence> eval;
};

Dataset make_dataset(const SynthConfig& synth, std::size_t train_sequences, std::size_t eval_sequences,
                     std::uint64_t eval_seed_offset = 1000);

// Layout: manifest.json (synth config and both split lists), then per
// sequence <name>.ghtb (frames) and <name>.csv (time,label,tag).
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);
// FormatError for missing or inconsistent files.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace gatehub
