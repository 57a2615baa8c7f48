#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gatehub {

// One per-frame prediction: probabilities over C + 1 classes (index 0 is
// background) for the frame at `time`, plus its label when known.
struct PredictionFrame {
  std::int64_t time = 0;
  std::vector<double> probs;
  std::size_t predicted = 0;  // argmax of probs
  int label = -1;             // ground truth, -1 when unknown
};

}  // namespace gatehub
