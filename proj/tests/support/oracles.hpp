#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace gatehub::testing {

// Frames ranked at or above frame i: higher score, or equal score with a lower index.
inline bool ranks_before(std::span<const double> scores, std::size_t j, std::size_t i) {
  return scores[j] > scores[i] || (scores[j] == scores[i] && j <= i);
}

// Quadratic AP / cAP that never sorts: each positive's precision is counted
// directly from pairwise comparisons. `weight` divides false positives.
inline double brute_force_ap(std::span<const double> scores, std::span<const std::uint8_t> positives,
                             double weight = 1.0) {
  double total = 0.0;
  std::size_t num_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positives[i]) continue;
    ++num_pos;
    double tp = 0.0, fp = 0.0;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (!ranks_before(scores, j, i)) continue;
      (positives[j] ? tp : fp) += 1.0;
    }
    total += tp / (tp + fp / weight);
  }
  return total / static_cast<double>(num_pos);
}

inline double brute_force_cap(std::span<const double> scores, std::span<const std::uint8_t> positives) {
  double pos = 0.0;
  for (auto p : positives) pos += p ? 1.0 : 0.0;
  const double neg = static_cast<double>(positives.size()) - pos;
  return brute_force_ap(scores, positives, neg / pos);
}

}  // namespace gatehub::testing
