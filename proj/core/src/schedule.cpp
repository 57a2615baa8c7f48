#include "gatehub/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gatehub/errors.hpp"

namespace gatehub {
namespace {

// Cosine interpolation from `from` (fraction 0) to `to` (fraction 1).
double cosine(double from, double to, double fraction) {
  return to + (from - to) * 0.5 * (1.0 + std::cos(std::numbers::pi * fraction));
}

}  // namespace

std::int64_t ScheduleConfig::peak_step() const {
  return static_cast<std::int64_t>(std::llround(pct_start * static_cast<double>(total_steps)));
}

void ScheduleConfig::validate() const {
  if (total_steps < 1) throw ConfigError("schedule needs at least one step");
  if (!(peak_lr > 0.0)) throw ConfigError("peak learning rate must be positive");
  if (!(pct_start > 0.0 && pct_start < 1.0)) throw ConfigError("pct_start must lie in (0, 1)");
  if (!(div > 1.0) || !(final_div > 1.0)) throw ConfigError("schedule divisors must exceed 1");
}

double lr_at(std::int64_t step, const ScheduleConfig& s) {
  if (step < 0 || step > s.total_steps) {
    throw ContractError("lr_at: step " + std::to_string(step) + " outside [0, " + std::to_string(s.total_steps) + "]");
  }
  const std::int64_t peak = s.peak_step();
  if (step <= peak) {
    if (peak == 0) return s.peak_lr;
    return cosine(s.initial_lr(), s.peak_lr, static_cast<double>(step) / static_cast<double>(peak));
  }
  const std::int64_t span = s.total_steps - peak;
  return cosine(s.peak_lr, s.final_lr(), static_cast<double>(step - peak) / static_cast<double>(span));
}

}  // namespace gatehub
