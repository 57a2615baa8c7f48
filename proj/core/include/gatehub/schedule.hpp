#pragma once

#include <cstdint>

namespace gatehub {

// One-cycle learning rate: cosine ramp from peak/div to peak over the first
// pct_start of the steps, then cosine decay from peak to peak/final_div.
struct ScheduleConfig {
  std::int64_t total_steps = 1000;
  double peak_lr = 1e-3;
  double pct_start = 0.25;
  double div = 25.0;
  double final_div = 1e4;

  double initial_lr() const { return peak_lr / div; }
  double final_lr() const { return peak_lr / final_div; }
  // round(pct_start * total_steps)
  std::int64_t peak_step() const;
  void validate() const;

  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

// Defined for 0 <= step <= total_steps; ContractError otherwise.
double lr_at(std::int64_t step, const ScheduleConfig& schedule);

}  // namespace gatehub
