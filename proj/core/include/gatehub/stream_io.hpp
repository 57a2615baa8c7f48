#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gatehub/prediction.hpp"

namespace gatehub {

// One line of a stream input file. Two encodings are accepted:
//   <time>,<v1>,<v2>,...,<vM>         plain CSV
//   <time>,ghtb:<hex>                 hex-encoded GHTB tensor record of rank 1
struct StreamRecord {
  std::int64_t time = 0;
  std::vector<double> frame;
};

// Blank lines and lines starting with '#' yield nullopt; malformed lines throw FormatError.
std::optional<StreamRecord> parse_stream_record(std::string_view line);
std::string format_stream_record(const StreamRecord& record, bool binary = false);

// Output line: <time>,<p0>,...,<pC>,<argmax>,<latency_us>
struct PredictionRecord {
  PredictionFrame frame;
  double latency_us = 0.0;
};

std::string format_prediction_record(const PredictionFrame& frame, double latency_us);
PredictionRecord parse_prediction_record(std::string_view line, std::size_t num_outputs);

}  // namespace gatehub
