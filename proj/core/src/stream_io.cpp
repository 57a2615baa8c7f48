#include "gatehub/stream_io.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "gatehub/errors.hpp"
#include "gatehub/serialize.hpp"

namespace gatehub {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field) {
  field = trim(field);
  // strtod rather than from_chars<double>: the latter is missing from older libstdc++.
  std::string owned(field);
  char* end = nullptr;
  const double v = std::strtod(owned.c_str(), &end);
  if (owned.empty() || end != owned.c_str() + owned.size()) {
    throw FormatError("cannot parse number '" + owned + "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view field) {
  field = trim(field);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError("cannot parse integer '" + std::string(field) + "'");
  }
  return v;
}

std::string to_hex(const std::string& bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xF]);
  }
  return out;
}

std::string from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw FormatError("odd-length hex payload");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw FormatError("invalid hex digit");
  };
  std::string out(hex.size() / 2, '\0');
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<char>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::optional<StreamRecord> parse_stream_record(std::string_view line) {
  line = trim(line);
  if (line.empty() || line.front() == '#') return std::nullopt;
  const auto fields = split_commas(line);
  if (fields.size() < 2) throw FormatError("stream record needs a time and a frame");
  StreamRecord rec;
  rec.time = parse_int(fields[0]);
  const std::string_view payload = trim(fields[1]);
  if (fields.size() == 2 && payload.starts_with("ghtb:")) {
    std::istringstream in(from_hex(payload.substr(5)));
    const Tensor t = read_tensor(in);
    if (t.rank() != 1) throw FormatError("binary stream frame must be a rank-1 tensor");
    rec.frame.assign(t.data().begin(), t.data().end());
    return rec;
  }
  for (std::size_t i = 1; i < fields.size(); ++i) rec.frame.push_back(parse_double(fields[i]));
  return rec;
}

std::string format_stream_record(const StreamRecord& record, bool binary) {
  std::string out = std::to_string(record.time);
  if (binary) {
    std::ostringstream bytes;
    write_tensor(bytes, Tensor(Shape{record.frame.size()}, record.frame));
    return out + ",ghtb:" + to_hex(bytes.str());
  }
  for (double v : record.frame) out += "," + format_double(v);
  return out;
}

std::string format_prediction_record(const PredictionFrame& frame, double latency_us) {
  std::string out = std::to_string(frame.time);
  for (double p : frame.probs) out += "," + format_double(p);
  out += "," + std::to_string(frame.predicted);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", latency_us);
  out += ",";
  out += buf;
  return out;
}

PredictionRecord parse_prediction_record(std::string_view line, std::size_t num_outputs) {
  const auto fields = split_commas(trim(line));
  if (fields.size() != num_outputs + 3) {
    throw FormatError("prediction record has " + std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(num_outputs + 3));
  }
  PredictionRecord rec;
  rec.frame.time = parse_int(fields[0]);
  for (std::size_t i = 0; i < num_outputs; ++i) rec.frame.probs.push_back(parse_double(fields[1 + i]));
  rec.frame.predicted = static_cast<std::size_t>(parse_int(fields[num_outputs + 1]));
  rec.latency_us = parse_double(fields[num_outputs + 2]);
  return rec;
}

}  // namespace gatehub
