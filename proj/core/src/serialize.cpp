#include "gatehub/serialize.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "gatehub/errors.hpp"

namespace gatehub {

namespace {

constexpr std::array<char, 4> kMagic{'G', 'H', 'T', 'B'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  std::array<char, sizeof(T)> bytes{};
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>(u & 0xFFu);
    u = static_cast<U>(u >> 8);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  static_assert(std::is_integral_v<T>);
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw FormatError("tensor record truncated");
  }
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) u = static_cast<U>((u << 8) | bytes[i]);
  return static_cast<T>(u);
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& tensor, DType dtype) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(out, kTensorFormatVersion);
  const Shape& shape = tensor.shape();
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(shape.rank()));
  for (std::size_t extent : shape.extents()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(extent));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
  for (double v : tensor.data()) {
    if (dtype == DType::kFloat64) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    } else {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  if (!out) throw FormatError("failed to write tensor record");
}

Tensor read_tensor(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw FormatError("not a GHTB tensor record (bad magic)");
  }
  const auto version = get_le<std::uint16_t>(in);
  if (version != kTensorFormatVersion) {
    throw FormatError("unsupported tensor record version " + std::to_string(version));
  }
  const auto rank = get_le<std::uint8_t>(in);
  if (rank > Shape::kMaxRank) throw FormatError("tensor record rank " + std::to_string(rank) + " exceeds 3");
  std::vector<std::size_t> extents(rank);
  for (auto& e : extents) {
    e = get_le<std::uint32_t>(in);
    if (e == 0) throw FormatError("tensor record has a zero extent");
  }
  const auto tag = get_le<std::uint8_t>(in);
  if (tag != static_cast<std::uint8_t>(DType::kFloat32) && tag != static_cast<std::uint8_t>(DType::kFloat64)) {
    throw FormatError("unknown dtype tag " + std::to_string(tag));
  }
  const Shape shape{std::span<const std::size_t>(extents)};
  std::vector<double> values(shape.numel());
  for (double& v : values) {
    if (tag == static_cast<std::uint8_t>(DType::kFloat64)) {
      v = std::bit_cast<double>(get_le<std::uint64_t>(in));
    } else {
      v = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(in)));
    }
  }
  return Tensor(shape, std::move(values));
}

void save_tensor(const std::filesystem::path& path, const Tensor& tensor, DType dtype) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_tensor(out, tensor, dtype);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_tensor(in);
}

}  // namespace gatehub
