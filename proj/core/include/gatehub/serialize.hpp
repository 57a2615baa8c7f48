#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "gatehub/tensor.hpp"

namespace gatehub {

// Binary tensor record, little-endian throughout:
//   "GHTB" | version u16 | rank u8 | extents u32[rank] | dtype u8 | values
enum class DType : std::uint8_t { kFloat32 = 1, kFloat64 = 2 };

inline constexpr std::uint16_t kTensorFormatVersion = 1;

void write_tensor(std::ostream& out, const Tensor& tensor, DType dtype = DType::kFloat64);
Tensor read_tensor(std::istream& in);

void save_tensor(const std::filesystem::path& path, const Tensor& tensor, DType dtype = DType::kFloat64);
Tensor load_tensor(const std::filesystem::path& path);

}  // namespace gatehub
