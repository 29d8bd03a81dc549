#pragma once

#include <filesystem>

#include "nodal/grid.hpp"

namespace nodal {

// Raw field dump: a 32-byte little-endian header followed by the values as
// little-endian float64 in grid order.
//   0  char[4] "NSLF"
//   4  u8      version (1)
//   5  u8      d
//   6  u16     reserved (0)
//   8  u32     n
//  12  f32     h (informational; R / (n - 1) is authoritative)
//  16  f64     R
//  24  u64     seed
void write_field(const FieldSample& sample, const std::filesystem::path& path);
FieldSample read_field(const std::filesystem::path& path);

}  // namespace nodal
