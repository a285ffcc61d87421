#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "vscope/grid.hpp"

namespace vscope {

// Binary snapshot layout (little-endian), 64-byte header:
//   0  char[4]  magic "VSCP"
//   4  u32      version
//   8  u32      n
//  12  f64      box length L
//  20  f64      viscosity
//  28  f64      time
//  36  u32      field count
//  40  u8[24]   reserved (zero)
// followed by field-count arrays of n^3 f64, row-major with x fastest.
inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 64;

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SnapshotData {
  GridSpec grid;
  double time = 0.0;
  std::vector<ScalarField> fields;

  /// Three-component vector view; throws SnapshotError if field count != 3.
  VectorField vector() const;
};

void write_snapshot(const std::filesystem::path& path, const VectorField& omega, double time);
void write_snapshot(const std::filesystem::path& path, const GridSpec& grid, double time,
                    const std::vector<const ScalarField*>& fields);
SnapshotData read_snapshot(const std::filesystem::path& path);

}  // namespace vscope
