#pragma once

#include <stdexcept>
#include <string>

#include "pns/grid.hpp"

namespace pns {

// LNSF snapshot format, little-endian:
//   magic "LNSF" | u32 version=1 | u32 n | f64 box_len |
//   three n^3 f64 arrays (x, y, z components), z-fastest ordering.

struct SnapshotError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SnapshotMagicError : SnapshotError {
  using SnapshotError::SnapshotError;
};
struct SnapshotVersionError : SnapshotError {
  using SnapshotError::SnapshotError;
};
struct SnapshotTruncatedError : SnapshotError {
  using SnapshotError::SnapshotError;
};

void write_snapshot(const VectorField3& field, const std::string& path);
VectorField3 read_snapshot(const std::string& path);

}  // namespace pns
