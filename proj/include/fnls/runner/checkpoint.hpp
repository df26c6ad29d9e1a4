#pragma once

#include <cstdint>
#include <string>

#include "fnls/error.hpp"
#include "fnls/field.hpp"

namespace fnls::runner {

/// Binary state file, all integers and floats little-endian:
///
///   offset  size  field
///        0     8  magic "FNLSCKPT"
///        8     4  u32 format version (kCheckpointVersion)
///       12     4  u32 geometry kind (0 full, 1 radial)
///       16     4  u32 dimension n
///       20     4  u32 aux (radial stencil order, 0 for full grids)
///       24    24  u64 dims[3] (points per axis, unused axes 0; radial: N_r, 0, 0)
///       48     8  f64 extent (box half width L or r_max)
///       56     8  f64 t
///       64     8  f64 dt
///       72     8  u64 value count
///       80        count pairs (f64 re, f64 im)
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 80;

class CheckpointError : public IoError {
 public:
  using IoError::IoError;
};

struct Checkpoint {
  ComplexField field;
  double t = 0.0;
  double dt = 0.0;
};

void save_checkpoint(const ComplexField& field, double t, double dt, const std::string& path);

/// Rebuilds the grid from the header. The returned field carries time_tag = t.
/// Throws CheckpointError on a bad magic, version, truncated or oversized file.
Checkpoint load_checkpoint(const std::string& path);

/// Throws ValidationError unless the two geometries have the same kind,
/// dimension, resolution and extent.
void require_matching_geometry(const Geometry& stored, const Geometry& expected);

}  // namespace fnls::runner
