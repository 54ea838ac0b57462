#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "bmhd/field.hpp"

namespace bmhd {

/// What a snapshot file holds.
enum class FieldTag : std::uint32_t {
  Unknown = 0,
  V0 = 1,
  U0 = 2,
  H0 = 3,
  U01 = 4,
  H01 = 5,
  Velocity = 6,       ///< u
  Magnetic = 7,       ///< h
  PerturbationU = 8,  ///< U = u - f
  PerturbationH = 9,  ///< H = h - g
  HeatF = 10,
  HeatG = 11,
  SourceF = 12,
  SourceG = 13,
};

/// Binary snapshot layout (all integers and floats little-endian):
///
///   offset  size  content
///        0     4  magic "BMHD"
///        4     4  u32 format version (1)
///        8     4  u32 n
///       12     8  f64 k0
///       20     4  u32 flags (bit 0: hermitian)
///       24     8  f64 time
///       32     4  u32 field tag
///       36    28  zero padding (header is 64 bytes)
///       64   ...  component x, then y, then z; each n^3 complex values as
///                 (f64 real, f64 imag) in the GridSpec mode layout.
///
/// dealias_fraction is not stored; readers get the default 2/3.
struct Snapshot {
  SpectralVectorField field;
  double time = 0.0;
  FieldTag tag = FieldTag::Unknown;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 64;

void write_snapshot(std::ostream& out, const SpectralVectorField& field, double time,
                    FieldTag tag);
void write_snapshot(const std::filesystem::path& path, const SpectralVectorField& field,
                    double time, FieldTag tag);
/// Throws std::runtime_error on bad magic, version or truncated data.
Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace bmhd
