#pragma once

#include "gevlab/fourier_grid.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>

namespace gevlab {

/// Binary snapshot of a SpectralField ("GVLC" files).
///
/// Layout, all little-endian:
///   bytes 0..3   magic "GVLC"
///   u32          version (= 1)
///   u32          dim
///   u32          n
///   u32          components
///   u64          count (= n^dim * components)
///   count x (f64 re, f64 im)
/// Values are frequency-major: the integer multi-index k runs row-major
/// (axis 0 slowest) with every axis ascending from -n/2 to n/2 - 1, and the
/// components of one frequency are contiguous. The box length is not
/// stored; readers assume 2*pi.
class SnapshotFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(std::ostream& os, const Field& f);
void write_snapshot(const std::filesystem::path& path, const Field& f);

/// Throws SnapshotFormatError on bad magic, unknown version, inconsistent
/// header or truncated payload.
Field read_snapshot(std::istream& is);
Field read_snapshot(const std::filesystem::path& path);

}  // namespace gevlab
