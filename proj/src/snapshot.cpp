#include "gevlab/snapshot.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace gevlab {
namespace {

constexpr std::array<char, 4> kMagic{'G', 'V', 'L', 'C'};

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes;
  is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (is.gcount() != static_cast<std::streamsize>(sizeof(T)))
    throw SnapshotFormatError("snapshot: truncated input");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

// Storage index for the p-th frequency in ascending (file) order.
Eigen::Index storage_from_file_order(const GridSpec& g, Eigen::Index p) {
  std::array<int, 3> k{0, 0, 0};
  for (int a = g.dim - 1; a >= 0; --a) {
    k[a] = static_cast<int>(p % g.n) - g.n / 2;
    p /= g.n;
  }
  return flat_index(g, k);
}

bool looks_hermitian(const Field& f) {
  const GridSpec& g = f.grid();
  const double scale = std::max(1.0, max_abs(f));
  bool ok = true;
  for_each_frequency(g, [&](const Frequency& q) {
    if (!ok || q.touches_nyquist) return;
    std::array<int, 3> mk{-q.k[0], -q.k[1], -q.k[2]};
    const Eigen::Index m = flat_index(g, mk);
    for (int c = 0; c < f.components() && ok; ++c)
      if (std::abs(f.coeffs()(q.index, c) - std::conj(f.coeffs()(m, c))) > 1e-13 * scale) ok = false;
  });
  return ok;
}

}  // namespace

void write_snapshot(std::ostream& os, const Field& f) {
  const GridSpec& g = f.grid();
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kSnapshotVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.n));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.components()));
  const auto points = static_cast<std::uint64_t>(g.points());
  put_le<std::uint64_t>(os, points * static_cast<std::uint64_t>(f.components()));
  for (Eigen::Index p = 0; p < g.points(); ++p) {
    const Eigen::Index s = storage_from_file_order(g, p);
    for (int c = 0; c < f.components(); ++c) {
      put_le<double>(os, f.coeffs()(s, c).real());
      put_le<double>(os, f.coeffs()(s, c).imag());
    }
  }
  if (!os) throw std::runtime_error("snapshot: write failed");
}

void write_snapshot(const std::filesystem::path& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("snapshot: cannot open " + path.string());
  write_snapshot(os, f);
}

Field read_snapshot(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (is.gcount() != 4) throw SnapshotFormatError("snapshot: truncated header");
  if (magic != kMagic) throw SnapshotFormatError("snapshot: bad magic");
  const auto version = get_le<std::uint32_t>(is);
  if (version != kSnapshotVersion)
    throw SnapshotFormatError("snapshot: unsupported version " + std::to_string(version));
  const auto dim = get_le<std::uint32_t>(is);
  const auto n = get_le<std::uint32_t>(is);
  const auto components = get_le<std::uint32_t>(is);
  const auto count = get_le<std::uint64_t>(is);
  GridSpec g;
  try {
    g = GridSpec::make(static_cast<int>(dim), static_cast<int>(n));
  } catch (const std::invalid_argument& e) {
    throw SnapshotFormatError(std::string("snapshot: bad grid header: ") + e.what());
  }
  if (components < 1 || components > 4096) throw SnapshotFormatError("snapshot: bad component count");
  if (count != static_cast<std::uint64_t>(g.points()) * components)
    throw SnapshotFormatError("snapshot: count does not match header");
  Field f(g, static_cast<int>(components), true);
  for (Eigen::Index p = 0; p < g.points(); ++p) {
    const Eigen::Index s = storage_from_file_order(g, p);
    for (std::uint32_t c = 0; c < components; ++c) {
      const double re = get_le<double>(is);
      const double im = get_le<double>(is);
      f.coeffs()(s, c) = {re, im};
    }
  }
  f.set_real(looks_hermitian(f));
  return f;
}

Field read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("snapshot: cannot open " + path.string());
  return read_snapshot(is);
}

}  // namespace gevlab
