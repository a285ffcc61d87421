#include "vscope/snapshot_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace vscope {

namespace {

template <class T>
void put_le(unsigned char* dst, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(dst, bytes, sizeof(T));
}

template <class T>
T get_le(const unsigned char* src) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, src, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

VectorField SnapshotData::vector() const {
  if (fields.size() != 3)
    throw SnapshotError("snapshot holds " + std::to_string(fields.size()) + " fields, expected 3 vector components");
  return VectorField(fields[0], fields[1], fields[2]);
}

void write_snapshot(const std::filesystem::path& path, const VectorField& omega, double time) {
  write_snapshot(path, omega.grid(), time, {&omega[0], &omega[1], &omega[2]});
}

void write_snapshot(const std::filesystem::path& path, const GridSpec& grid, double time,
                    const std::vector<const ScalarField*>& fields) {
  std::array<unsigned char, kSnapshotHeaderBytes> header{};
  std::memcpy(header.data(), "VSCP", 4);
  put_le<std::uint32_t>(header.data() + 4, kSnapshotVersion);
  put_le<std::uint32_t>(header.data() + 8, std::uint32_t(grid.n));
  put_le<double>(header.data() + 12, grid.box_length);
  put_le<double>(header.data() + 20, grid.viscosity);
  put_le<double>(header.data() + 28, time);
  put_le<std::uint32_t>(header.data() + 36, std::uint32_t(fields.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(header.data()), header.size());
  std::vector<unsigned char> buf(grid.size() * 8);
  for (const ScalarField* f : fields) {
    if (f->grid.n != grid.n) throw SnapshotError("snapshot field grid mismatch");
    for (std::size_t i = 0; i < f->values.size(); ++i) put_le<double>(buf.data() + 8 * i, f->values[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  }
  if (!out) throw SnapshotError("write failed for " + path.string());
}

SnapshotData read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open snapshot " + path.string());
  in.seekg(0, std::ios::end);
  const auto actual = std::uint64_t(in.tellg());
  in.seekg(0);
  if (actual < kSnapshotHeaderBytes)
    throw SnapshotError("truncated snapshot " + path.string() + ": expected at least 64 header bytes, got " +
                        std::to_string(actual));
  std::array<unsigned char, kSnapshotHeaderBytes> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (std::memcmp(header.data(), "VSCP", 4) != 0) throw SnapshotError("bad magic in " + path.string());
  const auto version = get_le<std::uint32_t>(header.data() + 4);
  if (version != kSnapshotVersion)
    throw SnapshotError("unsupported snapshot version " + std::to_string(version) + " (reader supports " +
                        std::to_string(kSnapshotVersion) + ")");
  SnapshotData s;
  s.grid.n = int(get_le<std::uint32_t>(header.data() + 8));
  s.grid.box_length = get_le<double>(header.data() + 12);
  s.grid.viscosity = get_le<double>(header.data() + 20);
  s.time = get_le<double>(header.data() + 28);
  const auto count = get_le<std::uint32_t>(header.data() + 36);
  try {
    s.grid.validate();
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("invalid snapshot header: ") + e.what());
  }
  const std::uint64_t expected = kSnapshotHeaderBytes + std::uint64_t(count) * s.grid.size() * 8;
  if (actual != expected)
    throw SnapshotError("truncated or oversized snapshot " + path.string() + ": expected " + std::to_string(expected) +
                        " bytes, got " + std::to_string(actual));
  std::vector<unsigned char> buf(s.grid.size() * 8);
  for (std::uint32_t c = 0; c < count; ++c) {
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    ScalarField f(s.grid);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = get_le<double>(buf.data() + 8 * i);
    s.fields.push_back(std::move(f));
  }
  return s;
}

}  // namespace vscope
