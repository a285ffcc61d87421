#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "support.hpp"
#include "vscope/snapshot_io.hpp"

using namespace vscope;
using namespace vtest;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "vscope_tests";
  fs::create_directories(d);
  return d / name;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void spit(const fs::path& p, const std::vector<char>& b) {
  std::ofstream f(p, std::ios::binary);
  f.write(b.data(), std::streamsize(b.size()));
}

}  // namespace

TEST_SUITE("snapshot_io") {

TEST_CASE("write then read is bitwise lossless") {
  const GridSpec g{8, 1.7, 0.03};
  const VectorField w(random_noise(g, 1), random_noise(g, 2), random_noise(g, 3));
  const fs::path p = scratch("roundtrip.vscp");
  write_snapshot(p, w, 0.125);
  CHECK(fs::file_size(p) == kSnapshotHeaderBytes + 3 * g.size() * 8);
  const SnapshotData d = read_snapshot(p);
  CHECK(d.grid == g);
  CHECK(d.time == 0.125);
  const VectorField r = d.vector();
  for (int c = 0; c < 3; ++c) CHECK(std::memcmp(r[c].values.data(), w[c].values.data(), g.size() * 8) == 0);
}

TEST_CASE("header layout") {
  const GridSpec g{8, 2.0, 0.5};
  const fs::path p = scratch("header.vscp");
  write_snapshot(p, VectorField(g), 3.0);
  const auto b = slurp(p);
  CHECK(std::string(b.data(), 4) == "VSCP");
  std::uint32_t version = 0, n = 0, count = 0;
  double L = 0, nu = 0, t = 0;
  std::memcpy(&version, b.data() + 4, 4);
  std::memcpy(&n, b.data() + 8, 4);
  std::memcpy(&L, b.data() + 12, 8);
  std::memcpy(&nu, b.data() + 20, 8);
  std::memcpy(&t, b.data() + 28, 8);
  std::memcpy(&count, b.data() + 36, 4);
  CHECK(version == kSnapshotVersion);
  CHECK(n == 8);
  CHECK(L == 2.0);
  CHECK(nu == 0.5);
  CHECK(t == 3.0);
  CHECK(count == 3);
}

TEST_CASE("truncated file names expected and actual sizes") {
  const GridSpec g{8, 1.0, 0.1};
  const fs::path p = scratch("trunc.vscp");
  write_snapshot(p, VectorField(g), 0.0);
  auto b = slurp(p);
  b.resize(b.size() - 100);
  spit(p, b);
  try {
    (void)read_snapshot(p);
    FAIL("expected SnapshotError");
  } catch (const SnapshotError& e) {
    const std::string m = e.what();
    CHECK(m.find(std::to_string(64 + 3 * 512 * 8)) != std::string::npos);
    CHECK(m.find(std::to_string(b.size())) != std::string::npos);
  }
  b.resize(20);
  spit(p, b);
  CHECK_THROWS_AS(read_snapshot(p), SnapshotError);
}

TEST_CASE("version bump and bad magic are rejected") {
  const GridSpec g{8, 1.0, 0.1};
  const fs::path p = scratch("version.vscp");
  write_snapshot(p, VectorField(g), 0.0);
  auto b = slurp(p);
  const std::uint32_t v = kSnapshotVersion + 1;
  std::memcpy(b.data() + 4, &v, 4);
  spit(p, b);
  try {
    (void)read_snapshot(p);
    FAIL("expected SnapshotError");
  } catch (const SnapshotError& e) {
    CHECK(std::string(e.what()).find("unsupported snapshot version 2") != std::string::npos);
  }
  std::memcpy(b.data() + 4, &kSnapshotVersion, 4);
  b[0] = 'X';
  spit(p, b);
  CHECK_THROWS_WITH_AS(read_snapshot(p), doctest::Contains("magic"), SnapshotError);
}

TEST_CASE("non-vector snapshots refuse the vector view") {
  const GridSpec g{8, 1.0, 0.1};
  const ScalarField f = random_noise(g, 4);
  const fs::path p = scratch("scalar.vscp");
  write_snapshot(p, g, 1.0, {&f});
  const SnapshotData d = read_snapshot(p);
  REQUIRE(d.fields.size() == 1);
  CHECK(d.fields[0].values == f.values);
  CHECK_THROWS_AS(d.vector(), SnapshotError);
}

}  // TEST_SUITE
