#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "vscope/harmonic.hpp"

using namespace vscope;
using namespace vtest;

namespace {

DiskProblem problem(std::vector<Interval> k, std::complex<double> z0, std::size_t walkers, std::uint64_t seed = 1) {
  DiskProblem p;
  p.absorbing = std::move(k);
  p.z0 = z0;
  p.walkers = walkers;
  p.seed = seed;
  return p;
}

double covered(const std::vector<Interval>& k) {
  double s = 0.0;
  for (const auto& i : k) s += i.hi - i.lo;
  return s;
}

}  // namespace

TEST_SUITE("harmonic") {

TEST_CASE("h at the special point and the endpoints") {
  CHECK(std::abs(h_delta(1.0 / std::sqrt(3.0)) - 1.0 / 3.0) < 1e-12);
  CHECK(h_delta(1e-9) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(h_delta(1.0 - 1e-9) < 1e-8);
  CHECK_THROWS_AS(h_delta(0.0), std::invalid_argument);
  CHECK_THROWS_AS(h_delta(1.0), std::invalid_argument);
  CHECK_THROWS_AS(h_delta(-0.2), std::invalid_argument);
}

TEST_CASE("h is strictly decreasing") {
  double prev = 2.0;
  for (int i = 1; i <= 100; ++i) {
    const double v = h_delta(i / 101.0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("h is the closed-form slit measure at the tip of the segment") {
  // Measure of [-1, 1] from i*delta equals 1 - (2/pi) arg((1 + i d)/(1 - i d)).
  for (double d : {0.1, 0.3, 0.5, 0.8}) CHECK(h_delta(d) == doctest::Approx(slit_disk_exact({0.0, d})).epsilon(1e-12));
}

TEST_CASE("alpha and M") {
  CHECK(alpha_min(1.0 / std::sqrt(3.0)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(M_delta(10.0, 2.0, 1.0 / std::sqrt(3.0)) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(M_delta(10.0, 2.0, 0.5, 2.0) == doctest::Approx(2.5));
  CHECK_THROWS_AS(M_delta(10.0, 2.0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("normalize_intervals merges, clips and drops") {
  const auto k = normalize_intervals({{0.5, 0.7}, {-2.0, -0.5}, {0.6, 0.9}, {0.3, 0.3}, {1.5, 2.0}});
  REQUIRE(k.size() == 2);
  CHECK(k[0].lo == -1.0);
  CHECK(k[0].hi == -0.5);
  CHECK(k[1].lo == 0.5);
  CHECK(k[1].hi == 0.9);
  CHECK(normalize_intervals({}).empty());
}

TEST_CASE("empty absorbing set has zero measure") {
  const auto e = harmonic_measure_ws(problem({}, {0.1, 0.4}, 2000));
  CHECK(e.estimate == 0.0);
  CHECK(e.hits == 0);
  CHECK(e.circle_first == 2000);
}

TEST_CASE("arc seen from the centre has measure theta / 2 pi") {
  for (double th : {0.5, 1.5, 3.0}) {
    DiskProblem p = problem({}, {0.0, 0.0}, 40000, 4);
    p.arc = Arc{0.2, 0.2 + th};
    const auto e = harmonic_measure_ws(p);
    CAPTURE(th);
    CHECK(std::abs(e.estimate - th / (2.0 * pi)) < 3.0 * e.stderr_);
  }
}

TEST_CASE("finite-difference oracle agrees with the closed form") {
  CHECK(std::abs(slit_disk_laplace(0.5, 128, 128) - slit_disk_exact({0.0, 0.5})) < 1e-4);
}

TEST_CASE("full slit matches the grid Laplace oracle") {
  const double ref = slit_disk_laplace(0.5, 128, 128);
  const auto e = harmonic_measure_ws(problem({{-1.0, 1.0}}, {0.0, 0.5}, 40000, 8));
  CHECK(std::abs(e.estimate - ref) < 2.0 * e.stderr_ + 1e-3);
}

TEST_CASE("walker mass is conserved") {
  const auto e = harmonic_measure_ws(problem({{-0.4, 0.1}, {0.3, 0.6}}, {0.2, 0.3}, 5000));
  CHECK(e.walkers == 5000);
  CHECK(e.hits + e.circle_first == e.walkers);
  CHECK(e.estimate == doctest::Approx(double(e.hits) / e.walkers));
  CHECK(e.capped <= e.circle_first);
}

TEST_CASE("a seed reproduces the estimate bit for bit") {
  const auto p = problem({{-0.5, 0.2}}, {0.1, 0.5}, 3000, 77);
  const auto a = harmonic_measure_ws(p), b = harmonic_measure_ws(p);
  CHECK(a.estimate == b.estimate);
  CHECK(a.hits == b.hits);
  CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("nested absorbing sets give monotone estimates") {
  const std::complex<double> z0{0.1, 0.45};
  const auto small = harmonic_measure_ws(problem({{-0.2, 0.2}}, z0, 20000, 3));
  const auto mid = harmonic_measure_ws(problem({{-0.5, 0.3}}, z0, 20000, 3));
  const auto big = harmonic_measure_ws(problem({{-0.8, 0.7}}, z0, 20000, 3));
  CHECK(small.estimate <= mid.estimate + 2.0 * std::hypot(small.stderr_, mid.stderr_));
  CHECK(mid.estimate <= big.estimate + 2.0 * std::hypot(mid.stderr_, big.stderr_));
  CHECK(small.estimate < big.estimate);
}

TEST_CASE("estimate is symmetric under reflection in the diameter") {
  const std::vector<Interval> k{{-0.6, -0.1}, {0.2, 0.5}};
  const auto up = harmonic_measure_ws(problem(k, {0.15, 0.4}, 20000, 5));
  const auto down = harmonic_measure_ws(problem(k, {0.15, -0.4}, 20000, 6));
  CHECK(std::abs(up.estimate - down.estimate) < 3.0 * std::hypot(up.stderr_, down.stderr_));
}

TEST_CASE("sparse layouts cover the requested fraction") {
  for (Layout l : {Layout::centered, Layout::periodic_blocks}) {
    for (double d : {0.1, 0.5, 0.9}) {
      const auto k = sparse_layout(l, d, 8, 1);
      CHECK(covered(k) == doctest::Approx(2.0 * d).epsilon(1e-12));
      for (const auto& i : k) {
        CHECK(i.lo >= -1.0);
        CHECK(i.hi <= 1.0);
      }
    }
  }
  const auto c = sparse_layout(Layout::centered, 0.3, 8, 0);
  REQUIRE(c.size() == 1);
  CHECK(c[0].lo == doctest::Approx(-0.3));
  CHECK(sparse_layout(Layout::random_blocks, 0.0, 8, 0).empty());
  CHECK(covered(sparse_layout(Layout::random_blocks, 0.4, 8, 2)) <= 0.8 + 1e-12);
  const auto r1 = sparse_layout(Layout::random_blocks, 0.4, 8, 2), r2 = sparse_layout(Layout::random_blocks, 0.4, 8, 2);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].lo == r2[i].lo);
}

TEST_CASE("layout names round trip") {
  for (Layout l : {Layout::centered, Layout::periodic_blocks, Layout::random_blocks})
    CHECK(parse_layout(layout_name(l)) == l);
  CHECK_THROWS(parse_layout("spiral"));
}

TEST_CASE("study rows are ordered and bracketed") {
  StudyConfig c;
  c.walkers = 4000;
  c.points = {{0.0, 0.5}, {0.3, 0.2}};
  const auto rows = sparse_segment_study(c);
  REQUIRE(rows.size() == 3 * 2 * 5);
  std::size_t r = 0;
  for (Layout l : c.layouts)
    for (auto z : c.points)
      for (double d : c.deltas) {
        CHECK(rows[r].layout == l);
        CHECK(rows[r].z0 == z);
        CHECK(rows[r].delta == d);
        CHECK(rows[r].h.has_value() == (d > 0.0 && d < 1.0));
        CHECK(rows[r].estimate >= 0.0);
        CHECK(rows[r].estimate <= 1.0);
        ++r;
      }
  CHECK(rows[0].estimate == 0.0);
}

TEST_CASE("centered segment from just above the axis grows with delta") {
  StudyConfig c;
  c.walkers = 20000;
  c.points = {{0.0, 0.01}};
  c.layouts = {Layout::centered};
  c.deltas = {0.1, 0.3, 0.5, 0.7, 0.9};
  const auto rows = sparse_segment_study(c);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].estimate > rows[i - 1].estimate);
}

TEST_CASE("problem validation") {
  CHECK_THROWS_AS(problem({{-0.5, 0.5}}, {0.0, 0.5}, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(problem({{-0.5, 0.5}}, {0.0, 0.99999}, 10).validate(), std::invalid_argument);
  CHECK_THROWS_AS(problem({{0.5, -0.5}}, {0.0, 0.5}, 10).validate(), std::invalid_argument);
  CHECK_THROWS_AS(problem({{-0.5, 0.5}}, {0.1, 0.0}, 10).validate(), std::invalid_argument);
  DiskProblem p = problem({{-0.5, 0.5}}, {0.0, 0.5}, 10);
  p.eps = 0.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.eps = 1e-4;
  p.arc = Arc{1.0, 0.5};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.arc.reset();
  CHECK_NOTHROW(p.validate());
}

}  // TEST_SUITE
