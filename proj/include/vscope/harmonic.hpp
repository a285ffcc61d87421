#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vscope {

/// h(delta) = (2/pi) asin((1 - delta^2) / (1 + delta^2)); delta must lie in (0, 1).
double h_delta(double delta);
/// (1 - h) / h, the smallest admissible exponent alpha.
double alpha_min(double delta);
/// ||omega||_inf / d0^alpha with alpha = alpha_min(delta) unless given.
double M_delta(double omega_inf, double d0, double delta, std::optional<double> alpha = std::nullopt);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Arc of the unit circle between angles theta0 < theta1 (radians).
struct Arc {
  double theta0 = 0.0;
  double theta1 = 0.0;
};

/// Sort and merge overlapping intervals; clip to [-1, 1]; drop empty ones.
std::vector<Interval> normalize_intervals(std::vector<Interval> k);

struct DiskProblem {
  std::vector<Interval> absorbing;  // subsets of the real diameter
  std::complex<double> z0{0.0, 0.5};
  std::size_t walkers = 10000;
  double eps = 1e-4;
  std::uint64_t seed = 0;
  /// Optional absorbing arc on the circle; walkers ending there count as hits.
  std::optional<Arc> arc;
  std::size_t max_steps = 100000;

  void validate() const;
};

struct MeasureEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t walkers = 0;
  std::size_t hits = 0;          // absorbed on K or on the arc
  std::size_t circle_first = 0;  // everything else, including capped walkers
  std::size_t capped = 0;        // walkers stopped at max_steps
  std::string bias_note;
};

/// Walk-on-spheres estimate of the harmonic measure of K (plus the arc, if any)
/// seen from z0 in the unit disk.
MeasureEstimate harmonic_measure_ws(const DiskProblem& p);

enum class Layout { centered, periodic_blocks, random_blocks };
const char* layout_name(Layout l);
Layout parse_layout(const std::string& s);

/// Absorbing set covering a fraction delta of [-1, 1].
std::vector<Interval> sparse_layout(Layout layout, double delta, int blocks, std::uint64_t seed);

struct StudyRow {
  Layout layout = Layout::centered;
  double delta = 0.0;
  std::complex<double> z0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::optional<double> h;  // empty at delta = 0 or 1
};

struct StudyConfig {
  std::vector<double> deltas{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<std::complex<double>> points{{0.0, 0.5}};
  std::vector<Layout> layouts{Layout::centered, Layout::periodic_blocks, Layout::random_blocks};
  int blocks = 8;
  std::size_t walkers = 20000;
  std::uint64_t seed = 0;
  double eps = 1e-4;
};

/// Rows ordered by layout, then point, then delta. Every row reuses the same
/// seed, so walkers share random streams across the table.
std::vector<StudyRow> sparse_segment_study(const StudyConfig& cfg);

}  // namespace vscope
