#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vscope/grid.hpp"
#include "vscope/solver.hpp"

namespace vscope {

/// Omega_t(M) = {|omega| > M} on grid points. Keeps |omega| so that segment
/// occupancy can interpolate between grid points.
struct SuperlevelMask {
  GridSpec grid;
  double threshold = 0.0;
  double source_time = 0.0;
  ScalarField magnitude;
  std::vector<std::uint8_t> mask;

  std::size_t count() const;
  double volume() const { return double(count()) * grid.cell_volume(); }
  bool contains(std::size_t i) const { return mask[i] != 0; }
};

SuperlevelMask superlevel(const VectorField& omega, double M, double time = 0.0);
SuperlevelMask superlevel(const ScalarField& magnitude, double M, double time = 0.0);

/// Periodic trilinear interpolation at a physical point.
double interpolate(const ScalarField& f, const Vec3& x);

/// Quadrature points used for a segment of half-length r: max(33, 4 ceil(r/dx) + 1).
int occupancy_points(double r, double dx);

/// |S n (x0 - r d, x0 + r d)| / 2r by composite trapezoid quadrature of the
/// interpolated indicator |omega| > M.
double segment_occupancy(const SuperlevelMask& s, const Vec3& x0, const Vec3& d, double r);

/// n_dir Fibonacci-sphere directions followed by their antipodes.
std::vector<Vec3> fibonacci_directions(int n_dir);

/// Grid points of the mask, thinned with a uniform stride to at most max_probes.
std::vector<Vec3> default_probes(const SuperlevelMask& s, std::size_t max_probes = 4096);

struct ProbeResult {
  Vec3 x0{};
  Vec3 direction{};
  double occupancy = 0.0;
  double r = 0.0;
  bool pass = false;
};

struct SparsenessReport {
  double r = 0.0;
  double delta = 0.0;
  int n_dir = 0;
  std::vector<ProbeResult> probes;
  std::size_t passing = 0;
  /// 1 for an empty probe set.
  double pass_fraction() const { return probes.empty() ? 1.0 : double(passing) / double(probes.size()); }
  bool all_pass() const { return passing == probes.size(); }
};

SparsenessReport sparseness_scan(const SuperlevelMask& s, const std::vector<Vec3>& probes, double r, double delta,
                                 int n_dir = 192);

/// Smallest r on the ladder at which every probe passes; empty if none does.
std::optional<double> sparseness_scale(const SuperlevelMask& s, const std::vector<Vec3>& probes, double delta,
                                       const std::vector<double>& ladder, int n_dir = 192);

/// Geometric ladder r_min * q^j up to r_max inclusive.
std::vector<double> radius_ladder(double r_min, double r_max, double q);

struct RegularityConditionConfig {
  double d0 = 1.0;
  double c1 = 2.0;
  double delta = 0.5;
  /// Overrides (1 - h)/h when set; must not be smaller.
  std::optional<double> alpha;
  int n_dir = 192;
  std::size_t max_probes = 4096;
  /// Scales tried per snapshot: r_max, r_max/2, ...
  int r_levels = 4;

  void validate() const;
  double h() const;
  double alpha_value() const;
  double threshold(double omega_inf) const;
};

struct RegularityEntry {
  double t = 0.0;
  double omega_inf = 0.0;
  double tau = 0.0;  // 1 / (d0^2 ||omega(t)||_inf)
  double window_lo = 0.0;
  double window_hi = 0.0;
  double threshold = 0.0;
  double r_max = 0.0;
  bool window_sampled = false;
  std::optional<double> s;               // chosen snapshot time in the window
  std::optional<bool> condition_ii;      // empty when the window is unsampled
  double pass_fraction = 0.0;
  std::size_t probes = 0;
  bool condition_i = false;              // t + tau >= horizon
  std::string note;
};

struct RegularityReport {
  RegularityConditionConfig config;
  double h = 0.0;
  double alpha = 0.0;
  double horizon = 0.0;
  std::vector<RegularityEntry> entries;
};

RegularityReport regularity_condition_report(const Trajectory& traj, const RegularityConditionConfig& cfg);

struct CriticalityRecord {
  double c1 = 0.0;
  double l1 = 0.0;
  double linf = 0.0;
  double threshold = 0.0;
  double volume = 0.0;
  /// Vol * ||omega||_inf / (c1 ||omega||_1); at most 1.
  std::optional<double> chebyshev_ratio;
  double filament_length = 0.0;
  /// (Vol / filament_length)^(1/2).
  std::optional<double> transversal_scale;
  /// transversal_scale / ||omega||_inf^(-1/2).
  std::optional<double> transversal_ratio;
  std::vector<double> betas;
  std::vector<double> lambdas;
  /// Least-squares slope of log lambda against log beta over beta in [linf/100, linf].
  std::optional<double> lambda_slope;
};

/// filament_length defaults to the box length.
CriticalityRecord criticality_scales(const VectorField& omega, double c1, std::optional<double> filament_length = {},
                                     int beta_samples = 24);

/// Least-squares slope of log y against log x over entries with x, y > 0.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace vscope
