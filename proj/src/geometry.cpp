#include "vscope/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "vscope/harmonic.hpp"

namespace vscope {

std::size_t SuperlevelMask::count() const {
  std::size_t c = 0;
  for (auto m : mask) c += m;
  return c;
}

SuperlevelMask superlevel(const ScalarField& magnitude, double M, double time) {
  if (!(M >= 0.0)) throw std::invalid_argument("superlevel: threshold must be >= 0");
  SuperlevelMask s;
  s.grid = magnitude.grid;
  s.threshold = M;
  s.source_time = time;
  s.magnitude = magnitude;
  s.mask.resize(magnitude.size());
  for (std::size_t i = 0; i < magnitude.size(); ++i) s.mask[i] = magnitude.values[i] > M ? 1 : 0;
  return s;
}

SuperlevelMask superlevel(const VectorField& omega, double M, double time) {
  return superlevel(magnitude(omega), M, time);
}

double interpolate(const ScalarField& f, const Vec3& x) {
  const int n = f.grid.n;
  const double inv_dx = 1.0 / f.grid.dx();
  int i0[3];
  double w[3];
  for (int c = 0; c < 3; ++c) {
    const double s = x[c] * inv_dx;
    const double fl = std::floor(s);
    w[c] = s - fl;
    long idx = long(fl) % n;
    if (idx < 0) idx += n;
    i0[c] = int(idx);
  }
  const int i1[3] = {(i0[0] + 1) % n, (i0[1] + 1) % n, (i0[2] + 1) % n};
  double v = 0.0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dxi = 0; dxi < 2; ++dxi) {
        const double wt = (dxi ? w[0] : 1.0 - w[0]) * (dy ? w[1] : 1.0 - w[1]) * (dz ? w[2] : 1.0 - w[2]);
        if (wt == 0.0) continue;
        v += wt * f.at(dxi ? i1[0] : i0[0], dy ? i1[1] : i0[1], dz ? i1[2] : i0[2]);
      }
  return v;
}

int occupancy_points(double r, double dx) { return std::max(33, 4 * int(std::ceil(r / dx)) + 1); }

namespace {

void check_radius(const GridSpec& g, double r) {
  if (!(r > 0.0 && r <= g.box_length / 2.0))
    throw std::invalid_argument("segment_occupancy: r must lie in (0, L/2], got " + std::to_string(r));
}

double occupancy_unchecked(const SuperlevelMask& s, const Vec3& x0, const Vec3& d, double r, int m) {
  const double h = 2.0 * r / (m - 1);
  double acc = 0.0;
  for (int q = 0; q < m; ++q) {
    const double t = -r + q * h;
    const Vec3 x{x0[0] + t * d[0], x0[1] + t * d[1], x0[2] + t * d[2]};
    if (interpolate(s.magnitude, x) > s.threshold) acc += (q == 0 || q == m - 1) ? 0.5 : 1.0;
  }
  return acc * h / (2.0 * r);
}

struct Best {
  double occupancy = 2.0;
  int dir = 0;
};

// Minimum occupancy over directions; with early_exit, stops at the first
// direction meeting delta.
Best best_direction(const SuperlevelMask& s, const Vec3& x0, const std::vector<Vec3>& dirs, double r, double delta,
                    bool early_exit) {
  const int m = occupancy_points(r, s.grid.dx());
  Best b;
  for (int k = 0; k < int(dirs.size()); ++k) {
    const double o = occupancy_unchecked(s, x0, dirs[k], r, m);
    if (o < b.occupancy) b = {o, k};
    if (early_exit && b.occupancy <= delta) break;
    if (b.occupancy == 0.0) break;
  }
  return b;
}

}  // namespace

double segment_occupancy(const SuperlevelMask& s, const Vec3& x0, const Vec3& d, double r) {
  check_radius(s.grid, r);
  const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  if (std::abs(len - 1.0) > 1e-12) throw std::invalid_argument("segment_occupancy: direction must be a unit vector");
  return occupancy_unchecked(s, x0, d, r, occupancy_points(r, s.grid.dx()));
}

std::vector<Vec3> fibonacci_directions(int n_dir) {
  if (n_dir < 1) throw std::invalid_argument("fibonacci_directions: n_dir must be positive");
  std::vector<Vec3> dirs(2 * std::size_t(n_dir));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n_dir; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n_dir;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    Vec3 d{rho * std::cos(phi), rho * std::sin(phi), z};
    const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    for (double& c : d) c /= len;
    dirs[i] = d;
    dirs[i + n_dir] = {-d[0], -d[1], -d[2]};
  }
  return dirs;
}

std::vector<Vec3> default_probes(const SuperlevelMask& s, std::size_t max_probes) {
  const std::size_t count = s.count();
  if (count == 0 || max_probes == 0) return {};
  const std::size_t stride = (count + max_probes - 1) / max_probes;
  std::vector<Vec3> out;
  std::size_t seen = 0;
  const int n = s.grid.n;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (s.mask[s.grid.index(i, j, k)]) {
          if (seen % stride == 0) out.push_back(s.grid.position(i, j, k));
          ++seen;
        }
  return out;
}

SparsenessReport sparseness_scan(const SuperlevelMask& s, const std::vector<Vec3>& probes, double r, double delta,
                                 int n_dir) {
  check_radius(s.grid, r);
  if (n_dir < 32) throw std::invalid_argument("sparseness_scan: n_dir must be >= 32");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("sparseness_scan: delta must lie in (0, 1)");
  const auto dirs = fibonacci_directions(n_dir);
  SparsenessReport rep;
  rep.r = r;
  rep.delta = delta;
  rep.n_dir = n_dir;
  rep.probes.resize(probes.size());
  const std::ptrdiff_t np = std::ptrdiff_t(probes.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t p = 0; p < np; ++p) {
    const Best b = best_direction(s, probes[p], dirs, r, delta, false);
    ProbeResult& pr = rep.probes[p];
    pr.x0 = probes[p];
    pr.direction = dirs[b.dir];
    pr.occupancy = b.occupancy;
    pr.r = r;
    pr.pass = b.occupancy <= delta;
  }
  for (const auto& pr : rep.probes) rep.passing += pr.pass;
  return rep;
}

std::vector<double> radius_ladder(double r_min, double r_max, double q) {
  if (!(r_min > 0.0 && r_max >= r_min && q > 1.0)) throw std::invalid_argument("radius_ladder: need 0 < r_min <= r_max, q > 1");
  std::vector<double> out;
  for (double r = r_min; r <= r_max * (1.0 + 1e-12); r *= q) out.push_back(r);
  return out;
}

std::optional<double> sparseness_scale(const SuperlevelMask& s, const std::vector<Vec3>& probes, double delta,
                                       const std::vector<double>& ladder, int n_dir) {
  for (double r : ladder)
    if (sparseness_scan(s, probes, r, delta, n_dir).all_pass()) return r;
  return std::nullopt;
}

void RegularityConditionConfig::validate() const {
  if (!(d0 > 0.0)) throw std::invalid_argument("RegularityConditionConfig: d0 must be positive");
  if (!(c1 > 1.0)) throw std::invalid_argument("RegularityConditionConfig: c1 must exceed 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("RegularityConditionConfig: delta must lie in (0, 1)");
  if (alpha && *alpha < alpha_min(delta))
    throw std::invalid_argument("RegularityConditionConfig: alpha must be >= (1 - h)/h");
  if (n_dir < 32) throw std::invalid_argument("RegularityConditionConfig: n_dir must be >= 32");
  if (r_levels < 1) throw std::invalid_argument("RegularityConditionConfig: r_levels must be >= 1");
}

double RegularityConditionConfig::h() const { return h_delta(delta); }
double RegularityConditionConfig::alpha_value() const { return alpha.value_or(alpha_min(delta)); }
double RegularityConditionConfig::threshold(double omega_inf) const {
  return M_delta(omega_inf, d0, delta, alpha_value());
}

RegularityReport regularity_condition_report(const Trajectory& traj, const RegularityConditionConfig& cfg) {
  cfg.validate();
  RegularityReport rep;
  rep.config = cfg;
  rep.h = cfg.h();
  rep.alpha = cfg.alpha_value();
  rep.horizon = traj.final_time();
  const GridSpec& g = traj.grid();
  const auto dirs = fibonacci_directions(cfg.n_dir);
  std::vector<double> norms;
  for (const auto& sn : traj.snapshots) norms.push_back(max_magnitude(sn.omega));

  for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
    RegularityEntry e;
    e.t = traj.snapshots[j].time;
    e.omega_inf = norms[j];
    if (e.omega_inf == 0.0) {
      e.tau = std::numeric_limits<double>::infinity();
      e.window_lo = e.window_hi = e.tau;
      e.window_sampled = true;
      e.condition_ii = true;
      e.pass_fraction = 1.0;
      e.condition_i = true;
      e.note = "vacuous: omega vanishes identically, empty super-level set";
      rep.entries.push_back(e);
      continue;
    }
    e.tau = 1.0 / (cfg.d0 * cfg.d0 * e.omega_inf);
    e.window_lo = e.t + e.tau / 4.0;
    e.window_hi = e.t + e.tau;
    e.threshold = cfg.threshold(e.omega_inf);
    e.r_max = std::min(1.0 / (2.0 * cfg.d0 * cfg.d0 * std::sqrt(e.omega_inf)), g.box_length / 2.0);
    e.condition_i = e.t + e.tau >= rep.horizon;
    const double tol = 1e-12 * std::max(1.0, e.window_hi);

    double best = -1.0;
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      const double s = traj.snapshots[k].time;
      if (s < e.window_lo - tol || s > e.window_hi + tol) continue;
      e.window_sampled = true;
      const SuperlevelMask mask = superlevel(traj.snapshots[k].omega, e.threshold, s);
      const auto probes = default_probes(mask, cfg.max_probes);
      std::vector<std::uint8_t> pass(probes.size(), 0);
      const std::ptrdiff_t np = std::ptrdiff_t(probes.size());
#pragma omp parallel for schedule(dynamic, 16)
      for (std::ptrdiff_t p = 0; p < np; ++p) {
        double r = e.r_max;
        for (int level = 0; level < cfg.r_levels && !pass[p]; ++level, r /= 2.0)
          pass[p] = best_direction(mask, probes[p], dirs, r, cfg.delta, true).occupancy <= cfg.delta;
      }
      std::size_t passing = 0;
      for (auto v : pass) passing += v;
      const double frac = probes.empty() ? 1.0 : double(passing) / double(probes.size());
      if (frac > best) {
        best = frac;
        e.s = s;
        e.pass_fraction = frac;
        e.probes = probes.size();
        e.condition_ii = passing == probes.size();
      }
    }
    if (!e.window_sampled) e.note = "window unsampled: no snapshot in [t + tau/4, t + tau]";
    rep.entries.push_back(e);
  }
  return rep;
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) return std::nullopt;
  const double den = m * sxx - sx * sx;
  if (den <= 0.0) return std::nullopt;
  return (m * sxy - sx * sy) / den;
}

CriticalityRecord criticality_scales(const VectorField& omega, double c1, std::optional<double> filament_length,
                                     int beta_samples) {
  if (!(c1 > 1.0)) throw std::invalid_argument("criticality_scales: c1 must exceed 1");
  if (beta_samples < 2) throw std::invalid_argument("criticality_scales: beta_samples must be >= 2");
  const GridSpec& g = omega.grid();
  const ScalarField mag = magnitude(omega);
  CriticalityRecord rec;
  rec.c1 = c1;
  rec.filament_length = filament_length.value_or(g.box_length);
  if (!(rec.filament_length > 0.0)) throw std::invalid_argument("criticality_scales: filament_length must be positive");
  rec.l1 = integral(mag);
  rec.linf = max_abs(mag);
  if (rec.linf == 0.0) return rec;
  rec.threshold = rec.linf / c1;
  std::size_t count = 0;
  for (double v : mag.values) count += v > rec.threshold;
  rec.volume = double(count) * g.cell_volume();
  rec.chebyshev_ratio = rec.volume * rec.linf / (c1 * rec.l1);
  rec.transversal_scale = std::sqrt(rec.volume / rec.filament_length);
  rec.transversal_ratio = *rec.transversal_scale * std::sqrt(rec.linf);

  std::vector<double> sorted = mag.values;
  std::sort(sorted.begin(), sorted.end());
  for (int j = 0; j < beta_samples; ++j) {
    const double beta = rec.linf * std::pow(100.0, -1.0 + double(j) / double(beta_samples));
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), beta);
    rec.betas.push_back(beta);
    rec.lambdas.push_back(double(above) * g.cell_volume());
  }
  rec.lambda_slope = loglog_slope(rec.betas, rec.lambdas);
  return rec;
}

}  // namespace vscope
