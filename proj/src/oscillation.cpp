#include "vscope/oscillation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace vscope {

std::vector<double> distribution_function(const ScalarField& f, const std::vector<double>& beta) {
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (!(beta[i] > 0.0)) throw std::invalid_argument("distribution_function: beta must be positive");
    if (i > 0 && !(beta[i] > beta[i - 1])) throw std::invalid_argument("distribution_function: beta must ascend");
  }
  std::vector<double> a(f.size());
  for (std::size_t p = 0; p < f.size(); ++p) a[p] = std::abs(f.values[p]);
  std::sort(a.begin(), a.end());
  std::vector<double> out;
  const double dv = f.grid.cell_volume();
  for (double b : beta) {
    const auto it = std::upper_bound(a.begin(), a.end(), b);
    out.push_back(dv * double(a.end() - it));
  }
  return out;
}

WField make_wfield(const VectorField& omega) {
  const GridSpec& g = omega.grid();
  WField w{ScalarField(g), ScalarField(g)};
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double s = omega[0].values[p] * omega[0].values[p] + omega[1].values[p] * omega[1].values[p] +
                     omega[2].values[p] * omega[2].values[p];
    w.w.values[p] = std::sqrt(1.0 + s);
    w.log_w.values[p] = 0.5 * std::log1p(s);
  }
  return w;
}

double llogl(const VectorField& omega, const ScalarField& psi) {
  if (!(psi.grid == omega.grid())) throw std::invalid_argument("llogl: cutoff grid differs from field grid");
  const WField w = make_wfield(omega);
  double acc = 0.0;
  for (std::size_t p = 0; p < psi.size(); ++p) acc += psi.values[p] * w.w.values[p] * w.log_w.values[p];
  return acc * omega.grid().cell_volume();
}

double llogl(const VectorField& omega) {
  ScalarField one(omega.grid());
  std::fill(one.values.begin(), one.values.end(), 1.0);
  return llogl(omega, one);
}

// Maximal functions --------------------------------------------------------

const char* maximal_name(MaximalVariant v) {
  switch (v) {
    case MaximalVariant::global_smooth: return "global";
    case MaximalVariant::local_smooth: return "local";
    case MaximalVariant::hardy_littlewood: return "hl";
    case MaximalVariant::curly: return "curly";
  }
  return "?";
}

MaximalVariant parse_maximal(const std::string& s) {
  for (auto v : {MaximalVariant::global_smooth, MaximalVariant::local_smooth, MaximalVariant::hardy_littlewood,
                 MaximalVariant::curly})
    if (s == maximal_name(v)) return v;
  throw std::invalid_argument("unknown maximal function variant '" + s + "'");
}

ScalarField bump_kernel(const GridSpec& grid, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("bump_kernel: scale must be positive");
  ScalarField h(grid);
  const int n = grid.n;
  const double L = grid.box_length, dx = grid.dx();
  if (t <= dx) {
    h.values[0] = 1.0 / grid.cell_volume();
    return h;
  }
  const int images = int(std::ceil(t / L));
  const auto centered = [&](int i) { return (i < n / 2 ? i : i - n) * dx; };
  double sum = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int c = -images; c <= images; ++c)
          for (int b = -images; b <= images; ++b)
            for (int a = -images; a <= images; ++a) {
              const double x = (centered(i) + a * L) / t, y = (centered(j) + b * L) / t, z = (centered(k) + c * L) / t;
              const double r2 = x * x + y * y + z * z;
              if (r2 < 1.0) v += std::exp(-1.0 / (1.0 - r2));
            }
        h.at(i, j, k) = v;
        sum += v;
      }
  const double scale = 1.0 / (sum * grid.cell_volume());
  for (double& v : h.values) v *= scale;
  return h;
}

ScalarField smooth_average(const ScalarField& f, double t) {
  const ScalarField h = bump_kernel(f.grid, t);
  SpectralField F = forward(f);
  const SpectralField H = forward(h);
  const double dv = f.grid.cell_volume();
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) F.coeffs[i] *= H.coeffs[i] * dv;
  return inverse(F);
}

ScalarField box_average(const ScalarField& f, int w, Exec exec) {
  const int n = f.grid.n;
  if (w < 0 || 2 * w + 1 > n) throw std::invalid_argument("box_average: half-width must satisfy 0 <= 2w+1 <= n");
  ScalarField out(f.grid, kernels::box_sum(f.values, n, w, exec));
  const double inv = 1.0 / std::pow(2.0 * w + 1.0, 3);
  for (double& v : out.values) v *= inv;
  return out;
}

namespace {

std::vector<int> hl_widths(int n) {
  std::vector<int> w{0};
  for (int k = 1; 2 * k + 1 <= n; k *= 2) w.push_back(k);
  if ((n - 1) / 2 > w.back()) w.push_back((n - 1) / 2);
  return w;
}

std::vector<double> smooth_scales(const GridSpec& g, bool local) {
  std::vector<double> t{0.0};
  const int J = int(std::floor(std::log2(1.0 / g.dx())));
  for (int j = local ? 1 : -2; j <= J; ++j) t.push_back(std::ldexp(1.0, -j));
  return t;
}

ScalarField abs_field(const ScalarField& f) {
  ScalarField a = f;
  for (double& v : a.values) v = std::abs(v);
  return a;
}

void max_into(ScalarField& m, const ScalarField& a) {
  for (std::size_t p = 0; p < m.size(); ++p) m.values[p] = std::max(m.values[p], std::abs(a.values[p]));
}

ScalarField hardy_littlewood(const ScalarField& f, Exec exec) {
  const ScalarField a = abs_field(f);
  ScalarField m = a;
  for (int w : hl_widths(f.grid.n))
    if (w > 0) max_into(m, box_average(a, w, exec));
  return m;
}

}  // namespace

std::vector<double> maximal_scales(const GridSpec& grid, MaximalVariant v) {
  if (v == MaximalVariant::global_smooth || v == MaximalVariant::local_smooth)
    return smooth_scales(grid, v == MaximalVariant::local_smooth);
  std::vector<double> r;
  for (int w : hl_widths(grid.n)) r.push_back(w * grid.dx());
  return r;
}

ScalarField maximal_function(const ScalarField& f, MaximalVariant v, Exec exec) {
  for (double x : f.values)
    if (!std::isfinite(x)) throw std::invalid_argument("maximal_function: field is not finite");
  switch (v) {
    case MaximalVariant::global_smooth:
    case MaximalVariant::local_smooth: {
      ScalarField m = abs_field(f);
      for (double t : smooth_scales(f.grid, v == MaximalVariant::local_smooth))
        if (t > f.grid.dx()) max_into(m, smooth_average(f, t));
      return m;
    }
    case MaximalVariant::hardy_littlewood: return hardy_littlewood(f, exec);
    case MaximalVariant::curly: {
      ScalarField s = f;
      for (double& x : s.values) x = std::sqrt(std::abs(x));
      ScalarField m = hardy_littlewood(s, exec);
      for (double& x : m.values) x *= x;
      return m;
    }
  }
  return f;
}

// Mean oscillation norms ---------------------------------------------------

const char* bmo_name(BmoVariant v) {
  switch (v) {
    case BmoVariant::BMO: return "BMO";
    case BmoVariant::bmo: return "bmo";
    case BmoVariant::weighted: return "weighted";
  }
  return "?";
}

BmoVariant parse_bmo(const std::string& s) {
  for (auto v : {BmoVariant::BMO, BmoVariant::bmo, BmoVariant::weighted})
    if (s == bmo_name(v)) return v;
  throw std::invalid_argument("unknown bmo variant '" + s + "' (BMO, bmo, weighted)");
}

double weight_value(Weight w, double r) {
  if (w == Weight::one) return 1.0;
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("weight 1/|log r| needs r in (0, 1)");
  return 1.0 / std::abs(std::log(r));
}

int OscillationConfig::effective_stride(const GridSpec& grid) const {
  return stride > 0 ? stride : std::max(1, grid.n / 16);
}

void OscillationConfig::validate(const GridSpec& grid) const {
  grid.validate();
  const int s = effective_stride(grid);
  if ((grid.n + s - 1) / s < 8)
    throw std::invalid_argument("oscillation: stride " + std::to_string(s) + " leaves fewer than 8 centers per axis");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > grid.dx() && radii[i] < 0.5))
      throw std::invalid_argument("oscillation: radii must lie in (dx, 1/2)");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw std::invalid_argument("oscillation: radii must be descending");
  }
  if (!(delta > 0.0)) throw std::invalid_argument("oscillation: delta must be positive");
}

std::vector<int> small_scale_sides(const GridSpec& grid, const OscillationConfig& cfg) {
  cfg.validate(grid);
  std::vector<double> r = cfg.radii;
  if (r.empty())
    for (double x = 0.25; x > grid.dx() * (1.0 + 1e-12); x /= 2.0) r.push_back(x);
  std::vector<int> sides;
  for (double x : r) {
    const int m = std::max(2, int(std::lround(x / grid.dx())));
    if (m > grid.n || m * grid.dx() >= 0.5) continue;
    if (!sides.empty() && sides.back() == m) continue;
    sides.push_back(m);
  }
  return sides;
}

namespace {

int stride_for(int side, int base) { return std::max(base, side / 2); }

RadiusOscillation oscillation_at(const ScalarField& f, int side, int base_stride, Exec exec) {
  const int s = stride_for(side, base_stride);
  RadiusOscillation r;
  r.side = side;
  r.r = side * f.grid.dx();
  r.centers = (f.grid.n + s - 1) / s;
  r.oscillation = kernels::max_mean_oscillation(f.values, f.grid.n, side, s, exec).value;
  return r;
}

std::vector<int> large_sides(const GridSpec& g, double delta) {
  std::vector<int> out;
  for (double r = delta;; r *= 2.0) {
    const int m = int(std::lround(r / g.dx()));
    if (m > g.n) break;
    if (m >= 1 && (out.empty() || out.back() != m)) out.push_back(m);
  }
  return out;
}

}  // namespace

BmoNorm bmo_norm(const ScalarField& f, BmoVariant v, const OscillationConfig& cfg) {
  const GridSpec& g = f.grid;
  const auto sides = small_scale_sides(g, cfg);
  const int base = cfg.effective_stride(g);
  BmoNorm out;
  out.variant = v;
  const Weight weight = v == BmoVariant::weighted ? cfg.weight : Weight::one;
  double running = 0.0;
  for (int m : sides) {
    if (v == BmoVariant::bmo && !(m * g.dx() < cfg.delta)) continue;
    RadiusOscillation r = oscillation_at(f, m, base, cfg.exec);
    r.weighted = r.oscillation / weight_value(weight, r.r);
    running = std::max(running, r.weighted);
    r.running = running;
    out.small.push_back(r);
  }
  out.oscillation = running;
  switch (v) {
    case BmoVariant::weighted: {
      double l1 = 0.0;
      for (double x : f.values) l1 += std::abs(x);
      out.l1 = l1 * g.cell_volume();
      out.value = out.l1 + out.oscillation;
      break;
    }
    case BmoVariant::bmo: {
      for (int m : large_sides(g, cfg.delta)) {
        RadiusOscillation r;
        r.side = m;
        r.r = m * g.dx();
        const int s = stride_for(m, base);
        r.centers = (g.n + s - 1) / s;
        r.oscillation = kernels::max_abs_average(f.values, g.n, m, s, cfg.exec);
        r.weighted = r.oscillation;
        out.large_scale = std::max(out.large_scale, r.oscillation);
        r.running = out.large_scale;
        out.large.push_back(r);
      }
      out.value = out.oscillation + out.large_scale;
      break;
    }
    case BmoVariant::BMO: {
      double sup = out.oscillation;
      for (int m : large_sides(g, cfg.delta)) {
        RadiusOscillation r = oscillation_at(f, m, base, cfg.exec);
        r.weighted = r.oscillation;
        sup = std::max(sup, r.oscillation);
        r.running = sup;
        out.large.push_back(r);
      }
      out.value = sup;
      break;
    }
  }
  return out;
}

// Direction monitor --------------------------------------------------------

VectorField direction_field(const VectorField& omega, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("direction_field: eps must be positive");
  VectorField xi(omega.grid());
  for (std::size_t p = 0; p < omega.size(); ++p) {
    const double m = std::sqrt(omega[0].values[p] * omega[0].values[p] + omega[1].values[p] * omega[1].values[p] +
                               omega[2].values[p] * omega[2].values[p]);
    if (m > eps)
      for (int c = 0; c < 3; ++c) xi[c].values[p] = omega[c].values[p] / m;
  }
  return xi;
}

DirectionMonitor direction_monitor(const Trajectory& traj, const ScalarField& psi, const MonitorConfig& cfg) {
  if (cfg.eps_absolute && !(*cfg.eps_absolute > 0.0))
    throw std::invalid_argument("direction_monitor: eps_dir must be positive");
  if (!cfg.eps_absolute && !(cfg.eps_relative > 0.0))
    throw std::invalid_argument("direction_monitor: eps_dir must be positive");
  if (!(psi.grid == traj.grid())) throw std::invalid_argument("direction_monitor: cutoff grid differs");
  OscillationConfig oc = cfg.oscillation;
  oc.weight = Weight::inv_log;
  DirectionMonitor mon;
  double run_w = 0.0, run_l = 0.0;
  for (const Snapshot& s : traj.snapshots) {
    const double wmax = max_magnitude(s.omega);
    const double eps = cfg.eps_absolute ? *cfg.eps_absolute : cfg.eps_relative * wmax;
    double sup = 0.0, weighted = 0.0, osc = 0.0;
    if (wmax > 0.0 && eps > 0.0) {
      const VectorField xi = direction_field(s.omega, eps);
      for (int c = 0; c < 3; ++c) {
        ScalarField g = xi[c];
        for (std::size_t p = 0; p < g.size(); ++p) g.values[p] *= psi.values[p];
        sup = std::max(sup, max_abs(g));
        const BmoNorm b = bmo_norm(g, BmoVariant::weighted, oc);
        weighted = std::max(weighted, b.value);
        osc = std::max(osc, b.oscillation);
      }
    }
    const double l = llogl(s.omega, psi);
    run_w = std::max(run_w, weighted);
    run_l = std::max(run_l, l);
    mon.times.push_back(s.time);
    mon.eps_dir.push_back(eps);
    mon.sup_norm.push_back(sup);
    mon.weighted.push_back(weighted);
    mon.oscillation.push_back(osc);
    mon.llogl.push_back(l);
    mon.running_weighted.push_back(run_w);
    mon.running_llogl.push_back(run_l);
  }
  return mon;
}

// Sampling studies ---------------------------------------------------------

RatioStats make_stats(std::vector<std::string> family, std::vector<double> values) {
  RatioStats s;
  s.family = std::move(family);
  s.values = std::move(values);
  if (s.values.empty()) return s;
  std::vector<double> v = s.values;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  const std::size_t m = v.size() / 2;
  s.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  return s;
}

double log_maximal_bmo(const ScalarField& f, const OscillationConfig& cfg, bool* clipped) {
  ScalarField m = maximal_function(f, MaximalVariant::hardy_littlewood, cfg.exec);
  for (double& x : m.values) {
    if (x < 1e-300) {
      x = 1e-300;
      if (clipped) *clipped = true;
    }
    x = std::log(x);
  }
  return bmo_norm(m, BmoVariant::BMO, cfg).value;
}

namespace {

// Sum of random Fourier modes with |k|^-slope amplitudes, unit rms.
ScalarField random_modes(const GridSpec& g, std::mt19937_64& rng, int kmax, double slope, int modes) {
  std::uniform_int_distribution<int> kd(-kmax, kmax);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  std::vector<std::array<double, 5>> m;
  while (int(m.size()) < modes) {
    const int a = kd(rng), b = kd(rng), c = kd(rng);
    const double k = std::sqrt(double(a * a + b * b + c * c));
    if (k == 0.0) continue;
    m.push_back({double(a), double(b), double(c), std::pow(k, -slope), ph(rng)});
  }
  ScalarField f(g);
  const double ku = g.k_unit();
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec3 x = g.position(i, j, k);
        double v = 0.0;
        for (const auto& q : m) v += q[3] * std::cos(ku * (q[0] * x[0] + q[1] * x[1] + q[2] * x[2]) + q[4]);
        f.at(i, j, k) = v;
      }
  const double rms = l2_norm(f) / std::sqrt(g.volume());
  if (rms > 0.0)
    for (double& v : f.values) v /= rms;
  return f;
}

ScalarField tube_field(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> axis(0, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double L = g.box_length;
  const int ax = axis(rng), a = (ax + 1) % 3, b = (ax + 2) % 3;
  const double ca = u(rng) * L, cb = u(rng) * L;
  const double rad = 2.0 * g.dx() + u(rng) * (L / 8.0 - 2.0 * g.dx());
  ScalarField f(g);
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec3 x = g.position(i, j, k);
        double da = std::remainder(x[a] - ca, L), db = std::remainder(x[b] - cb, L);
        f.at(i, j, k) = 1e-6 + std::exp(-(da * da + db * db) / (rad * rad));
      }
  return f;
}

}  // namespace

ScalarField positive_sample(const GridSpec& grid, int index, std::uint64_t seed, std::string* family) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + std::uint64_t(index));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> kd(2, 5);
  ScalarField f;
  switch (index % 4) {
    case 0: {
      f = random_modes(grid, rng, kd(rng), 0.5 + u(rng), 24);
      const double s = 0.5 + u(rng);
      for (double& v : f.values) v = std::exp(s * v);
      if (family) *family = "random_spectrum";
      break;
    }
    case 1: {
      f = ScalarField(grid);
      std::uniform_int_distribution<std::size_t> pos(0, grid.size() - 1);
      const int count = 1 + int(u(rng) * 5);
      for (double& v : f.values) v = 1e-3;
      for (int c = 0; c < count; ++c) f.values[pos(rng)] += std::pow(10.0, 2.0 * u(rng));
      if (family) *family = "spikes";
      break;
    }
    case 2: {
      f = tube_field(grid, rng);
      if (family) *family = "tube";
      break;
    }
    default: {
      f = random_modes(grid, rng, kd(rng), 0.5 + u(rng), 24);
      const ScalarField t = tube_field(grid, rng);
      for (std::size_t p = 0; p < f.size(); ++p) f.values[p] = std::abs(f.values[p]) * t.values[p] + 1e-9;
      if (family) *family = "product";
      break;
    }
  }
  return f;
}

CoifmanRochbergResult coifman_rochberg_check(const GridSpec& grid, int samples, std::uint64_t seed,
                                             const OscillationConfig& cfg) {
  if (samples < 20) throw std::invalid_argument("coifman_rochberg_check: need at least 20 samples");
  CoifmanRochbergResult res;
  std::vector<std::string> fam;
  std::vector<double> vals;
  for (int i = 0; i < samples; ++i) {
    std::string name;
    const ScalarField f = positive_sample(grid, i, seed, &name);
    const double base = log_maximal_bmo(f, cfg, &res.clipped);
    for (double lambda : {1e-6, 1e6}) {
      ScalarField g = f;
      for (double& v : g.values) v *= lambda;
      res.invariance_error = std::max(res.invariance_error, std::abs(log_maximal_bmo(g, cfg, &res.clipped) - base));
    }
    fam.push_back(name);
    vals.push_back(base);
  }
  res.norms = make_stats(std::move(fam), std::move(vals));
  return res;
}

double div_curl_ratio(const VectorField& E, const VectorField& B) {
  if (!(E.grid() == B.grid())) throw std::invalid_argument("div_curl_ratio: grid mismatch");
  const GridSpec& g = E.grid();
  const double e2 = l2_norm(E), b2 = l2_norm(B);
  if (e2 == 0.0 || b2 == 0.0) return 0.0;
  if (divergence_ratio(forward(E)) > 1e-8) throw std::invalid_argument("div_curl_ratio: E is not divergence-free");
  if (l2_norm(curl(B)) > 1e-8 * b2 * g.k_unit() * g.n) throw std::invalid_argument("div_curl_ratio: B is not curl-free");
  ScalarField dot(g);
  for (std::size_t p = 0; p < dot.size(); ++p)
    dot.values[p] = E[0].values[p] * B[0].values[p] + E[1].values[p] * B[1].values[p] + E[2].values[p] * B[2].values[p];
  const ScalarField m = maximal_function(dot, MaximalVariant::global_smooth);
  double l1 = 0.0;
  for (double v : m.values) l1 += v;
  return l1 * g.cell_volume() / (e2 * b2);
}

RatioStats div_curl_check(const GridSpec& grid, int samples, std::uint64_t seed) {
  if (samples < 20) throw std::invalid_argument("div_curl_check: need at least 20 samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> kd(2, 4);
  std::vector<std::string> fam;
  std::vector<double> vals;
  while (int(vals.size()) < samples) {
    VectorField E(grid);
    for (int c = 0; c < 3; ++c) E[c] = random_modes(grid, rng, kd(rng), 0.5 + u(rng), 16);
    SpectralVector eh = forward(E);
    leray_project(eh);
    E = inverse(eh);
    const SpectralVector bh = gradient(forward(random_modes(grid, rng, kd(rng), 0.5 + u(rng), 16)));
    const VectorField B = inverse(bh);
    if (l2_norm(E) < 1e-12 || l2_norm(B) < 1e-12) continue;
    fam.push_back("random");
    vals.push_back(div_curl_ratio(E, B));
  }
  return make_stats(std::move(fam), std::move(vals));
}

}  // namespace vscope
