#include "vscope/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vscope {

const char* scenario_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::taylor_green_2d3d: return "taylor_green_2d3d";
    case ScenarioKind::abc_flow: return "abc_flow";
    case ScenarioKind::burgers_tube: return "burgers_tube";
    case ScenarioKind::random_solenoidal: return "random_solenoidal";
    case ScenarioKind::clumped_ball: return "clumped_ball";
  }
  return "?";
}

ScenarioKind parse_scenario(const std::string& s) {
  for (auto k : {ScenarioKind::taylor_green_2d3d, ScenarioKind::abc_flow, ScenarioKind::burgers_tube,
                 ScenarioKind::random_solenoidal, ScenarioKind::clumped_ball})
    if (s == scenario_name(k)) return k;
  throw std::invalid_argument("unknown scenario kind '" + s + "'");
}

double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

void Scenario::validate() const {
  grid.validate();
  if (!std::isfinite(amplitude)) throw std::invalid_argument("Scenario: amplitude must be finite");
  switch (kind) {
    case ScenarioKind::taylor_green_2d3d:
    case ScenarioKind::abc_flow:
      if (wavenumber < 1 || 3 * wavenumber > grid.n)
        throw std::invalid_argument("Scenario: wavenumber must lie in [1, n/3]");
      break;
    case ScenarioKind::burgers_tube:
      if (!(tube_radius > 4.0 * grid.dx()))
        throw std::invalid_argument("Scenario: under-resolved tube, need a > 4 dx = " + std::to_string(4.0 * grid.dx()));
      if (!(tube_radius < grid.box_length / 4.0)) throw std::invalid_argument("Scenario: tube radius must be < L/4");
      if (axis < 0 || axis > 2) throw std::invalid_argument("Scenario: axis must be 0, 1 or 2");
      if (!std::isfinite(circulation)) throw std::invalid_argument("Scenario: circulation must be finite");
      break;
    case ScenarioKind::random_solenoidal:
      if (k_max < 1) throw std::invalid_argument("Scenario: k_max must be >= 1");
      if (!std::isfinite(spectrum_slope)) throw std::invalid_argument("Scenario: spectrum_slope must be finite");
      break;
    case ScenarioKind::clumped_ball:
      if (!(profile_exponent > 0.0)) throw std::invalid_argument("Scenario: profile_exponent must be positive");
      if (core_radius < 0.0 || core_radius >= 0.38 * grid.box_length)
        throw std::invalid_argument("Scenario: core_radius must lie in [0, 0.38 L)");
      break;
  }
}

Vec3 tube_center(const Scenario& s) {
  const double L = s.grid.box_length;
  const int a = (s.axis + 1) % 3, b = (s.axis + 2) % 3;
  Vec3 c{};
  c[s.axis] = L / 2.0;
  c[a] = L / 4.0;
  c[b] = L / 2.0;
  return c;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_uniform(std::uint64_t h) { return (double(h >> 11) + 0.5) * 0x1.0p-53; }

// Standard normal pair from a hash of (seed, mode, component); independent of n.
Complex gaussian(std::uint64_t seed, int kx, int ky, int kz, int comp) {
  std::uint64_t h = mix(seed);
  for (std::int64_t v : {std::int64_t(kx), std::int64_t(ky), std::int64_t(kz), std::int64_t(comp)})
    h = mix(h ^ std::uint64_t(v + 0x4000));
  const double u1 = unit_uniform(h), u2 = unit_uniform(mix(h));
  const double rad = std::sqrt(-2.0 * std::log(u1));
  return {rad * std::cos(2.0 * std::numbers::pi * u2), rad * std::sin(2.0 * std::numbers::pi * u2)};
}

void finish(VectorField& omega) {
  SpectralVector w = forward(omega);
  for (auto& c : w) c.coeffs[0] = 0.0;
  leray_project(w);
  omega = inverse(w);
}

VectorField taylor_green(const Scenario& s) {
  const GridSpec& g = s.grid;
  const double k = s.wavenumber * g.k_unit();
  VectorField w(g);
  for (int kk = 0; kk < g.n; ++kk)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec3 x = g.position(i, j, kk);
        w[2].at(i, j, kk) = -2.0 * s.amplitude * k * std::sin(k * x[0]) * std::sin(k * x[1]);
      }
  return w;
}

// u = (sin z + cos y, sin x + cos z, sin y + cos x) scaled; curl u = k u.
VectorField abc(const Scenario& s) {
  const GridSpec& g = s.grid;
  const double k = s.wavenumber * g.k_unit();
  VectorField w(g);
  for (int kk = 0; kk < g.n; ++kk)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec3 x = g.position(i, j, kk);
        const double a = s.amplitude * k;
        w[0].at(i, j, kk) = a * (std::sin(k * x[2]) + std::cos(k * x[1]));
        w[1].at(i, j, kk) = a * (std::sin(k * x[0]) + std::cos(k * x[2]));
        w[2].at(i, j, kk) = a * (std::sin(k * x[1]) + std::cos(k * x[0]));
      }
  return w;
}

VectorField burgers_pair(const Scenario& s) {
  const GridSpec& g = s.grid;
  const double L = g.box_length, a2 = s.tube_radius * s.tube_radius;
  const double peak = s.amplitude * s.circulation / (std::numbers::pi * a2);
  const int ia = (s.axis + 1) % 3, ib = (s.axis + 2) % 3;
  const Vec3 c = tube_center(s);
  VectorField w(g);
  for (int kk = 0; kk < g.n; ++kk)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec3 x = g.position(i, j, kk);
        double v = 0.0;
        for (int p = -1; p <= 1; ++p)
          for (int q = -1; q <= 1; ++q) {
            const double da = x[ia] - c[ia] + p * L, db = x[ib] - c[ib] + q * L;
            const double da2 = da - L / 2.0;
            v += std::exp(-(da * da + db * db) / a2) - std::exp(-(da2 * da2 + db * db) / a2);
          }
        w[s.axis].at(i, j, kk) = peak * v;
      }
  return w;
}

VectorField random_field(const Scenario& s) {
  const GridSpec& g = s.grid;
  const Wavenumbers k(g);
  const int n = g.n, nh = n / 2 + 1;
  const double ku = g.k_unit();
  SpectralVector w{SpectralField(g), SpectralField(g), SpectralField(g)};
  const auto raw = [&](int mx, int my, int mz) {
    std::array<Complex, 3> c{};
    const double m2 = double(mx) * mx + double(my) * my + double(mz) * mz;
    if (m2 < 1.0 || m2 > double(s.k_max) * s.k_max) return c;
    const double amp = std::pow(std::sqrt(m2), (s.spectrum_slope - 2.0) / 2.0);
    for (int d = 0; d < 3; ++d) c[d] = amp * gaussian(s.seed, mx, my, mz, d);
    return c;
  };
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < nh; ++a) {
        const int mx = k.ix[a], my = k.iy[b], mz = k.iz[c];
        if (2 * std::abs(mx) == n || 2 * std::abs(my) == n || 2 * std::abs(mz) == n) continue;
        const auto p = raw(mx, my, mz), q = raw(-mx, -my, -mz);
        std::array<Complex, 3> u;
        for (int d = 0; d < 3; ++d) u[d] = 0.5 * (p[d] + std::conj(q[d]));
        const double kx = mx * ku, ky = my * ku, kz = mz * ku;
        const Complex I(0.0, 1.0);
        const std::size_t f = w[0].index(a, b, c);
        const double scale = double(g.size());
        w[0].coeffs[f] = scale * I * (ky * u[2] - kz * u[1]);
        w[1].coeffs[f] = scale * I * (kz * u[0] - kx * u[2]);
        w[2].coeffs[f] = scale * I * (kx * u[1] - ky * u[0]);
      }
  truncate_two_thirds(w);
  const double rms = spectral_l2_norm(w) / std::sqrt(g.volume());
  if (rms > 0.0)
    for (auto& comp : w)
      for (auto& v : comp.coeffs) v *= s.amplitude / rms;
  return inverse(w);
}

VectorField clumped(const Scenario& s) {
  const GridSpec& g = s.grid;
  const double L = g.box_length;
  const double rc = s.core_radius > 0.0 ? s.core_radius : 0.04 * L;
  const double cap = std::pow(rc, -s.profile_exponent);
  const double r1 = 0.38 * L, r2 = 0.48 * L;
  VectorField w(g);
  for (int kk = 0; kk < g.n; ++kk)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec3 x = g.position(i, j, kk);
        const double dx = x[0] - L / 2.0, dy = x[1] - L / 2.0, dz = x[2] - L / 2.0;
        const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (r == 0.0 || r >= r2) continue;
        const double taper = 1.0 - smoothstep5((r - r1) / (r2 - r1));
        const double G = s.amplitude * std::min(std::pow(r, -s.profile_exponent), cap) * taper / r;
        w[0].at(i, j, kk) = -G * dy;
        w[1].at(i, j, kk) = G * dx;
      }
  return w;
}

}  // namespace

VectorField generate(const Scenario& s) {
  s.validate();
  VectorField w;
  switch (s.kind) {
    case ScenarioKind::taylor_green_2d3d: w = taylor_green(s); break;
    case ScenarioKind::abc_flow: w = abc(s); break;
    case ScenarioKind::burgers_tube: w = burgers_pair(s); break;
    case ScenarioKind::random_solenoidal: return random_field(s);
    case ScenarioKind::clumped_ball: w = clumped(s); break;
  }
  finish(w);
  return w;
}

}  // namespace vscope
