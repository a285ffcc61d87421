#include "vscope/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fft.hpp"
#include "vscope/kernels.hpp"

namespace vscope {

void GridSpec::validate() const {
  if (n < 8 || (n & (n - 1)) != 0)
    throw std::invalid_argument("GridSpec: n must be a power of two >= 8, got " + std::to_string(n));
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw std::invalid_argument("GridSpec: box_length must be positive");
  if (!(viscosity > 0.0) || !std::isfinite(viscosity))
    throw std::invalid_argument("GridSpec: viscosity must be positive");
}

ScalarField::ScalarField(const GridSpec& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size())
    throw std::invalid_argument("ScalarField: value count " + std::to_string(values.size()) + " != n^3 = " +
                                std::to_string(grid.size()));
}

VectorField::VectorField(ScalarField x, ScalarField y, ScalarField z) : comp{std::move(x), std::move(y), std::move(z)} {
  if (!(comp[0].grid == comp[1].grid) || !(comp[0].grid == comp[2].grid))
    throw std::invalid_argument("VectorField: components on different grids");
}

Complex SpectralField::at(int kx, int ky, int kz) const {
  const int n = grid.n;
  const auto wrapi = [n](int k) { return ((k % n) + n) % n; };
  if (kx >= 0 && kx <= n / 2) return coeffs[index(kx, wrapi(ky), wrapi(kz))];
  return std::conj(coeffs[index(-kx, wrapi(-ky), wrapi(-kz))]);
}

void SpectralField::set(int kx, int ky, int kz, Complex value) {
  const int n = grid.n;
  const auto wrapi = [n](int k) { return ((k % n) + n) % n; };
  if (kx >= 0 && kx <= n / 2)
    coeffs[index(kx, wrapi(ky), wrapi(kz))] = value;
  else
    coeffs[index(-kx, wrapi(-ky), wrapi(-kz))] = std::conj(value);
}

Wavenumbers::Wavenumbers(const GridSpec& g) {
  const int n = g.n;
  const double k0 = g.k_unit();
  const int nh = n / 2 + 1;
  kx.resize(nh);
  kx_eff.resize(nh);
  ix.resize(nh);
  for (int i = 0; i < nh; ++i) {
    ix[i] = i;
    kx[i] = k0 * i;
    kx_eff[i] = (i == n / 2) ? 0.0 : kx[i];
  }
  ky.resize(n);
  ky_eff.resize(n);
  iy.resize(n);
  for (int j = 0; j < n; ++j) {
    iy[j] = signed_mode(j, n);
    ky[j] = k0 * iy[j];
    ky_eff[j] = (j == n / 2) ? 0.0 : ky[j];
  }
  kz = ky;
  kz_eff = ky_eff;
  iz = iy;
}

namespace {

void check_finite(const ScalarField& f) {
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (!std::isfinite(f.values[i]))
      throw std::invalid_argument("transform: non-finite input value at flat index " + std::to_string(i));
  }
}

// Apply `fn(kxi, kyi, kzi, flat)` over the half spectrum, parallel over kz planes.
template <class Fn>
void for_each_mode(const GridSpec& g, Fn&& fn) {
  const int n = g.n;
  const int nh = n / 2 + 1;
#pragma omp parallel for schedule(static)
  for (int kzi = 0; kzi < n; ++kzi) {
    for (int kyi = 0; kyi < n; ++kyi) {
      std::size_t flat = std::size_t(nh) * (std::size_t(kyi) + std::size_t(n) * kzi);
      for (int kxi = 0; kxi < nh; ++kxi, ++flat) fn(kxi, kyi, kzi, flat);
    }
  }
}

const Complex I{0.0, 1.0};

}  // namespace

SpectralField forward(const ScalarField& f) {
  f.grid.validate();
  if (f.values.size() != f.grid.size()) throw std::invalid_argument("transform: field dimensions do not match grid");
  check_finite(f);
  SpectralField out(f.grid);
  detail::FftPlans::get(f.grid.n).r2c(f.values.data(), out.coeffs.data());
  return out;
}

ScalarField inverse(const SpectralField& f) {
  f.grid.validate();
  if (f.coeffs.size() != std::size_t(f.grid.n / 2 + 1) * f.grid.n * f.grid.n)
    throw std::invalid_argument("transform: spectrum dimensions do not match grid");
  for (const auto& c : f.coeffs) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw std::invalid_argument("transform: non-finite spectral coefficient");
  }
  std::vector<Complex> scratch = f.coeffs;
  ScalarField out(f.grid);
  detail::FftPlans::get(f.grid.n).c2r(scratch.data(), out.values.data());
  const double scale = 1.0 / double(f.grid.size());
  for (double& v : out.values) v *= scale;
  return out;
}

SpectralVector forward(const VectorField& v) { return {forward(v[0]), forward(v[1]), forward(v[2])}; }

VectorField inverse(const SpectralVector& v) { return VectorField(inverse(v[0]), inverse(v[1]), inverse(v[2])); }

SpectralVector curl(const SpectralVector& v) {
  const GridSpec& g = v[0].grid;
  const Wavenumbers k(g);
  SpectralVector out{SpectralField(g), SpectralField(g), SpectralField(g)};
  for_each_mode(g, [&](int a, int b, int c, std::size_t f) {
    const double kx = k.kx_eff[a], ky = k.ky_eff[b], kz = k.kz_eff[c];
    const Complex vx = v[0].coeffs[f], vy = v[1].coeffs[f], vz = v[2].coeffs[f];
    out[0].coeffs[f] = I * (ky * vz - kz * vy);
    out[1].coeffs[f] = I * (kz * vx - kx * vz);
    out[2].coeffs[f] = I * (kx * vy - ky * vx);
  });
  return out;
}

VectorField curl(const VectorField& v) { return inverse(curl(forward(v))); }

SpectralField divergence(const SpectralVector& v) {
  const GridSpec& g = v[0].grid;
  const Wavenumbers k(g);
  SpectralField out(g);
  for_each_mode(g, [&](int a, int b, int c, std::size_t f) {
    out.coeffs[f] = I * (k.kx_eff[a] * v[0].coeffs[f] + k.ky_eff[b] * v[1].coeffs[f] + k.kz_eff[c] * v[2].coeffs[f]);
  });
  return out;
}

SpectralVector gradient(const SpectralField& s) {
  const GridSpec& g = s.grid;
  const Wavenumbers k(g);
  SpectralVector out{SpectralField(g), SpectralField(g), SpectralField(g)};
  for_each_mode(g, [&](int a, int b, int c, std::size_t f) {
    out[0].coeffs[f] = I * k.kx_eff[a] * s.coeffs[f];
    out[1].coeffs[f] = I * k.ky_eff[b] * s.coeffs[f];
    out[2].coeffs[f] = I * k.kz_eff[c] * s.coeffs[f];
  });
  return out;
}

std::array<VectorField, 3> gradient(const VectorField& v) {
  std::array<VectorField, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = inverse(gradient(forward(v[i])));
  return out;
}

SpectralField laplacian(const SpectralField& s) {
  const GridSpec& g = s.grid;
  const Wavenumbers k(g);
  SpectralField out(g);
  for_each_mode(g, [&](int a, int b, int c, std::size_t f) {
    out.coeffs[f] = -(k.kx[a] * k.kx[a] + k.ky[b] * k.ky[b] + k.kz[c] * k.kz[c]) * s.coeffs[f];
  });
  return out;
}

SpectralVector biot_savart(const SpectralVector& w) {
  const GridSpec& g = w[0].grid;
  const Wavenumbers k(g);
  SpectralVector out{SpectralField(g), SpectralField(g), SpectralField(g)};
  for_each_mode(g, [&](int a, int b, int c, std::size_t f) {
    const double kx = k.kx_eff[a], ky = k.ky_eff[b], kz = k.kz_eff[c];
    const double k2 = kx * kx + ky * ky + kz * kz;
    if (k2 == 0.0) return;  // mean mode and pure-Nyquist modes carry no velocity
    const Complex wx = w[0].coeffs[f], wy = w[1].coeffs[f], wz = w[2].coeffs[f];
    out[0].coeffs[f] = I * (ky * wz - kz * wy) / k2;
    out[1].coeffs[f] = I * (kz * wx - kx * wz) / k2;
    out[2].coeffs[f] = I * (kx * wy - ky * wx) / k2;
  });
  return out;
}

BiotSavartResult biot_savart(const VectorField& omega) {
  SpectralVector w = forward(omega);
  BiotSavartResult r;
  r.divergence_ratio = divergence_ratio(w);
  r.divergence_warning = r.divergence_ratio > 1e-8;
  r.velocity = inverse(biot_savart(w));
  return r;
}

void truncate_two_thirds(SpectralField& s) {
  const GridSpec& g = s.grid;
  const Wavenumbers k(g);
  const int n = g.n;
  // |k_i| > n/3  <=>  3|k_i| > n in integers.
  for_each_mode(g, [&](int a, int b, int c, std::size_t f) {
    if (3 * std::abs(k.ix[a]) > n || 3 * std::abs(k.iy[b]) > n || 3 * std::abs(k.iz[c]) > n) s.coeffs[f] = 0.0;
  });
}

void truncate_two_thirds(SpectralVector& v) {
  for (auto& c : v) truncate_two_thirds(c);
}

void leray_project(SpectralVector& v) {
  const GridSpec& g = v[0].grid;
  const Wavenumbers k(g);
  for_each_mode(g, [&](int a, int b, int c, std::size_t f) {
    const double kx = k.kx_eff[a], ky = k.ky_eff[b], kz = k.kz_eff[c];
    const double k2 = kx * kx + ky * ky + kz * kz;
    if (k2 == 0.0) return;
    const Complex dot = (kx * v[0].coeffs[f] + ky * v[1].coeffs[f] + kz * v[2].coeffs[f]) / k2;
    v[0].coeffs[f] -= kx * dot;
    v[1].coeffs[f] -= ky * dot;
    v[2].coeffs[f] -= kz * dot;
  });
}

SpectralVector dealias_project(SpectralVector f) {
  truncate_two_thirds(f);
  leray_project(f);
  return f;
}

double integral(const ScalarField& f) {
  return kernels::blocked_sum(f.values, std::size_t(f.grid.n) * f.grid.n, default_exec()) * f.grid.cell_volume();
}

double l2_norm(const ScalarField& f) {
  std::vector<double> sq(f.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = f.values[i] * f.values[i];
  return std::sqrt(kernels::blocked_sum(sq, std::size_t(f.grid.n) * f.grid.n, default_exec()) * f.grid.cell_volume());
}

double l2_norm(const VectorField& v) {
  const double a = l2_norm(v[0]), b = l2_norm(v[1]), c = l2_norm(v[2]);
  return std::sqrt(a * a + b * b + c * c);
}

double spectral_l2_norm(const SpectralField& s) {
  const GridSpec& g = s.grid;
  const int n = g.n;
  const int nh = n / 2 + 1;
  std::vector<double> plane(std::size_t(n), 0.0);
#pragma omp parallel for schedule(static)
  for (int kzi = 0; kzi < n; ++kzi) {
    double acc = 0.0;
    for (int kyi = 0; kyi < n; ++kyi) {
      const std::size_t base = std::size_t(nh) * (std::size_t(kyi) + std::size_t(n) * kzi);
      for (int kxi = 0; kxi < nh; ++kxi) {
        const double w = (kxi == 0 || kxi == n / 2) ? 1.0 : 2.0;
        acc += w * std::norm(s.coeffs[base + kxi]);
      }
    }
    plane[std::size_t(kzi)] = acc;
  }
  double total = 0.0;
  for (double p : plane) total += p;
  return std::sqrt(total * g.cell_volume() / double(g.size()));
}

double spectral_l2_norm(const SpectralVector& v) {
  const double a = spectral_l2_norm(v[0]), b = spectral_l2_norm(v[1]), c = spectral_l2_norm(v[2]);
  return std::sqrt(a * a + b * b + c * c);
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

ScalarField magnitude(const VectorField& v) {
  ScalarField out(v.grid());
  const std::ptrdiff_t n = std::ptrdiff_t(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out.values[i] = std::sqrt(v[0].values[i] * v[0].values[i] + v[1].values[i] * v[1].values[i] +
                              v[2].values[i] * v[2].values[i]);
  return out;
}

double max_magnitude(const VectorField& v) { return max_abs(magnitude(v)); }

double divergence_ratio(const SpectralVector& v) {
  const double norm = spectral_l2_norm(v);
  if (norm == 0.0) return 0.0;
  return spectral_l2_norm(divergence(v)) / norm;
}

}  // namespace vscope
