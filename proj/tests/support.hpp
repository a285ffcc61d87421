#pragma once

// Shared helpers for the test binaries: point sampling of analytic fields,
// seeded random fields drawn without the library, and error norms.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "vscope/grid.hpp"

namespace vtest {

using vscope::GridSpec;
using vscope::ScalarField;
using vscope::Vec3;
using vscope::VectorField;

inline constexpr double pi = std::numbers::pi;

template <class F>
ScalarField sample(const GridSpec& g, F f) {
  ScalarField s(g);
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec3 x = g.position(i, j, k);
        s.at(i, j, k) = f(x[0], x[1], x[2]);
      }
  return s;
}

/// f returns a Vec3 per point.
template <class F>
VectorField sample_vec(const GridSpec& g, F f) {
  VectorField v(g);
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec3 x = g.position(i, j, k);
        const Vec3 r = f(x[0], x[1], x[2]);
        for (int c = 0; c < 3; ++c) v[c].at(i, j, k) = r[c];
      }
  return v;
}

/// Random trigonometric polynomial with integer modes |k_i| <= kmax, built
/// point by point (no transforms involved).
inline ScalarField random_trig(const GridSpec& g, std::uint64_t seed, int kmax = 3, bool zero_mean = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 2.0 * pi);
  struct Mode {
    int kx, ky, kz;
    double a, ph;
  };
  std::vector<Mode> modes;
  for (int kx = -kmax; kx <= kmax; ++kx)
    for (int ky = -kmax; ky <= kmax; ++ky)
      for (int kz = 0; kz <= kmax; ++kz) {
        if (zero_mean && kx == 0 && ky == 0 && kz == 0) continue;
        modes.push_back({kx, ky, kz, N(rng), U(rng)});
      }
  const double q = g.k_unit();
  return sample(g, [&](double x, double y, double z) {
    double s = 0.0;
    for (const auto& m : modes) s += m.a * std::cos(q * (m.kx * x + m.ky * y + m.kz * z) + m.ph);
    return s;
  });
}

/// White noise on grid points.
inline ScalarField random_noise(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  ScalarField s(g);
  for (auto& v : s.values) v = N(rng);
  return s;
}

inline VectorField random_vector(const GridSpec& g, std::uint64_t seed, int kmax = 3) {
  return VectorField(random_trig(g, seed, kmax), random_trig(g, seed + 1000, kmax), random_trig(g, seed + 2000, kmax));
}

inline double norm2(const ScalarField& a) {
  double s = 0.0;
  for (double v : a.values) s += v * v;
  return std::sqrt(s);
}

inline double norm2(const VectorField& a) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    for (double v : a[c].values) s += v * v;
  return std::sqrt(s);
}

inline double diff2(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[c][i] - b[c][i]) * (a[c][i] - b[c][i]);
  return std::sqrt(s);
}

inline double rel_err(const VectorField& a, const VectorField& ref) { return diff2(a, ref) / norm2(ref); }

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const VectorField& a, const VectorField& b) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c) m = std::max(m, max_abs_diff(a[c], b[c]));
  return m;
}

/// Parseval written out over the half spectrum: sum_x f^2 dx^3 from raw
/// coefficients, counting interior kx planes twice.
inline double parseval_l2(const vscope::SpectralField& f) {
  const int n = f.grid.n;
  double s = 0.0;
  for (int kz = 0; kz < n; ++kz)
    for (int ky = 0; ky < n; ++ky)
      for (int kx = 0; kx <= n / 2; ++kx) {
        const double w = (kx == 0 || kx == n / 2) ? 1.0 : 2.0;
        s += w * std::norm(f.coeffs[f.index(kx, ky, kz)]);
      }
  const double n3 = double(n) * n * n;
  return std::sqrt(s / n3 * f.grid.cell_volume());
}

/// u = (sin x cos y, -cos x sin y, 0) e^{-2 nu t} and its curl, on L = 2 pi.
inline VectorField tg_velocity(const GridSpec& g, double t) {
  const double d = std::exp(-2.0 * g.viscosity * t);
  return sample_vec(g, [&](double x, double y, double) {
    return Vec3{std::sin(x) * std::cos(y) * d, -std::cos(x) * std::sin(y) * d, 0.0};
  });
}
inline VectorField tg_vorticity(const GridSpec& g, double t) {
  const double d = std::exp(-2.0 * g.viscosity * t);
  return sample_vec(g, [&](double x, double y, double) { return Vec3{0.0, 0.0, 2.0 * std::sin(x) * std::sin(y) * d}; });
}

/// 3D Taylor-Green velocity and its hand-derived vorticity, generic in the
/// scalar type so complex-step differentiation applies.
template <class T>
std::array<T, 3> tg3_u(T x, T y, T z) {
  return {std::sin(x) * std::cos(y) * std::cos(z), -std::cos(x) * std::sin(y) * std::cos(z), T(0.0)};
}
template <class T>
std::array<T, 3> tg3_w(T x, T y, T z) {
  return {-std::cos(x) * std::sin(y) * std::sin(z), -std::sin(x) * std::cos(y) * std::sin(z),
          2.0 * std::sin(x) * std::sin(y) * std::cos(z)};
}

/// J[i][j] = d f_i / d x_j by complex step.
template <class F>
std::array<std::array<double, 3>, 3> jacobian(F f, const Vec3& p) {
  const double h = 1e-30;
  std::array<std::array<double, 3>, 3> J{};
  for (int j = 0; j < 3; ++j) {
    std::array<std::complex<double>, 3> q{p[0], p[1], p[2]};
    q[j] += std::complex<double>(0.0, h);
    const auto v = f(q[0], q[1], q[2]);
    for (int i = 0; i < 3; ++i) J[i][j] = v[i].imag() / h;
  }
  return J;
}

/// Harmonic measure of the full diameter [-1, 1] seen from i*y0 in the unit
/// disk: second-order finite differences for the Laplacian in polar
/// coordinates on the upper half disk (u = 1 on the diameter, 0 on the arc),
/// solved by SOR. y0 must fall on a radial node.
inline double slit_disk_laplace(double y0, int nr = 256, int nth = 256) {
  const double h = 1.0 / nr, k = pi / nth;
  std::vector<double> u(std::size_t(nr + 1) * (nth + 1), 0.0);
  const auto at = [&](int i, int j) -> double& { return u[std::size_t(i) * (nth + 1) + j]; };
  for (int i = 0; i < nr; ++i) at(i, 0) = at(i, nth) = 1.0;
  for (int j = 0; j <= nth; ++j) at(0, j) = 1.0;
  const double w = 2.0 / (1.0 + std::sin(pi / std::max(nr, nth)));
  for (int it = 0; it < 100000; ++it) {
    double change = 0.0;
    for (int i = 1; i < nr; ++i) {
      const double r = i * h;
      const double ae = 1.0 / (h * h) + 1.0 / (2.0 * r * h), aw = 1.0 / (h * h) - 1.0 / (2.0 * r * h);
      const double at2 = 1.0 / (r * r * k * k), c = 2.0 / (h * h) + 2.0 * at2;
      for (int j = 1; j < nth; ++j) {
        const double gs = (ae * at(i + 1, j) + aw * at(i - 1, j) + at2 * (at(i, j + 1) + at(i, j - 1))) / c;
        const double d = w * (gs - at(i, j));
        at(i, j) += d;
        change = std::max(change, std::abs(d));
      }
    }
    if (change < 1e-13) break;
  }
  return at(int(std::lround(y0 / h)), nth / 2);
}

/// Closed form of the same measure: 1 - (2/pi) arg((1 + z)/(1 - z)).
inline double slit_disk_exact(std::complex<double> z) { return 1.0 - 2.0 / pi * std::arg((1.0 + z) / (1.0 - z)); }

}  // namespace vtest
