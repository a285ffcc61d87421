#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace vscope {

using Complex = std::complex<double>;
using Vec3 = std::array<double, 3>;

/// Periodic box [0, L)^3 sampled on n^3 points, plus the fluid viscosity.
struct GridSpec {
  int n = 32;
  double box_length = 2.0 * std::numbers::pi;
  double viscosity = 0.05;

  /// Throws std::invalid_argument unless n >= 8 is a power of two, L > 0, nu > 0.
  void validate() const;

  double dx() const { return box_length / n; }
  double cell_volume() const { return dx() * dx() * dx(); }
  double volume() const { return box_length * box_length * box_length; }
  std::size_t size() const { return std::size_t(n) * n * n; }
  /// Smallest nonzero wavenumber, 2*pi/L.
  double k_unit() const { return 2.0 * std::numbers::pi / box_length; }

  /// Row-major with i (the x index) fastest.
  std::size_t index(int i, int j, int k) const {
    return std::size_t(i) + std::size_t(n) * (std::size_t(j) + std::size_t(n) * std::size_t(k));
  }
  Vec3 position(int i, int j, int k) const { return {i * dx(), j * dx(), k * dx()}; }

  bool operator==(const GridSpec&) const = default;
};

struct ScalarField {
  GridSpec grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  ScalarField(const GridSpec& g, std::vector<double> v);

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double& at(int i, int j, int k) { return values[grid.index(i, j, k)]; }
  double at(int i, int j, int k) const { return values[grid.index(i, j, k)]; }
  std::size_t size() const { return values.size(); }
};

struct VectorField {
  std::array<ScalarField, 3> comp;

  VectorField() = default;
  explicit VectorField(const GridSpec& g) : comp{ScalarField(g), ScalarField(g), ScalarField(g)} {}
  VectorField(ScalarField x, ScalarField y, ScalarField z);

  const GridSpec& grid() const { return comp[0].grid; }
  ScalarField& operator[](int c) { return comp[c]; }
  const ScalarField& operator[](int c) const { return comp[c]; }
  std::size_t size() const { return comp[0].size(); }
};

/// Fourier coefficients of a real field in FFTW half-spectrum layout: kx index in
/// [0, n/2], ky/kz indices in [0, n). Forward transform is unnormalized
/// (f_hat = sum_x f e^{-ik.x}); the inverse carries the 1/n^3.
struct SpectralField {
  GridSpec grid;
  std::vector<Complex> coeffs;

  SpectralField() = default;
  explicit SpectralField(const GridSpec& g)
      : grid(g), coeffs(std::size_t(g.n / 2 + 1) * g.n * g.n) {}

  int nx_half() const { return grid.n / 2 + 1; }
  std::size_t index(int kxi, int kyi, int kzi) const {
    return std::size_t(kxi) + std::size_t(nx_half()) * (std::size_t(kyi) + std::size_t(grid.n) * std::size_t(kzi));
  }
  /// Coefficient at signed integer wavenumber (kx, ky, kz) in [-n/2, n/2)^3,
  /// reconstructing kx < 0 from Hermitian symmetry.
  Complex at(int kx, int ky, int kz) const;
  void set(int kx, int ky, int kz, Complex value);
  std::size_t size() const { return coeffs.size(); }
};

using SpectralVector = std::array<SpectralField, 3>;

/// Signed integer wavenumber for storage index i along a full axis.
inline int signed_mode(int i, int n) { return i < n / 2 ? i : i - n; }

/// Per-grid wavenumber tables. `eff` components zero the Nyquist mode so that
/// odd derivatives of real fields stay real.
struct Wavenumbers {
  explicit Wavenumbers(const GridSpec& g);
  std::vector<double> kx, ky, kz;            // physical wavenumbers
  std::vector<double> kx_eff, ky_eff, kz_eff;  // Nyquist zeroed
  std::vector<int> ix, iy, iz;               // signed integer modes
};

// Transforms --------------------------------------------------------------

/// Throws std::invalid_argument on non-finite input.
SpectralField forward(const ScalarField& f);
ScalarField inverse(const SpectralField& f);
SpectralVector forward(const VectorField& v);
VectorField inverse(const SpectralVector& v);

// Spectral operators ------------------------------------------------------

SpectralVector curl(const SpectralVector& v);
VectorField curl(const VectorField& v);
SpectralField divergence(const SpectralVector& v);
SpectralVector gradient(const SpectralField& f);
/// Nine components d_j v_i, returned as grad[i][j].
std::array<VectorField, 3> gradient(const VectorField& v);
SpectralField laplacian(const SpectralField& f);

/// u_hat = i k x w_hat / |k|^2 with u_hat(0) = 0.
SpectralVector biot_savart(const SpectralVector& omega_hat);

struct BiotSavartResult {
  VectorField velocity;
  /// ||div omega||_2 / ||omega||_2 measured spectrally.
  double divergence_ratio = 0.0;
  /// Set when divergence_ratio exceeds 1e-8; the divergent part is discarded.
  bool divergence_warning = false;
};
BiotSavartResult biot_savart(const VectorField& omega);

/// Zero every mode with some |k_i| > n/3 (integer index).
void truncate_two_thirds(SpectralVector& f);
void truncate_two_thirds(SpectralField& f);
/// f_hat - k (k . f_hat) / |k|^2.
void leray_project(SpectralVector& f);
SpectralVector dealias_project(SpectralVector f);

// Norms and reductions ----------------------------------------------------

/// Grid quadrature of the integral of f.
double integral(const ScalarField& f);
/// sqrt(sum f^2 dx^3).
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& v);
/// Same quantity evaluated from coefficients through Parseval.
double spectral_l2_norm(const SpectralField& f);
double spectral_l2_norm(const SpectralVector& v);
double max_abs(const ScalarField& f);
ScalarField magnitude(const VectorField& v);
double max_magnitude(const VectorField& v);
/// ||div v||_2 / ||v||_2 (0 for the zero field).
double divergence_ratio(const SpectralVector& v);

}  // namespace vscope
