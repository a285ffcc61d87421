#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vscope/grid.hpp"
#include "vscope/kernels.hpp"
#include "vscope/solver.hpp"

namespace vscope {

/// lambda_f(beta) = dx^3 #{x : |f(x)| > beta} for ascending positive beta.
std::vector<double> distribution_function(const ScalarField& f, const std::vector<double>& beta);

/// w = sqrt(1 + |omega|^2) and log w.
struct WField {
  ScalarField w;
  ScalarField log_w;
};
WField make_wfield(const VectorField& omega);

/// Quadrature of psi w log w; psi = 1 when omitted.
double llogl(const VectorField& omega, const ScalarField& psi);
double llogl(const VectorField& omega);

// Maximal functions --------------------------------------------------------

enum class MaximalVariant { global_smooth, local_smooth, hardy_littlewood, curly };
const char* maximal_name(MaximalVariant v);
MaximalVariant parse_maximal(const std::string& s);

/// h_t = t^-3 h(x/t) with h = C exp(-1/(1 - |x|^2)) on the unit ball, periodized
/// and normalized so its grid quadrature is 1. Collapses to a unit point mass
/// for t < dx.
ScalarField bump_kernel(const GridSpec& grid, double t);

/// f * h_t by spectral multiplication.
ScalarField smooth_average(const ScalarField& f, double t);

/// Average of f over the centered periodic cube of 2w+1 points per axis.
ScalarField box_average(const ScalarField& f, int w, Exec exec = default_exec());

/// Scales sampled by each variant: t = 2^-j for the smooth kernels (t = 0 is
/// the identity), cube half-widths w dx for the box variants.
std::vector<double> maximal_scales(const GridSpec& grid, MaximalVariant v);

/// Supremum over the scale ladder; global_smooth uses j in [-2, log2(1/dx)],
/// local_smooth t < 1, hardy_littlewood centered cubes, curly (M sqrt|f|)^2.
ScalarField maximal_function(const ScalarField& f, MaximalVariant v, Exec exec = default_exec());

// Mean oscillation norms ---------------------------------------------------

enum class BmoVariant { BMO, bmo, weighted };
const char* bmo_name(BmoVariant v);
BmoVariant parse_bmo(const std::string& s);

enum class Weight { one, inv_log };  // phi(r) = 1 or 1/|log r|

struct OscillationConfig {
  std::vector<double> radii;  // cube sides in (dx, 1/2); empty selects 2^-j
  int stride = 0;             // center stride; 0 selects max(1, n/16)
  Weight weight = Weight::inv_log;
  double delta = 0.5;  // small/large split of the local norm
  Exec exec = default_exec();

  void validate(const GridSpec& grid) const;
  int effective_stride(const GridSpec& grid) const;
};

/// Cube sides in grid points for the small-scale ladder, finest last.
std::vector<int> small_scale_sides(const GridSpec& grid, const OscillationConfig& cfg);

double weight_value(Weight w, double r);

struct RadiusOscillation {
  double r = 0.0;           // side length (points times dx)
  int side = 0;             // points per axis
  int centers = 0;          // centers per axis
  double oscillation = 0.0; // max mean oscillation over centers
  double weighted = 0.0;    // oscillation / phi(r)
  double running = 0.0;     // sup of `weighted` over this and all coarser radii
};

/// Every value is a supremum over a finite set of cubes, hence a lower bound of
/// the continuous norm.
struct BmoNorm {
  BmoVariant variant = BmoVariant::BMO;
  double value = 0.0;
  double oscillation = 0.0;  // small-scale oscillation part
  double l1 = 0.0;           // weighted: ||f||_1
  double large_scale = 0.0;  // bmo: sup of |f| averages over sides >= delta
  std::vector<RadiusOscillation> small;
  std::vector<RadiusOscillation> large;
  bool lower_bound = true;
};

BmoNorm bmo_norm(const ScalarField& f, BmoVariant v, const OscillationConfig& cfg);

// Direction monitor --------------------------------------------------------

struct MonitorConfig {
  OscillationConfig oscillation;
  double eps_relative = 1e-6;          // eps_dir = eps_relative ||omega||_inf
  std::optional<double> eps_absolute;  // overrides eps_relative
};

struct DirectionMonitor {
  std::vector<double> times;
  std::vector<double> eps_dir;
  std::vector<double> sup_norm;     // max_c ||psi xi_c||_inf
  std::vector<double> weighted;     // max_c ||psi xi_c|| in the 1/|log r| weighted norm
  std::vector<double> oscillation;  // max_c of its oscillation part
  std::vector<double> llogl;        // int psi w log w
  std::vector<double> running_weighted;
  std::vector<double> running_llogl;
  bool lower_bound = true;
};

/// Masked direction xi = omega/|omega| where |omega| > eps, else 0.
VectorField direction_field(const VectorField& omega, double eps);

DirectionMonitor direction_monitor(const Trajectory& traj, const ScalarField& psi, const MonitorConfig& cfg = {});

// Sampling studies ---------------------------------------------------------

struct RatioStats {
  std::vector<std::string> family;
  std::vector<double> values;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;

  bool bounded_by(double factor) const { return max <= factor * median; }
};
RatioStats make_stats(std::vector<std::string> family, std::vector<double> values);

struct CoifmanRochbergResult {
  RatioStats norms;               // ||log M f||_BMO per sample
  double invariance_error = 0.0;  // max |norm(lambda f) - norm(f)| over lambda
  bool clipped = false;           // M f underflowed and was clipped at 1e-300
};

/// ||log M f||_BMO with the box maximal function, clipping M f at 1e-300.
double log_maximal_bmo(const ScalarField& f, const OscillationConfig& cfg, bool* clipped = nullptr);

/// Positive test fields drawn from random spectra, spikes, tubes and products.
ScalarField positive_sample(const GridSpec& grid, int index, std::uint64_t seed, std::string* family = nullptr);

CoifmanRochbergResult coifman_rochberg_check(const GridSpec& grid, int samples, std::uint64_t seed,
                                             const OscillationConfig& cfg = {});

/// ||M_h(E.B)||_1 / (||E||_2 ||B||_2), 0 when either field vanishes.
double div_curl_ratio(const VectorField& E, const VectorField& B);

/// Ratios over random divergence-free E and gradient B; zero draws are redrawn.
RatioStats div_curl_check(const GridSpec& grid, int samples, std::uint64_t seed);

}  // namespace vscope
