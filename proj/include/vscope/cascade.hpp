#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vscope/grid.hpp"
#include "vscope/solver.hpp"

namespace vscope {

/// Radial cutoff profile Psi(s) = (1 - S(s - 1))^(1/(1-rho)) with S the quintic
/// smoothstep: 1 for s <= 1, 0 for s >= 2.
struct CutoffProfile {
  double rho = 0.75;

  double value(double s) const;
  /// Psi, Psi', Psi'' at s.
  std::array<double, 3> derivatives(double s) const;
};

/// Radial contraction Phi(x) = c + phi(|x - c|) (x - c)/|x - c| used to fit
/// boundary elements to the macro cutoff: identity on B(c, R0/2), maps every
/// point into the open ball B(c, R0).
struct MacroContraction {
  Vec3 center{};
  double R0 = 1.0;

  double phi(double s) const;
  std::array<double, 3> phi_derivatives(double s) const;
  Vec3 apply(const Vec3& x) const;
};

/// Constants entering the certified c_rho: A = sup |Psi'|/Psi^rho,
/// H = sup max(|Psi''|, |Psi'|/s)/Psi^(2 rho - 1), D = sup R0 |Laplacian Phi|.
struct CutoffConstants {
  double A = 0.0;
  double H = 0.0;
  double D = 0.0;
  double c_rho = 0.0;  // max(2A, 6H + A D + 2A^2), with a 1% margin on each sup
};
CutoffConstants certify_cutoff_constants(double rho);

/// eta(s) = theta^(1/(1-kappa)) with theta the smoothstep ramp over (T/3, 2T/3).
struct TemporalCutoff {
  double T = 1.0;
  double kappa = 0.5;

  double value(double s) const;
  double derivative(double s) const;
  /// 1.875 * 3 / (1 - kappa), so that |eta'| <= c_kappa eta^kappa / T.
  double c_kappa() const;
};

/// Value, gradient and Laplacian of a cutoff at one point.
struct CutoffSample {
  double value = 0.0;
  Vec3 grad{};
  double lap = 0.0;
};

/// Nonzero grid samples of one cutoff. Derivative arrays are empty when the
/// cover was built without derivatives.
struct ElementSamples {
  std::vector<std::uint32_t> index;
  std::vector<double> value;
  std::vector<double> gx, gy, gz, lap;

  std::size_t size() const { return index.size(); }
  bool has_derivatives() const { return lap.size() == index.size(); }
};

enum class CoverMode { lattice, jittered };

struct CoverSpec {
  double R0 = 0.0;      // 0 selects L/4
  Vec3 center{};        // ignored unless center_set
  bool center_set = false;
  double R = 0.0;
  int K1 = 8;
  int K2 = 64;
  CoverMode mode = CoverMode::lattice;
  std::uint64_t seed = 0;
  double rho = 0.75;
  /// Store cutoff gradients and Laplacians (needed by the enstrophy budget).
  bool derivatives = true;
};

class CoverError : public std::runtime_error {
 public:
  CoverError(const std::string& what, int minimal_K1) : std::runtime_error(what), minimal_feasible_K1(minimal_K1) {}
  int minimal_feasible_K1;
};

/// A (K1, K2)-cover of the macro ball with its cutoff family sampled on the grid.
struct Cover {
  GridSpec grid;
  Vec3 center{};
  double R0 = 0.0;
  double R = 0.0;
  int K1 = 0;
  int K2 = 0;
  double rho = 0.75;
  CoverMode mode = CoverMode::lattice;
  std::uint64_t seed = 0;
  std::vector<Vec3> centers;
  CutoffConstants constants;

  // Certificate, measured on grid points.
  int max_multiplicity = 0;  // balls B(x_i, 2R) over points of B(c, R0)
  int min_multiplicity = 0;
  int max_support_overlap = 0;  // cutoffs nonzero at one grid point
  int repairs = 0;              // jittered centres reset to the lattice

  /// Nonzero samples of each psi_i; psi0 sampled on the whole grid.
  std::vector<ElementSamples> elements;
  ElementSamples psi0;

  std::size_t size() const { return centers.size(); }
  double min_count() const;  // (R0/R)^3
  int minimal_K1() const;
};

Cover build_cover(const GridSpec& grid, const CoverSpec& spec);

/// psi0 of B(center, R0) on every grid point; R0 = 0 selects L/4 and the
/// default center is the box center.
ScalarField macro_cutoff_field(const GridSpec& grid, double R0 = 0.0, std::optional<Vec3> center = std::nullopt,
                               double rho = 0.75);

/// Exact value, gradient and Laplacian of psi_i (element >= 0) or psi0
/// (element = -1) at an arbitrary point.
CutoffSample evaluate_cutoff(const Cover& cover, int element, const Vec3& x);

struct CutoffCheck {
  std::size_t samples = 0;
  std::size_t gradient_violations = 0;
  std::size_t laplacian_violations = 0;
  double worst_gradient_ratio = 0.0;   // max |grad psi| R / (c_rho psi^rho)
  double worst_laplacian_ratio = 0.0;  // max |lap psi| R^2 / (c_rho psi^(2 rho - 1))
  bool ok() const { return gradient_violations == 0 && laplacian_violations == 0; }
};

/// Checks both derivative bounds at every grid point where psi > 1e-8, for all
/// elements and for psi0 (at scale R0).
CutoffCheck verify_cutoffs(const Cover& cover);

struct TemporalCheck {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  bool support_ok = true;  // eta = 0 on (0, T/3], eta = 1 on [2T/3, T)
  bool ok() const { return violations == 0 && support_ok; }
};
TemporalCheck verify_temporal_cutoff(const TemporalCutoff& eta, int samples = 10000);

/// (1/R^3) sum_x f psi_i^delta dx^3 for every element.
std::vector<double> local_averages(const ScalarField& f, const Cover& cover, double delta_exp = 1.0);
/// (1/R0^3) sum_x f psi0^delta dx^3.
double macro_average(const ScalarField& f, const Cover& cover, double delta_exp = 1.0);

double ensemble_average(const std::vector<double>& values);

struct Spread {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  /// (max - min) / |mean| < 0.5.
  bool stable = false;
  std::vector<double> samples;
};
Spread make_spread(std::vector<double> samples);

/// Ensemble averages of a fixed density over jittered variants with seeds
/// seed, seed + 1, ...
Spread density_spread(const ScalarField& f, const GridSpec& grid, CoverSpec spec, int variants, double delta_exp = 1.0);

// Time-resolved integrals --------------------------------------------------

/// Space integrals of one snapshot against every cutoff.
struct SnapshotIntegrals {
  double time = 0.0;
  // per element
  std::vector<double> stretch;    // int (omega.grad)u.omega psi_i
  std::vector<double> grad2;      // int |grad omega|^2 psi_i
  std::vector<double> ens;        // int 1/2 |omega|^2 psi_i
  // The two terms carrying derivatives of psi_i are integrated by parts onto
  // the band-limited fields, so under-resolved cutoffs do not alias.
  std::vector<double> ens_lap;    // int lap(1/2 |omega|^2) psi_i
  std::vector<double> transport;  // -int u.grad(1/2 |omega|^2) psi_i
  // macro
  double ens_sqrt0 = 0.0;  // int 1/2 |omega|^2 psi0^(1/2)
  double grad2_0 = 0.0;    // int |grad omega|^2 psi0
  double ens0 = 0.0;       // int 1/2 |omega|^2 psi0
  double u2_ball = 0.0;    // int over B(c, 2 R0) of |u|^2
};

SnapshotIntegrals integrate_snapshot(const Snapshot& s, const Cover& cover, const Vec3& mean_velocity = {});

/// Per-snapshot integrals for a whole trajectory, reusable across reports.
struct TrajectoryIntegrals {
  std::vector<SnapshotIntegrals> snapshots;
};
TrajectoryIntegrals integrate_trajectory(const Trajectory& traj, const Cover& cover);

struct CascadeTimes {
  double t = 0.0;
  TemporalCutoff eta;
};

/// Pointwise stretching (omega.grad)u.omega of every snapshot.
struct StretchSeries {
  std::vector<double> times;
  std::vector<ScalarField> density;
};
StretchSeries stretching_series(const Trajectory& traj);

/// VST_{x_i,R,t} for every element (trapezoid in time, linear interpolation at t).
std::vector<double> localized_vst(const Trajectory& traj, const Cover& cover, const CascadeTimes& times);
std::vector<double> localized_vst(const StretchSeries& series, const Cover& cover, const CascadeTimes& times);
std::vector<double> localized_vst(const TrajectoryIntegrals& ints, const Cover& cover, const CascadeTimes& times);

struct BudgetTerms {
  double lhs = 0.0;          // int int stretch phi_i
  double terminal = 0.0;     // int 1/2 |omega(t)|^2 phi_i(t)
  double dissipation = 0.0;  // nu int int |grad omega|^2 phi_i
  double cutoff = 0.0;       // int int 1/2 |omega|^2 ((phi_i)_s + nu lap phi_i)
  double transport = 0.0;    // int int 1/2 |omega|^2 u.grad phi_i
  double rhs = 0.0;          // terminal + dissipation - cutoff - transport
  double scale = 0.0;        // largest term magnitude
  double residual = 0.0;     // (lhs - rhs) / scale, 0 when every term vanishes
};

BudgetTerms enstrophy_budget(const TrajectoryIntegrals& ints, const Cover& cover, int element, const CascadeTimes& times,
                             double viscosity);
BudgetTerms enstrophy_budget(const Trajectory& traj, const Cover& cover, int element, const CascadeTimes& times);

struct MacroQuantities {
  double E = 0.0;
  double P = 0.0;
  std::optional<double> sigma;
  double M0 = 0.0;
  std::string fault;  // set when P = 0 while E > 0
};

MacroQuantities macro_quantities(const TrajectoryIntegrals& ints, const Cover& cover, const CascadeTimes& times);
MacroQuantities macro_quantities(const Trajectory& traj, const Cover& cover, const CascadeTimes& times);

struct ScaleVerdict {
  double R = 0.0;
  std::size_t elements = 0;
  double vst_mean = 0.0;
  Spread spread;
  bool in_range = false;
  bool sign_fail = false;
  std::optional<double> C_hat;
  std::optional<bool> estimate_holds;  // C_hat <= C, for in-range scales
  std::string note;
};

struct LocalityConfig {
  double t = 0.0;
  double T = 0.0;  // 0 selects the trajectory's final time
  double kappa = 0.5;
  double rho = 0.75;
  int K1 = 8;
  int K2 = 64;
  double C = 2.0;
  double R0 = 0.0;  // 0 selects L/4
  std::vector<double> scales;  // empty selects R0, R0/2, ... down to 2 dx
  int variants = 8;
  std::uint64_t seed = 0;
};

struct CascadeReport {
  LocalityConfig config;
  MacroQuantities macro;
  double R0 = 0.0;
  double range_lower = 0.0;  // C max(M0^1/2, R0^1/2) sigma^1/2
  /// C max(M0^1/2, R0^1/2) sigma^1/2 < R0.
  bool separation_condition = false;
  std::vector<ScaleVerdict> scales;
  std::string message;
};

CascadeReport vst_locality_report(const Trajectory& traj, const LocalityConfig& cfg);

}  // namespace vscope
