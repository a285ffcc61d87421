#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vscope/grid.hpp"

namespace vscope {

struct SolverConfig {
  GridSpec grid;
  double dt_cfl = 0.4;
  double t_end = 1.0;
  double snapshot_every = 0.1;
  bool dealias = true;
  /// Fixed step; 0 selects dt = dt_cfl * dx / max|u| every step.
  double dt_fixed = 0.0;
  /// Uniform background velocity (the k = 0 velocity mode, which the
  /// Biot-Savart inversion cannot recover). Zero by default.
  Vec3 mean_velocity{0.0, 0.0, 0.0};
  /// Halt when max|omega| exceeds this multiple of its initial value.
  double blowup_factor = 1e6;
  /// Test hook: drop the nonlinear term, leaving exact viscous decay.
  bool linear_only = false;

  void validate() const;
};

class CflError : public std::runtime_error {
 public:
  CflError(double dt, double dt_max);
  double requested;
  double required;
};

struct Snapshot {
  double time = 0.0;
  VectorField omega;
};

struct RunSample {
  double time = 0.0;
  double energy = 0.0;     // (1/2) ||u||_2^2
  double enstrophy = 0.0;  // (1/2) ||omega||_2^2
  double omega_max = 0.0;
};

struct Trajectory {
  SolverConfig config;
  std::vector<Snapshot> snapshots;  // strictly increasing times, t = 0 first
  std::vector<RunSample> series;    // one sample per step (plus t = 0)
  bool under_resolved = false;
  int steps = 0;
  /// Steps where E(t+dt) > (1 + 1e-8) E(t).
  int energy_violations = 0;
  std::string status = "ok";

  const GridSpec& grid() const { return config.grid; }
  double final_time() const { return snapshots.empty() ? 0.0 : snapshots.back().time; }
};

/// Vorticity-form Navier-Stokes on the periodic box: the nonlinear term is the
/// dealiased curl(u x omega) = (omega.grad)u - (u.grad)omega, the viscous term
/// is integrated exactly with the factor exp(-nu |k|^2 dt) inside classical RK4.
class VorticitySolver {
 public:
  explicit VorticitySolver(SolverConfig config);

  const SolverConfig& config() const { return cfg_; }

  /// Nonlinear part of d(omega)/dt only; the viscous term is not included.
  SpectralVector rhs(const SpectralVector& omega_hat) const;
  VectorField rhs(const VectorField& omega) const;

  /// One integrating-factor RK4 step. Throws CflError if dt exceeds
  /// dt_cfl * dx / max|u|.
  SpectralVector step(const SpectralVector& omega_hat, double dt) const;
  VectorField step(const VectorField& omega, double dt) const;

  /// Largest step allowed by the CFL condition (infinity for a fluid at rest).
  double max_stable_dt(const SpectralVector& omega_hat) const;

  Trajectory run(const VectorField& omega0) const;

 private:
  SpectralVector nonlinear(const SpectralVector& w, double* umax) const;
  // Remaining RK4 stages, given the first-stage nonlinear term a.
  SpectralVector advance(const SpectralVector& w, const SpectralVector& a, double dt) const;
  double cfl_dt(double umax) const;
  SolverConfig cfg_;
};

/// Free-function forms with default solver settings for omega's grid.
VectorField vorticity_rhs(const VectorField& omega);
VectorField step(const VectorField& omega, double dt, const SolverConfig& config);
Trajectory run(const SolverConfig& config, const VectorField& omega0);

/// Vortex-stretching vector (omega.grad)u with u = biot_savart(omega).
VectorField stretching_vector(const VectorField& omega);
/// Pointwise (omega.grad)u . omega.
ScalarField stretching_density(const VectorField& omega);

double kinetic_energy(const SpectralVector& omega_hat);
double enstrophy(const SpectralVector& omega_hat);

}  // namespace vscope
