#include "vscope/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "vscope/kernels.hpp"

namespace vscope {

void SolverConfig::validate() const {
  grid.validate();
  if (!(dt_cfl > 0.0 && dt_cfl <= 1.0)) throw std::invalid_argument("SolverConfig: dt_cfl must lie in (0, 1]");
  if (!(t_end > 0.0)) throw std::invalid_argument("SolverConfig: t_end must be positive");
  if (!(snapshot_every > 0.0)) throw std::invalid_argument("SolverConfig: snapshot_every must be positive");
  if (dt_fixed < 0.0) throw std::invalid_argument("SolverConfig: dt_fixed must be >= 0");
  if (!(blowup_factor > 1.0)) throw std::invalid_argument("SolverConfig: blowup_factor must exceed 1");
}

namespace {
std::string cfl_message(double dt, double dt_max) {
  std::ostringstream os;
  os.precision(17);
  os << "CFL violation: dt = " << dt << " exceeds dt_cfl*dx/max|u| = " << dt_max << "; use dt <= " << dt_max;
  return os.str();
}

double max_speed(const VectorField& u, const Vec3& mean) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[0].values[i] + mean[0], b = u[1].values[i] + mean[1], c = u[2].values[i] + mean[2];
    m = std::max(m, a * a + b * b + c * c);
  }
  return std::sqrt(m);
}

void zero_mean(SpectralVector& w) {
  for (auto& c : w) c.coeffs[0] = 0.0;
}

// Integrating factors exp(-nu |k|^2 h) for h = dt/2 and dt, per stored mode.
struct Factors {
  std::vector<double> half, full;
};

Factors viscous_factors(const GridSpec& g, double dt) {
  const Wavenumbers k(g);
  const int n = g.n, nh = n / 2 + 1;
  Factors f;
  f.half.resize(std::size_t(nh) * n * n);
  f.full.resize(f.half.size());
  std::size_t idx = 0;
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < nh; ++a, ++idx) {
        const double k2 = k.kx[a] * k.kx[a] + k.ky[b] * k.ky[b] + k.kz[c] * k.kz[c];
        f.half[idx] = std::exp(-g.viscosity * k2 * 0.5 * dt);
        f.full[idx] = std::exp(-g.viscosity * k2 * dt);
      }
  return f;
}

// out = x * (p + s * q) componentwise over all modes.
SpectralVector combine(const std::vector<double>& x, const SpectralVector& p, double s, const SpectralVector* q) {
  SpectralVector out = p;
  for (int c = 0; c < 3; ++c) {
    const std::ptrdiff_t m = std::ptrdiff_t(out[c].coeffs.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      Complex v = p[c].coeffs[i];
      if (q) v += s * (*q)[c].coeffs[i];
      out[c].coeffs[i] = x[i] * v;
    }
  }
  return out;
}
}  // namespace

CflError::CflError(double dt, double dt_max)
    : std::runtime_error(cfl_message(dt, dt_max)), requested(dt), required(dt_max) {}

VorticitySolver::VorticitySolver(SolverConfig config) : cfg_(std::move(config)) { cfg_.validate(); }

SpectralVector VorticitySolver::nonlinear(const SpectralVector& w, double* umax) const {
  const GridSpec& g = cfg_.grid;
  VectorField u = inverse(biot_savart(w));
  if (umax) *umax = max_speed(u, cfg_.mean_velocity);
  if (cfg_.linear_only) return {SpectralField(g), SpectralField(g), SpectralField(g)};
  for (int c = 0; c < 3; ++c)
    if (cfg_.mean_velocity[c] != 0.0)
      for (double& v : u[c].values) v += cfg_.mean_velocity[c];
  const VectorField omega = inverse(w);
  VectorField uxw(g);
  kernels::cross(u[0].values, u[1].values, u[2].values, omega[0].values, omega[1].values, omega[2].values,
                 uxw[0].values, uxw[1].values, uxw[2].values, default_exec());
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < uxw.size(); ++i)
      if (!std::isfinite(uxw[c].values[i]))
        throw std::runtime_error("vorticity_rhs: non-finite value in nonlinear product at flat index " +
                                 std::to_string(i) + "; step aborted");
  SpectralVector f = forward(uxw);
  if (cfg_.dealias) truncate_two_thirds(f);
  return curl(f);
}

SpectralVector VorticitySolver::rhs(const SpectralVector& w) const { return nonlinear(w, nullptr); }

VectorField VorticitySolver::rhs(const VectorField& omega) const {
  SpectralVector w = forward(omega);
  if (cfg_.dealias) truncate_two_thirds(w);
  return inverse(rhs(w));
}

double VorticitySolver::max_stable_dt(const SpectralVector& w) const {
  return cfl_dt(max_speed(inverse(biot_savart(w)), cfg_.mean_velocity));
}

double VorticitySolver::cfl_dt(double umax) const {
  if (umax == 0.0) return std::numeric_limits<double>::infinity();
  return cfg_.dt_cfl * cfg_.grid.dx() / umax;
}

SpectralVector VorticitySolver::step(const SpectralVector& w, double dt) const {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  double umax = 0.0;
  const SpectralVector a = nonlinear(w, &umax);
  const double dt_max = cfl_dt(umax);
  if (dt > dt_max * (1.0 + 1e-12)) throw CflError(dt, dt_max);
  return advance(w, a, dt);
}

SpectralVector VorticitySolver::advance(const SpectralVector& w, const SpectralVector& a, double dt) const {
  const Factors e = viscous_factors(cfg_.grid, dt);
  const SpectralVector w1 = combine(e.half, w, 0.5 * dt, &a);
  const SpectralVector b = nonlinear(w1, nullptr);
  SpectralVector w2 = combine(e.half, w, 0.0, nullptr);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < w2[c].coeffs.size(); ++i) w2[c].coeffs[i] += 0.5 * dt * b[c].coeffs[i];
  const SpectralVector cc = nonlinear(w2, nullptr);
  SpectralVector w3 = combine(e.full, w, 0.0, nullptr);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < w3[c].coeffs.size(); ++i) w3[c].coeffs[i] += dt * e.half[i] * cc[c].coeffs[i];
  const SpectralVector d = nonlinear(w3, nullptr);

  SpectralVector out = w;
  for (int c = 0; c < 3; ++c) {
    const std::ptrdiff_t m = std::ptrdiff_t(out[c].coeffs.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      out[c].coeffs[i] = e.full[i] * w[c].coeffs[i] +
                         dt / 6.0 *
                             (e.full[i] * a[c].coeffs[i] + 2.0 * e.half[i] * (b[c].coeffs[i] + cc[c].coeffs[i]) +
                              d[c].coeffs[i]);
    }
  }
  zero_mean(out);
  return out;
}

VectorField VorticitySolver::step(const VectorField& omega, double dt) const {
  SpectralVector w = forward(omega);
  if (cfg_.dealias) truncate_two_thirds(w);
  return inverse(step(w, dt));
}

Trajectory VorticitySolver::run(const VectorField& omega0) const {
  if (!(omega0.grid() == cfg_.grid)) throw std::invalid_argument("run: initial field grid differs from config grid");
  SpectralVector w = forward(omega0);
  const double div = divergence_ratio(w);
  if (div > 1e-8)
    throw std::invalid_argument("run: initial vorticity is not divergence-free (||div||/||w|| = " +
                                std::to_string(div) + ")");
  zero_mean(w);
  if (cfg_.dealias) truncate_two_thirds(w);

  Trajectory traj;
  traj.config = cfg_;
  const auto sample = [&](double t, const VectorField& omega) {
    RunSample s;
    s.time = t;
    s.energy = kinetic_energy(w);
    s.enstrophy = enstrophy(w);
    s.omega_max = max_magnitude(omega);
    return s;
  };
  VectorField omega = inverse(w);
  traj.snapshots.push_back({0.0, omega});
  traj.series.push_back(sample(0.0, omega));
  const double omega_max0 = traj.series.back().omega_max;

  double t = 0.0;
  long snap_index = 1;
  const auto snap_time = [&](long k) { return std::min(double(k) * cfg_.snapshot_every, cfg_.t_end); };
  double next_snap = snap_time(snap_index);
  const double eps = 1e-12 * std::max(1.0, cfg_.t_end);

  while (t < cfg_.t_end - eps) {
    double umax = 0.0;
    const SpectralVector a = nonlinear(w, &umax);
    const double dt_limit = cfl_dt(umax);
    double dt = cfg_.dt_fixed > 0.0 ? cfg_.dt_fixed : dt_limit;
    if (cfg_.dt_fixed > 0.0 && cfg_.dt_fixed > dt_limit * (1.0 + 1e-12)) throw CflError(cfg_.dt_fixed, dt_limit);
    bool hits_snapshot = false;
    if (t + dt >= next_snap - eps) {
      dt = next_snap - t;
      hits_snapshot = true;
    }
    const double e_before = traj.series.back().energy;
    w = advance(w, a, dt);
    t = hits_snapshot ? next_snap : t + dt;
    ++traj.steps;
    omega = inverse(w);
    traj.series.push_back(sample(t, omega));
    const RunSample& s = traj.series.back();
    if (cfg_.grid.viscosity > 0.0 && s.energy > e_before * (1.0 + 1e-8)) ++traj.energy_violations;

    if (omega_max0 > 0.0 && s.omega_max > cfg_.blowup_factor * omega_max0) {
      traj.under_resolved = true;
      traj.status = "under-resolved: max|omega| exceeded blow-up guard";
      traj.snapshots.push_back({t, omega});
      break;
    }
    if (hits_snapshot) {
      traj.snapshots.push_back({t, omega});
      ++snap_index;
      next_snap = snap_time(snap_index);
    }
  }
  return traj;
}

VectorField vorticity_rhs(const VectorField& omega) {
  SolverConfig cfg;
  cfg.grid = omega.grid();
  return VorticitySolver(cfg).rhs(omega);
}

VectorField step(const VectorField& omega, double dt, const SolverConfig& config) {
  return VorticitySolver(config).step(omega, dt);
}

Trajectory run(const SolverConfig& config, const VectorField& omega0) { return VorticitySolver(config).run(omega0); }

VectorField stretching_vector(const VectorField& omega) {
  const VectorField u = inverse(biot_savart(forward(omega)));
  const auto grad_u = gradient(u);  // grad_u[i][j] = d_j u_i
  VectorField out(omega.grid());
  const std::ptrdiff_t m = std::ptrdiff_t(omega.size());
  for (int i = 0; i < 3; ++i) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < m; ++p) {
      double s = 0.0;
      for (int j = 0; j < 3; ++j) s += omega[j].values[p] * grad_u[i][j].values[p];
      out[i].values[p] = s;
    }
  }
  return out;
}

ScalarField stretching_density(const VectorField& omega) {
  const VectorField s = stretching_vector(omega);
  ScalarField out(omega.grid());
  for (std::size_t p = 0; p < out.size(); ++p)
    out.values[p] = s[0].values[p] * omega[0].values[p] + s[1].values[p] * omega[1].values[p] +
                    s[2].values[p] * omega[2].values[p];
  return out;
}

double kinetic_energy(const SpectralVector& w) {
  const double u = spectral_l2_norm(biot_savart(w));
  return 0.5 * u * u;
}

double enstrophy(const SpectralVector& w) {
  const double n = spectral_l2_norm(w);
  return 0.5 * n * n;
}

}  // namespace vscope
