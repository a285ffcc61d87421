// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

#include "support.hpp"
#include "vscope/cascade.hpp"
#include "vscope/experiment.hpp"
#include "vscope/geometry.hpp"
#include "vscope/harmonic.hpp"
#include "vscope/oscillation.hpp"
#include "vscope/scenario.hpp"
#include "vscope/solver.hpp"

using namespace vscope;
using namespace vtest;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// 1 -------------------------------------------------------------------------
Outcome solver_exactness() {
  Timer tm;
  const GridSpec g{32, 2.0 * pi, 0.1};
  SolverConfig c;
  c.grid = g;
  c.t_end = 0.5;
  c.snapshot_every = 0.5;
  const Trajectory t = run(c, tg_vorticity(g, 0.0));
  const VectorField u = biot_savart(t.snapshots.back().omega).velocity;
  const double err = rel_err(u, tg_velocity(g, 0.5));
  const double s = tm.seconds();
  return {err < 1e-6 && s < 30.0 && t.final_time() == 0.5,
          "velocity rel L2 error " + fmt("%.2e", err) + " at t = 0.5 (limit 1e-6), " + fmt("%.1f", s) + " s"};
}

// 2 -------------------------------------------------------------------------
Outcome spectral_identities() {
  Timer tm;
  const GridSpec g{32, 2.0 * pi, 0.1};
  double parseval = 0.0, inv_err = 0.0, div_bs = 0.0, div_curl = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const VectorField v(random_noise(g, 7000 + 3 * s), random_noise(g, 7001 + 3 * s), random_noise(g, 7002 + 3 * s));
    for (int c = 0; c < 3; ++c) {
      const double phys = norm2(v[c]) * std::sqrt(g.cell_volume());
      parseval = std::max(parseval, std::abs(parseval_l2(forward(v[c])) - phys) / phys);
    }
    const SpectralVector w = curl(forward(v));
    div_curl = std::max(div_curl, divergence_ratio(w));
    const SpectralVector u = biot_savart(w);
    div_bs = std::max(div_bs, divergence_ratio(u));
    inv_err = std::max(inv_err, rel_err(inverse(curl(u)), inverse(w)));
  }
  const double s = tm.seconds();
  const bool ok = parseval < 1e-12 && inv_err < 1e-10 && div_bs < 1e-12 && div_curl < 1e-13 && s < 60.0;
  return {ok, "Parseval " + fmt("%.1e", parseval) + ", curl of Biot-Savart " + fmt("%.1e", inv_err) +
                  ", divergence " + fmt("%.1e", std::max(div_bs, div_curl)) + " over 100 fields, " + fmt("%.1f", s) +
                  " s"};
}

// 3 and 4 share the tube family.
struct TubeCase {
  double fraction;
  VectorField omega;
  Scenario scenario;
};

const std::vector<TubeCase>& tube_family() {
  static const std::vector<TubeCase> tubes = [] {
    std::vector<TubeCase> out;
    for (double f : {0.2, 0.1, 0.05}) {
      Scenario s;
      s.kind = ScenarioKind::burgers_tube;
      s.grid = GridSpec{128, 2.0 * pi, 0.01};
      s.tube_radius = f * s.grid.box_length;
      out.push_back({f, generate(s), s});
    }
    return out;
  }();
  return tubes;
}

bool chebyshev_exact(const VectorField& w) {
  const ScalarField mag = magnitude(w);
  double l1 = 0.0;
  for (double v : mag.values) l1 += v;
  l1 *= w.grid().cell_volume();
  const double top = max_abs(mag);
  for (double frac : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    const double M = frac * top;
    if (M * superlevel(mag, M).volume() > l1) return false;
  }
  const CriticalityRecord rec = criticality_scales(w, 2.0);
  return rec.chebyshev_ratio && *rec.chebyshev_ratio <= 1.0;
}

Outcome chebyshev() {
  const GridSpec g{16, 2.0 * pi, 0.1};
  int fails = 0, fields = 0;
  for (std::uint64_t s = 0; s < 100; ++s, ++fields) fails += !chebyshev_exact(random_vector(g, 300 + s, 3));
  for (const auto& t : tube_family()) fails += !chebyshev_exact(t.omega), ++fields;
  return {fails == 0, std::to_string(fields - fails) + "/" + std::to_string(fields) +
                          " fields satisfy M Vol(Omega(M)) <= ||omega||_1 at every level"};
}

Outcome criticality() {
  std::string detail;
  bool ok = true;
  for (const auto& t : tube_family()) {
    const double L = t.scenario.grid.box_length;
    const double linf = max_magnitude(t.omega), crit = 1.0 / std::sqrt(linf);
    const SuperlevelMask m = superlevel(t.omega, 0.5 * linf);
    Vec3 c = tube_center(t.scenario);
    std::vector<Vec3> probes;
    for (int k = 0; k < 8; ++k) {
      c[2] = k * L / 8.0;
      probes.push_back(c);
    }
    const auto scale = sparseness_scale(m, probes, 0.5, radius_ladder(t.scenario.grid.dx() / 2, 0.999 * L / 2, 1.1), 64);
    const auto scan = sparseness_scan(m, probes, std::min(2.0 * crit, L / 2.0), 0.5, 64);
    const double ratio = scale ? *scale / crit : 0.0;
    const bool pass = scale && ratio >= 1.0 / 3.0 && ratio <= 3.0 && scan.passing == probes.size();
    ok = ok && pass;
    detail += "a = " + fmt("%.2f", t.fraction) + "L: ratio " + fmt("%.3f", ratio) + ", scan " +
              std::to_string(scan.passing) + "/" + std::to_string(probes.size()) + "; ";
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

// 5 -------------------------------------------------------------------------
Outcome h_formula() {
  const double special = std::abs(h_delta(1.0 / std::sqrt(3.0)) - 1.0 / 3.0);
  const bool ends = h_delta(1e-9) > 1.0 - 1e-8 && h_delta(1.0 - 1e-9) < 1e-8;
  bool mono = true;
  double prev = 2.0;
  for (int i = 1; i <= 100; ++i) {
    const double v = h_delta(i / 101.0);
    mono = mono && v < prev;
    prev = v;
  }
  return {special < 1e-12 && ends && mono, "|h(1/sqrt 3) - 1/3| = " + fmt("%.1e", special) + ", endpoints " +
                                               (ends ? "ok" : "off") + ", strictly decreasing on 100 samples: " +
                                               (mono ? "yes" : "no")};
}

// 6 -------------------------------------------------------------------------
Outcome cover_certification() {
  const GridSpec g{32, 2.0 * pi, 0.05};
  const double R0 = g.box_length / 4.0;
  int covers = 0, bad = 0;
  for (int d : {1, 2, 4}) {
    for (int v = -1; v < 8; ++v) {
      CoverSpec s;
      s.R = R0 / d;
      s.mode = v < 0 ? CoverMode::lattice : CoverMode::jittered;
      s.seed = std::uint64_t(std::max(v, 0));
      const Cover c = build_cover(g, s);
      ++covers;
      const double lower = std::pow(double(d), 3.0);
      bool ok = double(c.size()) >= lower && double(c.size()) <= c.K1 * lower;
      // exhaustive multiplicity over grid points of B(c, R0)
      for (int k = 0; k < g.n && ok; ++k)
        for (int j = 0; j < g.n; ++j)
          for (int i = 0; i < g.n; ++i) {
            const Vec3 x = g.position(i, j, k);
            double s2 = 0.0;
            for (int a = 0; a < 3; ++a) s2 += (x[a] - c.center[a]) * (x[a] - c.center[a]);
            if (s2 > R0 * R0) continue;
            int m = 0;
            for (const Vec3& y : c.centers) {
              double r2 = 0.0;
              for (int a = 0; a < 3; ++a) r2 += (x[a] - y[a]) * (x[a] - y[a]);
              m += r2 <= 4.0 * c.R * c.R * (1.0 + 1e-12);
            }
            ok = ok && m >= 1 && m <= c.K2;
          }
      ok = ok && verify_cutoffs(c).ok();
      bad += !ok;
    }
  }
  const TemporalCheck eta = verify_temporal_cutoff(TemporalCutoff{1.0, 0.5}, 100000);
  return {bad == 0 && eta.ok(), std::to_string(covers - bad) + "/" + std::to_string(covers) +
                                    " covers certified (3 scales, lattice + 8 jittered), eta bound worst ratio " +
                                    fmt("%.3f", eta.worst_ratio) + " on " + std::to_string(eta.samples) + " samples"};
}

// 7 -------------------------------------------------------------------------
Outcome sandwich() {
  const GridSpec g{32, 2.0 * pi, 0.05};
  const double R0 = g.box_length / 4.0;
  std::vector<ScalarField> densities;
  for (std::uint64_t s = 0; s < 20; ++s) {
    ScalarField f = random_trig(g, 900 + s, 3);
    for (double& v : f.values) v = s % 2 ? v * v : std::exp(v);
    densities.push_back(std::move(f));
  }
  int checks = 0, violations = 0;
  for (int d : {1, 2, 4})
    for (std::uint64_t v = 0; v < 8; ++v) {
      CoverSpec s;
      s.R = R0 / d;
      s.mode = CoverMode::jittered;
      s.seed = v;
      s.derivatives = false;
      const Cover c = build_cover(g, s);
      for (const auto& f : densities) {
        const double F0 = macro_average(f, c), F = ensemble_average(local_averages(f, c));
        violations += F < F0 / c.K1 || F > c.K2 * F0;
        ++checks;
      }
    }
  return {violations == 0 && checks == 480,
          std::to_string(violations) + " violations in " + std::to_string(checks) + " density/scale/variant checks"};
}

// 8 -------------------------------------------------------------------------
double worst_residual(const Trajectory& tr, double R, double T) {
  CoverSpec s;
  s.R = R;
  const Cover cov = build_cover(tr.grid(), s);
  const auto ints = integrate_trajectory(tr, cov);
  const CascadeTimes times{T, TemporalCutoff{T, 0.5}};
  double worst = 0.0;
  for (std::size_t i = 0; i < cov.size(); ++i)
    worst = std::max(worst, std::abs(enstrophy_budget(ints, cov, int(i), times, tr.grid().viscosity).residual));
  return worst;
}

Outcome budget() {
  const GridSpec g{32, 2.0 * pi, 0.1};
  SolverConfig c;
  c.grid = g;
  c.t_end = 0.5;
  c.snapshot_every = 0.00625;
  c.dt_fixed = 0.00625;
  const double exact = worst_residual(run(c, tg_vorticity(g, 0.0)), g.box_length / 8.0, 0.5);

  Scenario s;
  s.kind = ScenarioKind::random_solenoidal;
  s.seed = 3;
  s.k_max = 3;
  const auto random_run = [&](int n, double dt) {
    s.grid = GridSpec{n, 2.0 * pi, 0.02};
    SolverConfig rc;
    rc.grid = s.grid;
    rc.t_end = 0.25;
    rc.snapshot_every = dt;
    rc.dt_fixed = dt;
    return worst_residual(run(rc, generate(s)), s.grid.box_length / 8.0, 0.25);
  };
  const double coarse = random_run(32, 0.0125), fine = random_run(64, 0.00625);
  return {exact < 1e-3 && fine < 0.5 * coarse, "exact 2D worst residual " + fmt("%.2e", exact) +
                                                   " (limit 1e-3); random run " + fmt("%.2e", coarse) + " -> " +
                                                   fmt("%.2e", fine) + ", ratio " + fmt("%.3f", fine / coarse) +
                                                   " (limit 0.5)"};
}

// 9 -------------------------------------------------------------------------
Outcome degeneracy_2d() {
  const GridSpec g{32, 2.0 * pi, 0.02};
  std::mt19937_64 rng(21);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 2.0 * pi);
  struct Mode {
    int kx, ky;
    double a, ph;
  };
  std::vector<Mode> modes;
  for (int kx = -3; kx <= 3; ++kx)
    for (int ky = 0; ky <= 3; ++ky)
      if (kx != 0 || ky != 0) modes.push_back({kx, ky, N(rng), U(rng)});
  const VectorField w0 = sample_vec(g, [&](double x, double y, double) {
    double z = 0.0;
    for (const auto& m : modes) z += m.a * std::cos(m.kx * x + m.ky * y + m.ph);
    return Vec3{0.0, 0.0, z};
  });
  SolverConfig c;
  c.grid = g;
  c.t_end = 0.5;
  c.snapshot_every = 0.05;
  const Trajectory tr = run(c, w0);
  double scale = 0.0;
  for (const auto& sn : tr.snapshots) scale = std::max(scale, std::pow(max_magnitude(sn.omega), 3.0));
  double worst = 0.0;
  std::size_t values = 0;
  const StretchSeries series = stretching_series(tr);
  for (int d : {1, 2, 4}) {
    CoverSpec s;
    s.R = g.box_length / 4.0 / d;
    s.derivatives = false;
    for (double v : localized_vst(series, build_cover(g, s), {0.5, TemporalCutoff{0.5, 0.5}})) {
      worst = std::max(worst, std::abs(v));
      ++values;
    }
  }
  return {worst <= 1e-12 * scale, "max |VST| " + fmt("%.2e", worst) + " over " + std::to_string(values) +
                                      " elements, limit " + fmt("%.2e", 1e-12 * scale)};
}

// 10 ------------------------------------------------------------------------
Outcome coifman_rochberg() {
  const CoifmanRochbergResult r = coifman_rochberg_check(GridSpec{32, 1.0, 1.0}, 50, 7);
  const bool ok = r.invariance_error < 1e-12 && r.norms.values.size() == 50 && r.norms.bounded_by(3.0);
  return {ok, "invariance error " + fmt("%.1e", r.invariance_error) + "; max " + fmt("%.3f", r.norms.max) +
                  " vs median " + fmt("%.3f", r.norms.median) + " (ratio " + fmt("%.2f", r.norms.max / r.norms.median) +
                  ", limit 3)"};
}

// 11 ------------------------------------------------------------------------
Outcome weighted_bmo() {
  const GridSpec g{128, 1.0, 1.0};
  const OscillationConfig cfg;
  const ScalarField step = sample(g, [](double x, double, double) { return x >= 0.5 ? 1.0 : 0.0; });
  const ScalarField sll = sample(g, [&](double x, double, double) {
    const double d = std::max(std::abs(x - 0.5), g.dx());
    return std::sin(std::log(std::abs(std::log(d))));
  });
  const BmoNorm a = bmo_norm(step, BmoVariant::weighted, cfg), b = bmo_norm(sll, BmoVariant::weighted, cfg);
  bool grows = a.small.size() >= 5;
  for (std::size_t i = 1; i < a.small.size(); ++i) grows = grows && a.small[i].running > a.small[i - 1].running;
  const double spread = b.small.back().running / b.small.front().running;
  return {grows && spread <= 2.0 && b.small.size() >= 5,
          "step: " + fmt("%.3f", a.small.front().running) + " -> " + fmt("%.3f", a.small.back().running) + " over " +
              std::to_string(a.small.size()) + " radii, strictly increasing: " + (grows ? "yes" : "no") +
              "; sin log|log|: spread factor " + fmt("%.3f", spread)};
}

// 12 ------------------------------------------------------------------------
MeasureEstimate measure(std::vector<Interval> k, std::complex<double> z0, std::size_t walkers, std::uint64_t seed,
                        std::optional<Arc> arc = std::nullopt) {
  DiskProblem p;
  p.absorbing = std::move(k);
  p.z0 = z0;
  p.walkers = walkers;
  p.seed = seed;
  p.arc = arc;
  return harmonic_measure_ws(p);
}

Outcome harmonic_estimator() {
  Timer tm;
  const std::size_t N = 100000;
  bool arcs = true;
  double worst_arc = 0.0;
  for (double th : {0.5, 1.5, 3.0}) {
    const auto e = measure({}, {0.0, 0.0}, N, 1, Arc{0.3, 0.3 + th});
    const double z = std::abs(e.estimate - th / (2.0 * pi)) / e.stderr_;
    worst_arc = std::max(worst_arc, z);
    arcs = arcs && z <= 3.0;
  }
  const std::complex<double> z0{0.1, 0.45};
  const auto a = measure({{-0.2, 0.2}}, z0, N, 2), b = measure({{-0.5, 0.3}}, z0, N, 2),
             c = measure({{-0.8, 0.7}}, z0, N, 2);
  const bool mono = a.estimate <= b.estimate + 2.0 * std::hypot(a.stderr_, b.stderr_) &&
                    b.estimate <= c.estimate + 2.0 * std::hypot(b.stderr_, c.stderr_) && a.estimate < c.estimate;
  const std::vector<Interval> k{{-0.6, -0.1}, {0.2, 0.5}};
  const auto up = measure(k, {0.15, 0.4}, N, 3), down = measure(k, {0.15, -0.4}, N, 4);
  const bool sym = std::abs(up.estimate - down.estimate) <= 3.0 * std::hypot(up.stderr_, down.stderr_);
  const double oracle = slit_disk_laplace(0.5, 128, 128);
  const auto slit = measure({{-1.0, 1.0}}, {0.0, 0.5}, N, 5);
  const double gap = std::abs(slit.estimate - oracle), tol = 2.0 * slit.stderr_ + 1e-3;
  const double s = tm.seconds();
  return {arcs && mono && sym && gap <= tol && s < 60.0,
          "arc worst |z| " + fmt("%.2f", worst_arc) + " (limit 3); monotone " + (mono ? "yes" : "no") + "; symmetric " +
              (sym ? "yes" : "no") + "; slit " + fmt("%.4f", slit.estimate) + " vs oracle " + fmt("%.4f", oracle) +
              " (gap " + fmt("%.4f", gap) + ", limit " + fmt("%.4f", tol) + "); " + fmt("%.1f", s) + " s"};
}

// 13 ------------------------------------------------------------------------
std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) {
      std::ifstream in(e.path(), std::ios::binary);
      out[fs::relative(e.path(), root).string()] = std::string(std::istreambuf_iterator<char>(in), {});
    }
  return out;
}

Outcome determinism() {
  const Json j = Json::parse(R"({
    "config_version": 1,
    "seed": 11,
    "grid": {"n": 32, "viscosity": 0.05},
    "scenario": {"kind": "burgers_tube", "tube_radius": 0.8, "circulation": 1.0, "axis": 2},
    "solver": {"t_end": 1.0, "snapshot_every": 0.1},
    "geometry": {"delta": 0.5, "n_dir": 32, "max_probes": 64, "r_levels": 3},
    "cascade": {"t": 0.9, "variants": 8},
    "oscillation": {"cr_samples": 20, "divcurl_samples": 20},
    "harmonic": {"walkers": 10000}
  })");
  const ExperimentConfig c = parse_config(j);
  const fs::path base = fs::temp_directory_path() / "vscope_acceptance";
  fs::remove_all(base);
  (void)run_experiment(c, base / "a");
  (void)run_experiment(c, base / "b");
  const auto a = read_tree(base / "a"), b = read_tree(base / "b");
  std::size_t same = 0, bytes = 0;
  for (const auto& [name, data] : a) {
    const auto it = b.find(name);
    same += it != b.end() && it->second == data;
    bytes += data.size();
  }
  fs::remove_all(base);
  return {same == a.size() && a.size() == b.size() && a.size() > 10,
          std::to_string(same) + "/" + std::to_string(a.size()) + " files identical (" + std::to_string(bytes) +
              " bytes)"};
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"solver exactness", solver_exactness},
      {"spectral identities", spectral_identities},
      {"discrete Chebyshev bound", chebyshev},
      {"criticality scaling of tubes", criticality},
      {"h(delta) formula", h_formula},
      {"cover certification", cover_certification},
      {"average sandwich", sandwich},
      {"enstrophy budget closure", budget},
      {"2D degeneracy", degeneracy_2d},
      {"Coifman-Rochberg evidence", coifman_rochberg},
      {"weighted bmo discrimination", weighted_bmo},
      {"harmonic-measure estimator", harmonic_estimator},
      {"end-to-end determinism", determinism},
  };
  int failed = 0, index = 0, ran = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    if (argc > 1 && std::find_if(argv + 1, argv + argc, [&](const char* a) { return std::atoi(a) == index; }) ==
                        argv + argc)
      continue;
    Timer tm;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    ++ran;
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", index, name.c_str(), o.detail.c_str(),
                tm.seconds());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
