#include <cmath>
#include <complex>

#include "doctest.h"
#include "support.hpp"
#include "vscope/scenario.hpp"
#include "vscope/solver.hpp"

using namespace vscope;
using namespace vtest;

namespace {

VectorField advected_tg(const GridSpec& g, const Vec3& U, double t) {
  const double d = std::exp(-2.0 * g.viscosity * t);
  return sample_vec(g, [&](double x, double y, double) {
    return Vec3{0.0, 0.0, -2.0 * std::sin(x - U[0] * t) * std::sin(y - U[1] * t) * d};
  });
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("config validation") {
  SolverConfig c;
  c.dt_cfl = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.dt_cfl = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.dt_cfl = 0.5;
  c.t_end = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("rhs of zero is zero") {
  const GridSpec g{8, 2.0 * pi, 0.1};
  CHECK(max_magnitude(vorticity_rhs(VectorField(g))) == 0.0);
}

TEST_CASE("2D flows carry no vortex stretching") {
  const GridSpec g{16, 2.0 * pi, 0.1};
  // z-independent, only omega_z: the random trig field with kmax 0 in z
  const ScalarField zeta = sample(g, [](double x, double y, double) {
    return std::sin(x + 2 * y) + 0.5 * std::cos(3 * x - y) - 0.7 * std::sin(2 * x) * std::cos(y);
  });
  VectorField w(g);
  w[2] = zeta;
  const VectorField s = stretching_vector(w);
  CHECK(max_magnitude(s) < 1e-12 * max_magnitude(w));
  CHECK(max_abs(stretching_density(w)) < 1e-12 * max_magnitude(w) * max_magnitude(w));
}

TEST_CASE("rhs matches the complex-step collocation oracle on 3D Taylor-Green") {
  const GridSpec g{16, 2.0 * pi, 0.1};
  const VectorField w = sample_vec(g, [](double x, double y, double z) {
    const auto v = tg3_w(x, y, z);
    return Vec3{v[0], v[1], v[2]};
  });
  VectorField ref(g);
  double curl_err = 0.0;
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec3 p = g.position(i, j, k);
        const auto Ju = jacobian([](auto x, auto y, auto z) { return tg3_u(x, y, z); }, p);
        const auto Jw = jacobian([](auto x, auto y, auto z) { return tg3_w(x, y, z); }, p);
        const auto u = tg3_u(p[0], p[1], p[2]);
        const auto om = tg3_w(p[0], p[1], p[2]);
        const Vec3 c{Ju[2][1] - Ju[1][2], Ju[0][2] - Ju[2][0], Ju[1][0] - Ju[0][1]};
        for (int a = 0; a < 3; ++a) {
          curl_err = std::max(curl_err, std::abs(c[a] - om[a]));
          double r = 0.0;
          for (int b = 0; b < 3; ++b) r += om[b] * Ju[a][b] - u[b] * Jw[a][b];
          ref[a].at(i, j, k) = r;
        }
      }
  CHECK(curl_err < 1e-14);
  CHECK(rel_err(vorticity_rhs(w), ref) < 1e-10);
}

TEST_CASE("Beltrami flow has zero nonlinear term") {
  Scenario s;
  s.kind = ScenarioKind::abc_flow;
  s.grid = GridSpec{16, 2.0 * pi, 0.1};
  const VectorField w = generate(s);
  CHECK(max_magnitude(vorticity_rhs(w)) < 1e-12 * max_magnitude(w));
}

TEST_CASE("pure viscous decay of a single mode") {
  const GridSpec g{16, 2.0 * pi, 0.1};
  SolverConfig c;
  c.grid = g;
  c.linear_only = true;
  const VectorField w = sample_vec(g, [](double x, double, double) { return Vec3{0.0, std::cos(x), std::sin(x)}; });
  const VectorField w1 = step(w, 0.01, c);
  const double f = std::exp(-0.001);
  double err = 0.0;
  for (int a = 1; a < 3; ++a)
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(w1[a][i] - f * w[a][i]));
  CHECK(err < 1e-13);

  // several modes decay independently
  const VectorField v = sample_vec(g, [](double x, double y, double z) {
    return Vec3{std::sin(2 * y + z), std::cos(3 * z), std::sin(x + y)};
  });
  const VectorField v1 = step(v, 0.05, c);
  const VectorField ref = sample_vec(g, [](double x, double y, double z) {
    return Vec3{std::exp(-0.1 * 5 * 0.05) * std::sin(2 * y + z), std::exp(-0.1 * 9 * 0.05) * std::cos(3 * z),
                std::exp(-0.1 * 2 * 0.05) * std::sin(x + y)};
  });
  CHECK(max_abs_diff(v1, ref) < 1e-13);
}

TEST_CASE("zero stays zero") {
  const GridSpec g{8, 2.0 * pi, 0.1};
  SolverConfig c;
  c.grid = g;
  c.t_end = 0.3;
  const Trajectory t = run(c, VectorField(g));
  CHECK(t.snapshots.size() >= 2);
  for (const auto& s : t.snapshots) CHECK(max_magnitude(s.omega) == 0.0);
  CHECK(t.status == "ok");
}

TEST_CASE("steps beyond the CFL limit are refused with the required dt") {
  const GridSpec g{16, 2.0 * pi, 0.1};
  SolverConfig c;
  c.grid = g;
  const VorticitySolver s(c);
  const SpectralVector w = forward(tg_vorticity(g, 0.0));
  const double dmax = s.max_stable_dt(w);
  CHECK(dmax == doctest::Approx(0.4 * g.dx() / 1.0).epsilon(1e-6));
  try {
    (void)s.step(w, 2.0 * dmax);
    FAIL("expected CflError");
  } catch (const CflError& e) {
    CHECK(e.required == doctest::Approx(dmax));
    CHECK(std::string(e.what()).find("dt") != std::string::npos);
  }
}

TEST_CASE("exact 2D solution at coarse steps") {
  const GridSpec g{16, 2.0 * pi, 0.1};
  SolverConfig c;
  c.grid = g;
  c.t_end = 0.5;
  c.snapshot_every = 0.25;
  const Trajectory t = run(c, tg_vorticity(g, 0.0));
  REQUIRE(t.snapshots.size() == 3);
  CHECK(t.final_time() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(rel_err(t.snapshots.back().omega, tg_vorticity(g, 0.5)) < 1e-10);
}

TEST_CASE("global error is fourth order in dt") {
  const GridSpec g{16, 2.0 * pi, 0.1};
  const Vec3 U{1.0, 0.5, 0.0};
  std::vector<double> dts{0.1, 0.05, 0.025, 0.0125}, errs;
  for (double dt : dts) {
    SolverConfig c;
    c.grid = g;
    c.t_end = 1.0;
    c.snapshot_every = 1.0;
    c.dt_fixed = dt;
    c.dt_cfl = 1.0;
    c.mean_velocity = U;
    const Trajectory t = run(c, advected_tg(g, U, 0.0));
    errs.push_back(rel_err(t.snapshots.back().omega, advected_tg(g, U, 1.0)));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double x = std::log(dts[i]), y = std::log(errs[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double m = double(dts.size());
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(slope == doctest::Approx(4.0).epsilon(0.3 / 4.0));
}

TEST_CASE("local error falls by at least 16x when dt halves") {
  const GridSpec g{16, 2.0 * pi, 0.1};
  const Vec3 U{1.0, 0.5, 0.0};
  SolverConfig c;
  c.grid = g;
  c.dt_cfl = 1.0;
  c.mean_velocity = U;
  const VectorField w0 = advected_tg(g, U, 0.0);
  const auto local = [&](double dt) { return diff2(step(w0, dt, c), advected_tg(g, U, dt)); };
  const double ratio = local(0.16) / local(0.08);
  MESSAGE("local error ratio ", ratio);
  CHECK(ratio > 16.0);
  CHECK(ratio < 40.0);  // fifth order per step gives 32
}

TEST_CASE("random run: energy monotone, divergence and mean preserved") {
  Scenario s;
  s.kind = ScenarioKind::random_solenoidal;
  s.grid = GridSpec{32, 2.0 * pi, 0.05};
  s.seed = 5;
  SolverConfig c;
  c.grid = s.grid;
  c.t_end = 0.5;
  const Trajectory t = run(c, generate(s));
  CHECK(t.energy_violations == 0);
  for (std::size_t i = 1; i < t.series.size(); ++i)
    CHECK(t.series[i].energy <= t.series[i - 1].energy * (1.0 + 1e-8));
  for (const auto& sn : t.snapshots) {
    const SpectralVector h = forward(sn.omega);
    CHECK(divergence_ratio(h) < 1e-10);
  }
}

TEST_CASE("divergence and zero mean survive 1000 steps") {
  Scenario s;
  s.kind = ScenarioKind::random_solenoidal;
  s.grid = GridSpec{16, 2.0 * pi, 0.02};
  s.seed = 9;
  const VorticitySolver solver([&] {
    SolverConfig c;
    c.grid = s.grid;
    return c;
  }());
  SpectralVector w = forward(generate(s));
  const double dt = 0.5 * solver.max_stable_dt(w);
  double worst = 0.0, mean = 0.0;
  for (int i = 0; i < 1000; ++i) {
    w = solver.step(w, dt);
    if (i % 50 == 49) worst = std::max(worst, divergence_ratio(w));
    for (int c = 0; c < 3; ++c) mean = std::max(mean, std::abs(w[c].at(0, 0, 0)));
  }
  CHECK(worst < 1e-10);
  CHECK(mean == 0.0);
}

TEST_CASE("blow-up guard halts and flags the run") {
  Scenario s;
  s.kind = ScenarioKind::random_solenoidal;
  s.grid = GridSpec{16, 2.0 * pi, 0.001};
  s.seed = 2;
  SolverConfig c;
  c.grid = s.grid;
  c.t_end = 2.0;
  c.blowup_factor = 1.001;
  const Trajectory t = run(c, generate(s));
  CHECK(t.under_resolved);
  CHECK(t.status.find("under-resolved") != std::string::npos);
  CHECK(t.final_time() < 2.0);
}

}  // TEST_SUITE
