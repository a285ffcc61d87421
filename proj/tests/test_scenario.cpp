#include "doctest.h"
#include "support.hpp"
#include "vscope/scenario.hpp"

using namespace vscope;
using namespace vtest;

namespace {

void check_solenoidal_mean_free(const VectorField& w) {
  const SpectralVector h = forward(w);
  CHECK(divergence_ratio(h) < 1e-10);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(h[c].at(0, 0, 0)) < 1e-9 * (1.0 + spectral_l2_norm(h[c])));
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("Taylor-Green amplitude 1 is (0, 0, -2 sin x sin y)") {
  Scenario s;
  s.grid = GridSpec{16, 2.0 * pi, 0.1};
  const VectorField w = generate(s);
  const VectorField ref = sample_vec(s.grid, [](double x, double y, double) {
    return Vec3{0.0, 0.0, -2.0 * std::sin(x) * std::sin(y)};
  });
  CHECK(max_abs_diff(w, ref) < 1e-15);
}

TEST_CASE("every kind is solenoidal and mean-free") {
  for (auto kind : {ScenarioKind::taylor_green_2d3d, ScenarioKind::abc_flow, ScenarioKind::burgers_tube,
                    ScenarioKind::random_solenoidal, ScenarioKind::clumped_ball}) {
    Scenario s;
    s.kind = kind;
    s.grid = GridSpec{32, 2.0 * pi, 0.1};
    s.tube_radius = 1.0;
    const std::string name = scenario_name(kind);
    CAPTURE(name);
    check_solenoidal_mean_free(generate(s));
    CHECK(parse_scenario(scenario_name(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_scenario("vortex_sheet"), std::invalid_argument);
}

TEST_CASE("random field is reproducible and seed dependent") {
  Scenario s;
  s.kind = ScenarioKind::random_solenoidal;
  s.grid = GridSpec{16, 2.0 * pi, 0.1};
  s.seed = 4;
  const VectorField a = generate(s), b = generate(s);
  CHECK(max_abs_diff(a, b) == 0.0);
  s.seed = 5;
  CHECK(max_abs_diff(a, generate(s)) > 0.1);
}

TEST_CASE("tube peak is Gamma / (pi a^2)") {
  Scenario s;
  s.kind = ScenarioKind::burgers_tube;
  s.grid = GridSpec{64, 2.0 * pi, 0.1};
  s.tube_radius = s.grid.box_length / 8.0;
  s.circulation = 1.0;
  const double peak = 1.0 / (pi * s.tube_radius * s.tube_radius);
  CHECK(max_magnitude(generate(s)) == doctest::Approx(peak).epsilon(0.01));
}

TEST_CASE("under-resolved and oversized tubes are rejected") {
  Scenario s;
  s.kind = ScenarioKind::burgers_tube;
  s.grid = GridSpec{16, 2.0 * pi, 0.1};
  s.tube_radius = 4.0 * s.grid.dx();
  CHECK_THROWS_WITH_AS(generate(s), doctest::Contains("under-resolved"), std::invalid_argument);
  s.tube_radius = s.grid.box_length / 4.0;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
}

TEST_CASE("smoothstep") {
  CHECK(smoothstep5(-1.0) == 0.0);
  CHECK(smoothstep5(2.0) == 1.0);
  CHECK(smoothstep5(0.5) == doctest::Approx(0.5));
  CHECK(smoothstep5(0.25) == doctest::Approx(6 * std::pow(0.25, 5) - 15 * std::pow(0.25, 4) + 10 * std::pow(0.25, 3)));
}

}  // TEST_SUITE
