#pragma once

#include <cstdint>
#include <string>

#include "vscope/grid.hpp"

namespace vscope {

enum class ScenarioKind { taylor_green_2d3d, abc_flow, burgers_tube, random_solenoidal, clumped_ball };

const char* scenario_name(ScenarioKind k);
ScenarioKind parse_scenario(const std::string& s);

struct Scenario {
  ScenarioKind kind = ScenarioKind::taylor_green_2d3d;
  GridSpec grid;
  double amplitude = 1.0;

  /// taylor_green_2d3d and abc_flow: integer wavenumber in units of 2 pi / L.
  int wavenumber = 1;

  /// burgers_tube: core radius a and circulation Gamma of the tube along `axis`.
  /// A counter-rotating partner half a box away keeps the field mean-free.
  double tube_radius = 0.0;
  double circulation = 1.0;
  int axis = 2;

  /// random_solenoidal: energy spectrum ~ k^slope on integer shells 1..k_max.
  double spectrum_slope = -5.0 / 3.0;
  int k_max = 4;
  std::uint64_t seed = 0;

  /// clumped_ball: |omega| ~ min(r^-p, r_c^-p) sin(theta) around the box
  /// centre, tapered smoothly to zero between 0.38 L and 0.48 L.
  double profile_exponent = 2.0;
  double core_radius = 0.0;  // 0 selects 0.04 L

  void validate() const;
};

/// Divergence-free, mean-free initial vorticity.
VectorField generate(const Scenario& s);

/// Centre of the primary tube in the plane transverse to its axis.
Vec3 tube_center(const Scenario& s);

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 clamped to [0, 1].
double smoothstep5(double t);

}  // namespace vscope
