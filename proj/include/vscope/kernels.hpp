#pragma once

// Data-parallel building blocks. Every kernel takes an Exec policy: `serial` is
// the reference path kept for testing, `parallel` runs the same arithmetic under
// OpenMP. Work is split so that each output element (or each fixed block of a
// reduction) is computed by exactly one thread in a fixed order, so both
// policies give bit-identical results.

#include <cstddef>
#include <span>
#include <vector>

namespace vscope {

enum class Exec { serial, parallel };

/// Exec::parallel when built with OpenMP, else serial.
Exec default_exec();
int max_threads();

namespace kernels {

/// Sum of v in blocks of `block` entries (partial sums combined in block order).
double blocked_sum(std::span<const double> v, std::size_t block, Exec exec);

/// Plain left-to-right sum; reference for blocked_sum.
double naive_sum(std::span<const double> v);

/// out = a x b pointwise on three-component planar arrays.
void cross(std::span<const double> ax, std::span<const double> ay, std::span<const double> az,
           std::span<const double> bx, std::span<const double> by, std::span<const double> bz,
           std::span<double> ox, std::span<double> oy, std::span<double> oz, Exec exec);

/// Periodic centered box sum over (2w+1)^3 points of an n^3 array, by three
/// separable running sums.
std::vector<double> box_sum(std::span<const double> f, int n, int w, Exec exec);

/// Mean oscillation (1/|I|) sum |f - f_I| over the cube of `side` points per axis
/// whose lower corner is offset -side/2 from each center; centers on a stride
/// subgrid. Returns the maximum over centers together with the argmax.
struct OscillationMax {
  double value = 0.0;
  std::size_t center = 0;
};
OscillationMax max_mean_oscillation(std::span<const double> f, int n, int side, int stride, Exec exec);

/// Per-center mean oscillation, one value per stride-subgrid center.
std::vector<double> mean_oscillations(std::span<const double> f, int n, int side, int stride, Exec exec);

/// Max over the stride subgrid of the cube average of |f|.
double max_abs_average(std::span<const double> f, int n, int side, int stride, Exec exec);

}  // namespace kernels
}  // namespace vscope
