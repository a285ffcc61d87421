#include "vscope/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vscope {

Exec default_exec() {
#ifdef _OPENMP
  return Exec::parallel;
#else
  return Exec::serial;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace kernels {

namespace {

inline int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

// Sliding periodic window sum of length 2w+1 along one line with stride `step`.
void window_line(const double* in, double* out, int n, std::size_t step, int w) {
  CompensatedSum acc;
  for (int o = -w; o <= w; ++o) acc.add(in[std::size_t(wrap(o, n)) * step]);
  out[0] = acc.value();
  for (int i = 1; i < n; ++i) {
    acc.add(in[std::size_t(wrap(i + w, n)) * step]);
    acc.add(-in[std::size_t(wrap(i - w - 1, n)) * step]);
    out[std::size_t(i) * step] = acc.value();
  }
}

std::vector<int> subgrid(int n, int stride) {
  std::vector<int> c;
  for (int i = 0; i < n; i += stride) c.push_back(i);
  return c;
}

// Sum of |f - mean| (or |f| when mean_only is false) over the cube at (ci,cj,ck).
void cube_moments(std::span<const double> f, int n, int side, int ci, int cj, int ck, double& mean,
                  double& osc, double& abs_mean) {
  const int lo = -(side / 2);
  const double inv = 1.0 / (double(side) * side * side);
  double s = 0.0;
  double sa = 0.0;
  for (int dk = 0; dk < side; ++dk) {
    const std::size_t kk = std::size_t(wrap(ck + lo + dk, n)) * n * n;
    for (int dj = 0; dj < side; ++dj) {
      const std::size_t jj = kk + std::size_t(wrap(cj + lo + dj, n)) * n;
      for (int di = 0; di < side; ++di) {
        const double v = f[jj + wrap(ci + lo + di, n)];
        s += v;
        sa += std::abs(v);
      }
    }
  }
  mean = s * inv;
  abs_mean = sa * inv;
  double o = 0.0;
  for (int dk = 0; dk < side; ++dk) {
    const std::size_t kk = std::size_t(wrap(ck + lo + dk, n)) * n * n;
    for (int dj = 0; dj < side; ++dj) {
      const std::size_t jj = kk + std::size_t(wrap(cj + lo + dj, n)) * n;
      for (int di = 0; di < side; ++di) o += std::abs(f[jj + wrap(ci + lo + di, n)] - mean);
    }
  }
  osc = o * inv;
}

void check_cube_args(std::span<const double> f, int n, int side, int stride) {
  if (f.size() != std::size_t(n) * n * n) throw std::invalid_argument("kernel: field size is not n^3");
  if (side < 1) throw std::invalid_argument("kernel: cube side must be >= 1");
  if (stride < 1) throw std::invalid_argument("kernel: stride must be >= 1");
}

}  // namespace

double blocked_sum(std::span<const double> v, std::size_t block, Exec exec) {
  if (block == 0) block = 1;
  const std::size_t nblocks = (v.size() + block - 1) / block;
  std::vector<double> partial(nblocks, 0.0);
  const auto body = [&](std::ptrdiff_t b) {
    const std::size_t lo = std::size_t(b) * block;
    const std::size_t hi = std::min(v.size(), lo + block);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    partial[std::size_t(b)] = s;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < std::ptrdiff_t(nblocks); ++b) body(b);
  } else {
    for (std::ptrdiff_t b = 0; b < std::ptrdiff_t(nblocks); ++b) body(b);
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double naive_sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void cross(std::span<const double> ax, std::span<const double> ay, std::span<const double> az,
           std::span<const double> bx, std::span<const double> by, std::span<const double> bz,
           std::span<double> ox, std::span<double> oy, std::span<double> oz, Exec exec) {
  const std::ptrdiff_t n = std::ptrdiff_t(ax.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      ox[i] = ay[i] * bz[i] - az[i] * by[i];
      oy[i] = az[i] * bx[i] - ax[i] * bz[i];
      oz[i] = ax[i] * by[i] - ay[i] * bx[i];
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      ox[i] = ay[i] * bz[i] - az[i] * by[i];
      oy[i] = az[i] * bx[i] - ax[i] * bz[i];
      oz[i] = ax[i] * by[i] - ay[i] * bx[i];
    }
  }
}

std::vector<double> box_sum(std::span<const double> f, int n, int w, Exec exec) {
  if (f.size() != std::size_t(n) * n * n) throw std::invalid_argument("box_sum: field size is not n^3");
  if (w < 0) throw std::invalid_argument("box_sum: negative half-width");
  const std::size_t nn = std::size_t(n) * n;
  std::vector<double> a(f.begin(), f.end());
  std::vector<double> b(a.size());
  // x lines, then y lines, then z lines; each line is independent.
  const auto pass = [&](const std::vector<double>& in, std::vector<double>& out, int axis) {
    const std::size_t step = axis == 0 ? 1 : axis == 1 ? std::size_t(n) : nn;
    const auto line = [&](std::ptrdiff_t l) {
      const int p = int(l % n);
      const int q = int(l / n);
      std::size_t base;
      if (axis == 0)
        base = std::size_t(p) * n + std::size_t(q) * nn;
      else if (axis == 1)
        base = std::size_t(p) + std::size_t(q) * nn;
      else
        base = std::size_t(p) + std::size_t(q) * n;
      window_line(in.data() + base, out.data() + base, n, step, w);
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t l = 0; l < std::ptrdiff_t(nn); ++l) line(l);
    } else {
      for (std::ptrdiff_t l = 0; l < std::ptrdiff_t(nn); ++l) line(l);
    }
  };
  pass(a, b, 0);
  pass(b, a, 1);
  pass(a, b, 2);
  return b;
}

std::vector<double> mean_oscillations(std::span<const double> f, int n, int side, int stride, Exec exec) {
  check_cube_args(f, n, side, stride);
  const auto c = subgrid(n, stride);
  const std::ptrdiff_t m = std::ptrdiff_t(c.size());
  std::vector<double> out(std::size_t(m * m * m));
  const auto body = [&](std::ptrdiff_t idx) {
    const int ci = c[std::size_t(idx % m)];
    const int cj = c[std::size_t((idx / m) % m)];
    const int ck = c[std::size_t(idx / (m * m))];
    double mean, osc, am;
    cube_moments(f, n, side, ci, cj, ck, mean, osc, am);
    out[std::size_t(idx)] = osc;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t idx = 0; idx < m * m * m; ++idx) body(idx);
  } else {
    for (std::ptrdiff_t idx = 0; idx < m * m * m; ++idx) body(idx);
  }
  return out;
}

OscillationMax max_mean_oscillation(std::span<const double> f, int n, int side, int stride, Exec exec) {
  const auto osc = mean_oscillations(f, n, side, stride, exec);
  OscillationMax best;
  for (std::size_t i = 0; i < osc.size(); ++i) {
    if (osc[i] > best.value) {
      best.value = osc[i];
      best.center = i;
    }
  }
  return best;
}

double max_abs_average(std::span<const double> f, int n, int side, int stride, Exec exec) {
  check_cube_args(f, n, side, stride);
  const auto c = subgrid(n, stride);
  const std::ptrdiff_t m = std::ptrdiff_t(c.size());
  std::vector<double> out(std::size_t(m * m * m));
  const auto body = [&](std::ptrdiff_t idx) {
    double mean, osc, am;
    cube_moments(f, n, side, c[std::size_t(idx % m)], c[std::size_t((idx / m) % m)], c[std::size_t(idx / (m * m))], mean,
                 osc, am);
    out[std::size_t(idx)] = am;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t idx = 0; idx < m * m * m; ++idx) body(idx);
  } else {
    for (std::ptrdiff_t idx = 0; idx < m * m * m; ++idx) body(idx);
  }
  return out.empty() ? 0.0 : *std::max_element(out.begin(), out.end());
}

}  // namespace kernels
}  // namespace vscope
