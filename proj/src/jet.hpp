#pragma once

// Second-order forward-mode jets in three variables: value, gradient and
// Hessian, enough to evaluate Laplacians of composed cutoffs exactly.

#include <array>
#include <cmath>

namespace vscope::detail {

struct Jet {
  double v = 0.0;
  std::array<double, 3> g{};
  std::array<double, 9> h{};

  static Jet constant(double c) {
    Jet j;
    j.v = c;
    return j;
  }
  static Jet variable(double x, int k) {
    Jet j;
    j.v = x;
    j.g[k] = 1.0;
    return j;
  }
  double laplacian() const { return h[0] + h[4] + h[8]; }
};

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v + b.v;
  for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] + b.g[i];
  for (int i = 0; i < 9; ++i) r.h[i] = a.h[i] + b.h[i];
  return r;
}

inline Jet operator-(const Jet& a, double c) {
  Jet r = a;
  r.v -= c;
  return r;
}

inline Jet operator+(double c, const Jet& a) {
  Jet r = a;
  r.v += c;
  return r;
}

inline Jet operator*(double c, const Jet& a) {
  Jet r;
  r.v = c * a.v;
  for (int i = 0; i < 3; ++i) r.g[i] = c * a.g[i];
  for (int i = 0; i < 9; ++i) r.h[i] = c * a.h[i];
  return r;
}

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v * b.v;
  for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r.h[3 * i + j] = a.h[3 * i + j] * b.v + a.v * b.h[3 * i + j] + a.g[i] * b.g[j] + a.g[j] * b.g[i];
  return r;
}

/// f(a) given f, f', f'' at a.v.
inline Jet chain(const Jet& a, double f0, double f1, double f2) {
  Jet r;
  r.v = f0;
  for (int i = 0; i < 3; ++i) r.g[i] = f1 * a.g[i];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.h[3 * i + j] = f1 * a.h[3 * i + j] + f2 * a.g[i] * a.g[j];
  return r;
}

inline Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

/// |a - p| for a three-vector of jets.
inline Jet distance(const std::array<Jet, 3>& a, const std::array<double, 3>& p) {
  Jet sum = Jet::constant(0.0);
  for (int k = 0; k < 3; ++k) {
    const Jet d = a[k] - p[k];
    sum = sum + d * d;
  }
  return sqrt(sum);
}

}  // namespace vscope::detail
