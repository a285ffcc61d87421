#include "vscope/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace vscope {

double h_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("h_delta: delta must lie in (0, 1)");
  const double d2 = delta * delta;
  return 2.0 / std::numbers::pi * std::asin((1.0 - d2) / (1.0 + d2));
}

double alpha_min(double delta) {
  const double h = h_delta(delta);
  return (1.0 - h) / h;
}

double M_delta(double omega_inf, double d0, double delta, std::optional<double> alpha) {
  if (!(d0 > 0.0)) throw std::invalid_argument("M_delta: d0 must be positive");
  const double a = alpha.value_or(alpha_min(delta));
  if (alpha && *alpha < alpha_min(delta)) throw std::invalid_argument("M_delta: alpha below (1 - h)/h");
  return omega_inf / std::pow(d0, a);
}

std::vector<Interval> normalize_intervals(std::vector<Interval> k) {
  for (auto& iv : k) {
    if (iv.lo > iv.hi) std::swap(iv.lo, iv.hi);
    iv.lo = std::max(iv.lo, -1.0);
    iv.hi = std::min(iv.hi, 1.0);
  }
  std::erase_if(k, [](const Interval& iv) { return iv.hi <= iv.lo; });
  std::sort(k.begin(), k.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& iv : k) {
    if (!out.empty() && iv.lo <= out.back().hi)
      out.back().hi = std::max(out.back().hi, iv.hi);
    else
      out.push_back(iv);
  }
  return out;
}

namespace {

double dist_to_set(std::complex<double> z, const std::vector<Interval>& k) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& iv : k) {
    const double dx = std::max({iv.lo - z.real(), 0.0, z.real() - iv.hi});
    d = std::min(d, std::hypot(dx, z.imag()));
  }
  return d;
}

bool on_arc(std::complex<double> z, const Arc& a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double th = std::arg(z) - a.theta0;
  th -= two_pi * std::floor(th / two_pi);
  return th <= a.theta1 - a.theta0;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void DiskProblem::validate() const {
  if (walkers == 0) throw std::invalid_argument("DiskProblem: walker count must be positive");
  if (!(eps > 0.0 && eps < 0.1)) throw std::invalid_argument("DiskProblem: eps must lie in (0, 0.1)");
  if (!(std::abs(z0) < 1.0 - eps)) throw std::invalid_argument("DiskProblem: z0 must lie strictly inside the disk");
  for (const auto& iv : absorbing)
    if (iv.lo < -1.0 || iv.hi > 1.0 || iv.lo > iv.hi)
      throw std::invalid_argument("DiskProblem: interval endpoints must satisfy -1 <= lo <= hi <= 1");
  if (dist_to_set(z0, normalize_intervals(absorbing)) <= eps)
    throw std::invalid_argument("DiskProblem: z0 lies within eps of the absorbing set");
  if (arc && !(arc->theta1 > arc->theta0 && arc->theta1 - arc->theta0 <= 2.0 * std::numbers::pi))
    throw std::invalid_argument("DiskProblem: arc needs theta0 < theta1 <= theta0 + 2 pi");
}

MeasureEstimate harmonic_measure_ws(const DiskProblem& p) {
  p.validate();
  const auto k = normalize_intervals(p.absorbing);
  const std::int64_t n = std::int64_t(p.walkers);
  std::size_t hits = 0, capped = 0;
  const double two_pi = 2.0 * std::numbers::pi;

#pragma omp parallel for schedule(dynamic, 256) reduction(+ : hits, capped)
  for (std::int64_t w = 0; w < n; ++w) {
    std::mt19937_64 rng(splitmix64(p.seed ^ splitmix64(std::uint64_t(w))));
    std::uniform_real_distribution<double> angle(0.0, two_pi);
    std::complex<double> z = p.z0;
    bool done = false;
    for (std::size_t s = 0; s < p.max_steps; ++s) {
      const double d_circle = 1.0 - std::abs(z);
      const double d_k = dist_to_set(z, k);
      if (d_k < p.eps) {
        ++hits;
        done = true;
        break;
      }
      if (d_circle < p.eps) {
        if (p.arc && on_arc(z, *p.arc)) ++hits;
        done = true;
        break;
      }
      z += std::min(d_circle, d_k) * std::polar(1.0, angle(rng));
    }
    if (!done) ++capped;
  }

  MeasureEstimate e;
  e.walkers = p.walkers;
  e.hits = hits;
  e.circle_first = p.walkers - hits;
  e.capped = capped;
  e.estimate = double(hits) / double(p.walkers);
  e.stderr_ = std::sqrt(e.estimate * (1.0 - e.estimate) / double(p.walkers));
  if (capped > 0)
    e.bias_note = std::to_string(capped) + " walkers hit the step cap and were counted as circle-absorbed";
  return e;
}

const char* layout_name(Layout l) {
  switch (l) {
    case Layout::centered: return "centered";
    case Layout::periodic_blocks: return "periodic_blocks";
    case Layout::random_blocks: return "random_blocks";
  }
  return "?";
}

Layout parse_layout(const std::string& s) {
  if (s == "centered") return Layout::centered;
  if (s == "periodic_blocks" || s == "periodic") return Layout::periodic_blocks;
  if (s == "random_blocks" || s == "random") return Layout::random_blocks;
  throw std::invalid_argument("unknown layout '" + s + "' (expected centered, periodic_blocks, random_blocks)");
}

std::vector<Interval> sparse_layout(Layout layout, double delta, int blocks, std::uint64_t seed) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("sparse_layout: delta must lie in [0, 1]");
  if (blocks < 1) throw std::invalid_argument("sparse_layout: blocks must be >= 1");
  if (delta == 0.0) return {};
  std::vector<Interval> k;
  switch (layout) {
    case Layout::centered:
      k.push_back({-delta, delta});
      break;
    case Layout::periodic_blocks: {
      const double cell = 2.0 / blocks, half = delta * cell / 2.0;
      for (int b = 0; b < blocks; ++b) {
        const double c = -1.0 + (b + 0.5) * cell;
        k.push_back({c - half, c + half});
      }
      break;
    }
    case Layout::random_blocks: {
      const double len = 2.0 * delta / blocks;
      std::mt19937_64 rng(splitmix64(seed));
      std::uniform_real_distribution<double> u(-1.0, 1.0 - len);
      for (int b = 0; b < blocks; ++b) {
        const double lo = u(rng);
        k.push_back({lo, lo + len});
      }
      break;
    }
  }
  return normalize_intervals(k);
}

std::vector<StudyRow> sparse_segment_study(const StudyConfig& cfg) {
  std::vector<StudyRow> rows;
  for (Layout layout : cfg.layouts)
    for (const auto& z : cfg.points)
      for (double delta : cfg.deltas) {
        DiskProblem p;
        p.absorbing = sparse_layout(layout, delta, cfg.blocks, cfg.seed);
        p.z0 = z;
        p.walkers = cfg.walkers;
        p.seed = cfg.seed;
        p.eps = cfg.eps;
        const MeasureEstimate e = harmonic_measure_ws(p);
        StudyRow r;
        r.layout = layout;
        r.delta = delta;
        r.z0 = z;
        r.estimate = e.estimate;
        r.stderr_ = e.stderr_;
        if (delta > 0.0 && delta < 1.0) r.h = h_delta(delta);
        rows.push_back(r);
      }
  return rows;
}

}  // namespace vscope
