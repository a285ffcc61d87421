#include "vscope/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace vscope {

namespace {

Json vec(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

Json to_json(const GridSpec& g) {
  return Json{{"n", g.n}, {"box_length", g.box_length}, {"viscosity", g.viscosity}};
}

Json to_json(const SolverConfig& c) {
  return Json{{"dt_cfl", c.dt_cfl},
              {"t_end", c.t_end},
              {"snapshot_every", c.snapshot_every},
              {"dealias", c.dealias},
              {"dt_fixed", c.dt_fixed},
              {"mean_velocity", vec(c.mean_velocity)},
              {"blowup_factor", c.blowup_factor}};
}

Json to_json(const Scenario& s) {
  Json j{{"kind", scenario_name(s.kind)}, {"amplitude", s.amplitude}};
  switch (s.kind) {
    case ScenarioKind::taylor_green_2d3d:
    case ScenarioKind::abc_flow: j["wavenumber"] = s.wavenumber; break;
    case ScenarioKind::burgers_tube:
      j["tube_radius"] = s.tube_radius;
      j["circulation"] = s.circulation;
      j["axis"] = s.axis;
      break;
    case ScenarioKind::random_solenoidal:
      j["spectrum_slope"] = s.spectrum_slope;
      j["k_max"] = s.k_max;
      j["seed"] = s.seed;
      break;
    case ScenarioKind::clumped_ball:
      j["profile_exponent"] = s.profile_exponent;
      j["core_radius"] = s.core_radius;
      break;
  }
  return j;
}

Json to_json(const RunSample& s) {
  return Json{{"time", s.time}, {"energy", s.energy}, {"enstrophy", s.enstrophy}, {"omega_max", s.omega_max}};
}

Json to_json(const SparsenessReport& r) {
  Json probes = Json::array();
  for (const auto& p : r.probes)
    probes.push_back(Json{{"x0", vec(p.x0)},
                          {"direction", vec(p.direction)},
                          {"occupancy", p.occupancy},
                          {"r", p.r},
                          {"pass", p.pass}});
  return Json{{"r", r.r},
              {"delta", r.delta},
              {"n_dir", r.n_dir},
              {"probe_count", r.probes.size()},
              {"passing", r.passing},
              {"pass_fraction", r.pass_fraction()},
              {"all_pass", r.all_pass()},
              {"probes", probes}};
}

Json to_json(const RegularityConditionConfig& c) {
  return Json{{"d0", c.d0},          {"c1", c.c1},
              {"delta", c.delta},    {"alpha", opt(c.alpha)},
              {"n_dir", c.n_dir},    {"max_probes", c.max_probes},
              {"r_levels", c.r_levels}};
}

Json to_json(const RegularityReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries)
    entries.push_back(Json{{"t", e.t},
                           {"omega_inf", e.omega_inf},
                           {"tau", e.tau},
                           {"window", Json::array({e.window_lo, e.window_hi})},
                           {"threshold", e.threshold},
                           {"r_max", e.r_max},
                           {"window_sampled", e.window_sampled},
                           {"s", opt(e.s)},
                           {"condition_ii", opt(e.condition_ii)},
                           {"pass_fraction", e.pass_fraction},
                           {"probes", e.probes},
                           {"condition_i", e.condition_i},
                           {"note", e.note}});
  return Json{{"config", to_json(r.config)},
              {"h", r.h},
              {"alpha", r.alpha},
              {"horizon", r.horizon},
              {"entries", entries}};
}

Json to_json(const CriticalityRecord& r) {
  return Json{{"c1", r.c1},
              {"l1", r.l1},
              {"linf", r.linf},
              {"threshold", r.threshold},
              {"volume", r.volume},
              {"chebyshev_ratio", opt(r.chebyshev_ratio)},
              {"filament_length", r.filament_length},
              {"transversal_scale", opt(r.transversal_scale)},
              {"transversal_ratio", opt(r.transversal_ratio)},
              {"betas", r.betas},
              {"lambdas", r.lambdas},
              {"lambda_slope", opt(r.lambda_slope)}};
}

Json to_json(const Cover& c) {
  Json centers = Json::array();
  for (const auto& x : c.centers) centers.push_back(vec(x));
  return Json{{"center", vec(c.center)},
              {"R0", c.R0},
              {"R", c.R},
              {"K1", c.K1},
              {"K2", c.K2},
              {"rho", c.rho},
              {"mode", c.mode == CoverMode::lattice ? "lattice" : "jittered"},
              {"seed", c.seed},
              {"count", c.size()},
              {"minimal_K1", c.minimal_K1()},
              {"c_rho", c.constants.c_rho},
              {"max_multiplicity", c.max_multiplicity},
              {"min_multiplicity", c.min_multiplicity},
              {"max_support_overlap", c.max_support_overlap},
              {"repairs", c.repairs},
              {"centers", centers}};
}

Json to_json(const Spread& s) {
  return Json{{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"stable", s.stable}, {"samples", s.samples}};
}

Json to_json(const LocalityConfig& c) {
  return Json{{"t", c.t},         {"T", c.T},         {"kappa", c.kappa},   {"rho", c.rho},
              {"K1", c.K1},       {"K2", c.K2},       {"C", c.C},           {"R0", c.R0},
              {"scales", c.scales}, {"variants", c.variants}, {"seed", c.seed}};
}

Json to_json(const MacroQuantities& m) {
  return Json{{"E", m.E}, {"P", m.P}, {"sigma", opt(m.sigma)}, {"M0", m.M0}, {"fault", m.fault}};
}

Json to_json(const BudgetTerms& b) {
  return Json{{"lhs", b.lhs},
              {"terminal", b.terminal},
              {"dissipation", b.dissipation},
              {"cutoff", b.cutoff},
              {"transport", b.transport},
              {"rhs", b.rhs},
              {"scale", b.scale},
              {"residual", b.residual}};
}

Json to_json(const CascadeReport& r) {
  Json scales = Json::array();
  for (const auto& v : r.scales)
    scales.push_back(Json{{"R", v.R},
                          {"elements", v.elements},
                          {"vst_mean", v.vst_mean},
                          {"spread", to_json(v.spread)},
                          {"in_range", v.in_range},
                          {"sign_fail", v.sign_fail},
                          {"C_hat", opt(v.C_hat)},
                          {"estimate_holds", opt(v.estimate_holds)},
                          {"note", v.note}});
  return Json{{"config", to_json(r.config)},
              {"macro", to_json(r.macro)},
              {"R0", r.R0},
              {"range_lower", r.range_lower},
              {"separation_condition", r.separation_condition},
              {"scales", scales},
              {"message", r.message}};
}

std::string cascade_csv(const CascadeReport& r) {
  std::string out = "R,vst_mean,spread_min,spread_max,C_hat\n";
  for (const auto& v : r.scales)
    out += num(v.R) + "," + num(v.vst_mean) + "," + num(v.spread.min) + "," + num(v.spread.max) + "," +
           num(v.C_hat) + "\n";
  return out;
}

Json to_json(const OscillationConfig& c) {
  return Json{{"radii", c.radii},
              {"stride", c.stride},
              {"weight", c.weight == Weight::one ? "one" : "inv_log"},
              {"delta", c.delta}};
}

Json to_json(const BmoNorm& b) {
  const auto rows = [](const std::vector<RadiusOscillation>& v) {
    Json a = Json::array();
    for (const auto& r : v)
      a.push_back(Json{{"r", r.r},
                       {"side", r.side},
                       {"centers", r.centers},
                       {"oscillation", r.oscillation},
                       {"weighted", r.weighted},
                       {"running", r.running}});
    return a;
  };
  return Json{{"variant", bmo_name(b.variant)},
              {"value", b.value},
              {"oscillation", b.oscillation},
              {"l1", b.l1},
              {"large_scale", b.large_scale},
              {"lower_bound", b.lower_bound},
              {"small", rows(b.small)},
              {"large", rows(b.large)}};
}

Json to_json(const DirectionMonitor& m) {
  return Json{{"times", m.times},
              {"eps_dir", m.eps_dir},
              {"sup_norm", m.sup_norm},
              {"weighted", m.weighted},
              {"oscillation", m.oscillation},
              {"llogl", m.llogl},
              {"running_weighted", m.running_weighted},
              {"running_llogl", m.running_llogl},
              {"lower_bound", m.lower_bound}};
}

std::string monitor_csv(const DirectionMonitor& m) {
  std::string out = "time,eps_dir,sup_norm,weighted,oscillation,llogl\n";
  for (std::size_t i = 0; i < m.times.size(); ++i)
    out += num(m.times[i]) + "," + num(m.eps_dir[i]) + "," + num(m.sup_norm[i]) + "," + num(m.weighted[i]) + "," +
           num(m.oscillation[i]) + "," + num(m.llogl[i]) + "\n";
  return out;
}

Json to_json(const RatioStats& s) {
  return Json{{"count", s.values.size()},
              {"min", s.min},
              {"median", s.median},
              {"max", s.max},
              {"max_over_median", s.median > 0.0 ? Json(s.max / s.median) : Json(nullptr)},
              {"family", s.family},
              {"values", s.values}};
}

Json to_json(const CoifmanRochbergResult& r) {
  return Json{{"norms", to_json(r.norms)}, {"invariance_error", r.invariance_error}, {"clipped", r.clipped}};
}

Json to_json(const MeasureEstimate& m) {
  return Json{{"estimate", m.estimate},
              {"stderr", m.stderr_},
              {"walkers", m.walkers},
              {"hits", m.hits},
              {"circle_first", m.circle_first},
              {"capped", m.capped},
              {"bias_note", m.bias_note}};
}

Json to_json(const StudyConfig& c) {
  Json pts = Json::array();
  for (const auto& z : c.points) pts.push_back(Json::array({z.real(), z.imag()}));
  Json lay = Json::array();
  for (auto l : c.layouts) lay.push_back(layout_name(l));
  return Json{{"deltas", c.deltas}, {"points", pts},       {"layouts", lay}, {"blocks", c.blocks},
              {"walkers", c.walkers}, {"seed", c.seed}, {"eps", c.eps}};
}

Json to_json(const std::vector<StudyRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows)
    a.push_back(Json{{"layout", layout_name(r.layout)},
                     {"delta", r.delta},
                     {"z0", Json::array({r.z0.real(), r.z0.imag()})},
                     {"estimate", r.estimate},
                     {"stderr", r.stderr_},
                     {"h", opt(r.h)}});
  return a;
}

std::string study_csv(const std::vector<StudyRow>& rows) {
  std::string out = "layout,delta,z0_re,z0_im,estimate,stderr,h\n";
  for (const auto& r : rows)
    out += std::string(layout_name(r.layout)) + "," + num(r.delta) + "," + num(r.z0.real()) + "," +
           num(r.z0.imag()) + "," + num(r.estimate) + "," + num(r.stderr_) + "," + num(r.h) + "\n";
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace vscope
