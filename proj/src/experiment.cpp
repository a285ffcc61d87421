#include "vscope/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

#include "vscope/snapshot_io.hpp"

namespace vscope {

namespace fs = std::filesystem;

// Parsing ------------------------------------------------------------------

namespace {

class Obj {
 public:
  Obj(const Json& j, std::string path, std::initializer_list<const char*> allowed) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
      if (!ok.count(k)) throw ConfigError(path_ + ": unknown key '" + k + "'");
  }

  bool has(const char* key) const { return j_.contains(key); }
  const Json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return path_ + "." + key; }

  template <class T>
  void get(const char* key, T& out) const {
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError(path(key) + ": " + e.what());
    }
  }

  template <class T>
  void get(const char* key, std::optional<T>& out) const {
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    T v{};
    get(key, v);
    out = v;
  }

 private:
  const Json& j_;
  std::string path_;
};

GridSpec parse_grid(const Json& j) {
  Obj o(j, "grid", {"n", "box_length", "viscosity"});
  GridSpec g;
  g.box_length = 2.0 * std::numbers::pi;
  o.get("n", g.n);
  o.get("box_length", g.box_length);
  o.get("viscosity", g.viscosity);
  return g;
}

Scenario parse_scenario_block(const Json& j) {
  Obj o(j, "scenario",
        {"kind", "amplitude", "wavenumber", "tube_radius", "circulation", "axis", "spectrum_slope", "k_max",
         "profile_exponent", "core_radius"});
  Scenario s;
  std::string kind = scenario_name(s.kind);
  o.get("kind", kind);
  try {
    s.kind = parse_scenario(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario.kind: ") + e.what());
  }
  o.get("amplitude", s.amplitude);
  o.get("wavenumber", s.wavenumber);
  o.get("tube_radius", s.tube_radius);
  o.get("circulation", s.circulation);
  o.get("axis", s.axis);
  o.get("spectrum_slope", s.spectrum_slope);
  o.get("k_max", s.k_max);
  o.get("profile_exponent", s.profile_exponent);
  o.get("core_radius", s.core_radius);
  return s;
}

void parse_solver(const Json& j, SolverConfig& c) {
  Obj o(j, "solver", {"dt_cfl", "t_end", "snapshot_every", "dealias", "dt_fixed", "mean_velocity", "blowup_factor"});
  o.get("dt_cfl", c.dt_cfl);
  o.get("t_end", c.t_end);
  o.get("snapshot_every", c.snapshot_every);
  o.get("dealias", c.dealias);
  o.get("dt_fixed", c.dt_fixed);
  o.get("mean_velocity", c.mean_velocity);
  o.get("blowup_factor", c.blowup_factor);
}

RegularityConditionConfig parse_geometry(const Json& j) {
  Obj o(j, "geometry", {"d0", "c1", "delta", "alpha", "n_dir", "max_probes", "r_levels"});
  RegularityConditionConfig c;
  c.n_dir = 64;
  c.max_probes = 256;
  o.get("d0", c.d0);
  o.get("c1", c.c1);
  o.get("delta", c.delta);
  o.get("alpha", c.alpha);
  o.get("n_dir", c.n_dir);
  o.get("max_probes", c.max_probes);
  o.get("r_levels", c.r_levels);
  return c;
}

LocalityConfig parse_cascade(const Json& j) {
  Obj o(j, "cascade", {"t", "T", "kappa", "rho", "K1", "K2", "C", "R0", "scales", "variants"});
  LocalityConfig c;
  o.get("t", c.t);
  o.get("T", c.T);
  o.get("kappa", c.kappa);
  o.get("rho", c.rho);
  o.get("K1", c.K1);
  o.get("K2", c.K2);
  o.get("C", c.C);
  o.get("R0", c.R0);
  o.get("scales", c.scales);
  o.get("variants", c.variants);
  return c;
}

OscillationBlock parse_oscillation(const Json& j) {
  Obj o(j, "oscillation",
        {"radii", "stride", "delta", "eps_relative", "beta_samples", "cr_samples", "divcurl_samples"});
  OscillationBlock b;
  o.get("radii", b.oscillation.radii);
  o.get("stride", b.oscillation.stride);
  o.get("delta", b.oscillation.delta);
  o.get("eps_relative", b.eps_relative);
  o.get("beta_samples", b.beta_samples);
  o.get("cr_samples", b.cr_samples);
  o.get("divcurl_samples", b.divcurl_samples);
  return b;
}

HarmonicBlock parse_harmonic(const Json& j) {
  Obj o(j, "harmonic", {"h_deltas", "deltas", "points", "layouts", "blocks", "walkers", "eps"});
  HarmonicBlock b;
  o.get("h_deltas", b.h_deltas);
  o.get("deltas", b.study.deltas);
  if (o.has("points")) {
    b.study.points.clear();
    std::vector<std::array<double, 2>> pts;
    o.get("points", pts);
    for (const auto& p : pts) b.study.points.emplace_back(p[0], p[1]);
  }
  if (o.has("layouts")) {
    std::vector<std::string> names;
    o.get("layouts", names);
    b.study.layouts.clear();
    try {
      for (const auto& n : names) b.study.layouts.push_back(parse_layout(n));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("harmonic.layouts: ") + e.what());
    }
  }
  o.get("blocks", b.study.blocks);
  o.get("walkers", b.study.walkers);
  o.get("eps", b.study.eps);
  return b;
}

}  // namespace

void ExperimentConfig::set_seed(std::uint64_t s) {
  seed = s;
  scenario.seed = s;
  if (cascade) cascade->seed = s;
  if (harmonic) harmonic->study.seed = s;
}

void ExperimentConfig::validate() const {
  if (version != config_version)
    throw ConfigError("config_version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(config_version) + ")");
  try {
    solver.validate();
    scenario.validate();
    if (geometry) geometry->validate();
    if (oscillation) {
      oscillation->oscillation.validate(solver.grid);
      if (!(oscillation->eps_relative > 0.0)) throw std::invalid_argument("oscillation.eps_relative must be positive");
      if (oscillation->beta_samples < 2) throw std::invalid_argument("oscillation.beta_samples must be >= 2");
      if (oscillation->cr_samples != 0 && oscillation->cr_samples < 20)
        throw std::invalid_argument("oscillation.cr_samples must be 0 or >= 20");
      if (oscillation->divcurl_samples != 0 && oscillation->divcurl_samples < 20)
        throw std::invalid_argument("oscillation.divcurl_samples must be 0 or >= 20");
    }
    if (cascade) {
      if (!(cascade->C > 1.0)) throw std::invalid_argument("cascade.C must exceed 1");
      if (cascade->variants < 1) throw std::invalid_argument("cascade.variants must be positive");
    }
    if (harmonic)
      for (double d : harmonic->h_deltas) h_delta(d);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(const Json& j) {
  Obj o(j, "config",
        {"config_version", "seed", "grid", "scenario", "solver", "geometry", "cascade", "oscillation", "harmonic",
         "output"});
  if (!o.has("config_version")) throw ConfigError("config: missing config_version");
  ExperimentConfig c;
  o.get("config_version", c.version);
  if (c.version != config_version)
    throw ConfigError("config_version " + std::to_string(c.version) + " is not supported (expected " +
                      std::to_string(config_version) + ")");
  std::uint64_t seed = 0;
  o.get("seed", seed);
  if (!o.has("grid")) throw ConfigError("config: missing grid");
  c.solver.grid = parse_grid(o.at("grid"));
  if (o.has("scenario")) c.scenario = parse_scenario_block(o.at("scenario"));
  c.scenario.grid = c.solver.grid;
  if (o.has("solver")) parse_solver(o.at("solver"), c.solver);
  if (o.has("geometry")) c.geometry = parse_geometry(o.at("geometry"));
  if (o.has("cascade")) c.cascade = parse_cascade(o.at("cascade"));
  if (o.has("oscillation")) c.oscillation = parse_oscillation(o.at("oscillation"));
  if (o.has("harmonic")) c.harmonic = parse_harmonic(o.at("harmonic"));
  o.get("output", c.output);
  c.set_seed(seed);
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

Json to_json(const ExperimentConfig& c) {
  Json j{{"config_version", c.version},
         {"seed", c.seed},
         {"grid", to_json(c.solver.grid)},
         {"scenario", to_json(c.scenario)},
         {"solver", to_json(c.solver)}};
  j["scenario"].erase("seed");
  if (c.geometry) j["geometry"] = to_json(*c.geometry);
  if (c.cascade) {
    Json k = to_json(*c.cascade);
    k.erase("seed");
    j["cascade"] = k;
  }
  if (c.oscillation) {
    const auto& b = *c.oscillation;
    j["oscillation"] = Json{{"radii", b.oscillation.radii},
                            {"stride", b.oscillation.stride},
                            {"delta", b.oscillation.delta},
                            {"eps_relative", b.eps_relative},
                            {"beta_samples", b.beta_samples},
                            {"cr_samples", b.cr_samples},
                            {"divcurl_samples", b.divcurl_samples}};
  }
  if (c.harmonic) {
    Json h = to_json(c.harmonic->study);
    h.erase("seed");
    Json out{{"h_deltas", c.harmonic->h_deltas}};
    for (auto& [k, v] : h.items()) out[k] = v;
    j["harmonic"] = out;
  }
  if (!c.output.empty()) j["output"] = c.output;
  return j;
}

// Runs ---------------------------------------------------------------------

Trajectory simulate(const ExperimentConfig& c) { return run(c.solver, generate(c.scenario)); }

namespace {

std::string snapshot_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%04zu.vscp", i);
  return std::string("snapshots/") + buf;
}

Json block_json(const std::vector<BlockStatus>& blocks) {
  Json a = Json::array();
  for (const auto& b : blocks)
    a.push_back(Json{{"name", b.name}, {"status", b.status}, {"message", b.message}, {"files", b.files}});
  return a;
}

std::vector<double> geometric(double lo, double hi, int m) {
  std::vector<double> v;
  for (int i = 0; i < m; ++i) v.push_back(lo * std::pow(hi / lo, double(i) / (m - 1)));
  return v;
}

}  // namespace

Json write_run(const Trajectory& traj, const ExperimentConfig& c, const fs::path& dir,
               const std::vector<BlockStatus>& blocks) {
  fs::create_directories(dir / "snapshots");
  Json snaps = Json::array();
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const std::string name = snapshot_name(i);
    write_snapshot(dir / name, traj.snapshots[i].omega, traj.snapshots[i].time);
    snaps.push_back(Json{{"time", traj.snapshots[i].time}, {"file", name}});
  }
  Json series = Json::array();
  for (const auto& s : traj.series) series.push_back(to_json(s));
  Json m{{"config_version", config_version},
         {"report_version", report_version},
         {"config", to_json(c)},
         {"run",
          Json{{"status", traj.status},
               {"under_resolved", traj.under_resolved},
               {"steps", traj.steps},
               {"energy_violations", traj.energy_violations},
               {"final_time", traj.final_time()},
               {"snapshots", snaps},
               {"series", series}}},
         {"blocks", block_json(blocks)}};
  write_text((dir / "manifest.json").string(), dump(m));
  return m;
}

Trajectory load_run(const fs::path& manifest) {
  std::ifstream f(manifest);
  if (!f) throw std::runtime_error("cannot open manifest " + manifest.string());
  const Json m = Json::parse(f);
  const ExperimentConfig c = parse_config(m.at("config"));
  Trajectory t;
  t.config = c.solver;
  const fs::path base = manifest.parent_path();
  const Json& run = m.at("run");
  for (const auto& s : run.at("snapshots")) {
    SnapshotData d = read_snapshot(base / s.at("file").get<std::string>());
    if (!(d.grid == c.solver.grid)) throw std::runtime_error("snapshot grid differs from manifest grid");
    t.snapshots.push_back({d.time, d.vector()});
  }
  for (const auto& s : run.at("series"))
    t.series.push_back({s.at("time").get<double>(), s.at("energy").get<double>(), s.at("enstrophy").get<double>(),
                        s.at("omega_max").get<double>()});
  t.status = run.at("status").get<std::string>();
  t.under_resolved = run.at("under_resolved").get<bool>();
  t.steps = run.at("steps").get<int>();
  t.energy_violations = run.at("energy_violations").get<int>();
  return t;
}

Json sparseness_report(const VectorField& omega, double time, const RegularityConditionConfig& cfg) {
  cfg.validate();
  const GridSpec& g = omega.grid();
  const double winf = max_magnitude(omega);
  const double M = winf > 0.0 ? cfg.threshold(winf) : 0.0;
  const SuperlevelMask mask = superlevel(omega, M, time);
  const auto probes = default_probes(mask, cfg.max_probes);
  const double r_max =
      winf > 0.0 ? std::min(1.0 / (2.0 * cfg.d0 * cfg.d0 * std::sqrt(winf)), g.box_length / 2.0) : g.box_length / 2.0;
  Json scans = Json::array();
  double r = r_max;
  for (int l = 0; l < cfg.r_levels; ++l, r /= 2.0) scans.push_back(to_json(sparseness_scan(mask, probes, r, cfg.delta, cfg.n_dir)));
  return Json{{"report_version", report_version},
              {"time", time},
              {"config", to_json(cfg)},
              {"h", cfg.h()},
              {"alpha", cfg.alpha_value()},
              {"omega_inf", winf},
              {"threshold", M},
              {"volume", mask.volume()},
              {"scans", scans},
              {"criticality", to_json(criticality_scales(omega, cfg.c1))}};
}

Json geometry_report(const Trajectory& traj, const RegularityConditionConfig& cfg) {
  Json crit = Json::array();
  for (const Snapshot* s : {&traj.snapshots.front(), &traj.snapshots.back()}) {
    Json r = to_json(criticality_scales(s->omega, cfg.c1));
    Json e{{"time", s->time}};
    for (auto& [k, v] : r.items()) e[k] = v;
    crit.push_back(e);
  }
  return Json{{"report_version", report_version},
              {"regularity", to_json(regularity_condition_report(traj, cfg))},
              {"criticality", crit}};
}

Json cascade_block(const Trajectory& traj, const LocalityConfig& cfg_in, CascadeReport* out) {
  LocalityConfig cfg = cfg_in;
  if (cfg.t <= 0.0) cfg.t = cfg.T > 0.0 ? cfg.T : traj.final_time();
  const CascadeReport rep = vst_locality_report(traj, cfg);
  Json j{{"report_version", report_version}};
  const Json body = to_json(rep);
  for (auto& [k, v] : body.items()) j[k] = v;

  // Budget closure on the half-scale lattice.
  CoverSpec spec;
  spec.R0 = rep.R0;
  spec.R = rep.R0 / 2.0;
  spec.K1 = cfg.K1;
  spec.K2 = cfg.K2;
  spec.rho = cfg.rho;
  try {
    const Cover cover = build_cover(traj.grid(), spec);
    const TrajectoryIntegrals ints = integrate_trajectory(traj, cover);
    CascadeTimes times{cfg.t, TemporalCutoff{rep.config.T, cfg.kappa}};
    double worst = 0.0;
    Json terms = Json::array();
    for (std::size_t i = 0; i < cover.size(); ++i) {
      const BudgetTerms b = enstrophy_budget(ints, cover, int(i), times, traj.grid().viscosity);
      worst = std::max(worst, std::abs(b.residual));
      terms.push_back(to_json(b));
    }
    j["budget"] = Json{{"R", spec.R}, {"max_abs_residual", worst}, {"elements", terms}};
    j["cover"] = to_json(cover);
  } catch (const CoverError& e) {
    j["budget"] = Json{{"R", spec.R}, {"error", e.what()}};
  }
  if (out) *out = rep;
  return j;
}

Json oscillation_block(const Trajectory& traj, const OscillationBlock& cfg, std::uint64_t seed,
                       DirectionMonitor* monitor) {
  const GridSpec& g = traj.grid();
  const Snapshot& last = traj.snapshots.back();
  const ScalarField mag = magnitude(last.omega);
  const double winf = max_abs(mag);
  Json dist{{"time", last.time}, {"betas", Json::array()}, {"lambdas", Json::array()}};
  if (winf > 0.0) {
    const auto betas = geometric(winf / 100.0, winf, cfg.beta_samples);
    dist["betas"] = betas;
    dist["lambdas"] = distribution_function(mag, betas);
  }
  const ScalarField psi = macro_cutoff_field(g);
  MonitorConfig mc;
  mc.oscillation = cfg.oscillation;
  mc.eps_relative = cfg.eps_relative;
  const DirectionMonitor mon = direction_monitor(traj, psi, mc);
  Json norms = Json::object();
  for (auto v : {BmoVariant::BMO, BmoVariant::bmo, BmoVariant::weighted})
    norms[bmo_name(v)] = to_json(bmo_norm(mag, v, cfg.oscillation));
  Json j{{"report_version", report_version},
         {"config", to_json(cfg.oscillation)},
         {"distribution", dist},
         {"magnitude_norms", norms},
         {"monitor", to_json(mon)}};
  if (cfg.cr_samples > 0) {
    OscillationConfig oc = cfg.oscillation;
    j["coifman_rochberg"] = to_json(coifman_rochberg_check(g, cfg.cr_samples, seed, oc));
  }
  if (cfg.divcurl_samples > 0) j["div_curl"] = to_json(div_curl_check(g, cfg.divcurl_samples, seed));
  if (monitor) *monitor = mon;
  return j;
}

Json harmonic_block(const HarmonicBlock& cfg, std::vector<StudyRow>* rows) {
  Json h = Json::array();
  for (double d : cfg.h_deltas) h.push_back(Json{{"delta", d}, {"h", h_delta(d)}, {"alpha_min", alpha_min(d)}});
  const auto study = sparse_segment_study(cfg.study);
  if (rows) *rows = study;
  return Json{{"report_version", report_version},
              {"h_delta", h},
              {"study_config", to_json(cfg.study)},
              {"study", to_json(study)}};
}

ExperimentResult run_experiment(const ExperimentConfig& c, const fs::path& dir) {
  c.validate();
  ExperimentResult res;
  res.trajectory = simulate(c);
  const Trajectory& traj = res.trajectory;
  fs::create_directories(dir);

  const auto block = [&](const char* name, auto&& body) {
    BlockStatus s{name, "ok", "", {}};
    try {
      body(s.files);
    } catch (const std::exception& e) {
      s.status = "error";
      s.message = e.what();
    }
    res.blocks.push_back(s);
  };
  if (c.geometry)
    block("geometry", [&](std::vector<std::string>& files) {
      write_text((dir / "geometry.json").string(), dump(geometry_report(traj, *c.geometry)));
      files.push_back("geometry.json");
    });
  if (c.cascade)
    block("cascade", [&](std::vector<std::string>& files) {
      CascadeReport rep;
      const Json j = cascade_block(traj, *c.cascade, &rep);
      write_text((dir / "cascade.json").string(), dump(j));
      write_text((dir / "cascade.csv").string(), cascade_csv(rep));
      files.push_back("cascade.json");
      files.push_back("cascade.csv");
    });
  if (c.oscillation)
    block("oscillation", [&](std::vector<std::string>& files) {
      DirectionMonitor mon;
      const Json j = oscillation_block(traj, *c.oscillation, c.seed, &mon);
      write_text((dir / "oscillation.json").string(), dump(j));
      write_text((dir / "monitor.csv").string(), monitor_csv(mon));
      files.push_back("oscillation.json");
      files.push_back("monitor.csv");
    });
  if (c.harmonic)
    block("harmonic", [&](std::vector<std::string>& files) {
      std::vector<StudyRow> rows;
      const Json j = harmonic_block(*c.harmonic, &rows);
      write_text((dir / "harmonic.json").string(), dump(j));
      write_text((dir / "harmonic.csv").string(), study_csv(rows));
      files.push_back("harmonic.json");
      files.push_back("harmonic.csv");
    });
  res.manifest = write_run(traj, c, dir, res.blocks);
  return res;
}

}  // namespace vscope
