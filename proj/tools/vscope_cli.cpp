// vscope: command-line front end. Exit status 2 means the input was rejected,
// 1 a runtime failure; diagnostic verdicts never change it.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "vscope/experiment.hpp"
#include "vscope/snapshot_io.hpp"

namespace fs = std::filesystem;
using namespace vscope;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

fs::path out_dir(const Globals& g, const std::string& fallback) { return g.out.empty() ? fs::path(fallback) : fs::path(g.out); }

void emit(const fs::path& p, const std::string& text) {
  write_text(p.string(), text);
  std::cout << "wrote " << p.string() << "\n";
}

ExperimentConfig config_from(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig c = load_config(g.config);
  if (g.seed) c.set_seed(*g.seed);
  return c;
}

Trajectory single_snapshot(const std::string& path) {
  const SnapshotData d = read_snapshot(path);
  Trajectory t;
  t.config.grid = d.grid;
  t.snapshots.push_back({d.time, d.vector()});
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vscope: vorticity geometry and cascade diagnostics on the periodic box"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "experiment configuration (JSON)");
  app.add_option("--seed", g.seed, "global seed, overrides the configuration");
  app.add_option("--out", g.out, "output directory");
  app.set_help_all_flag("--help-all");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run the solver and write snapshots plus a run manifest");
  sim->fallthrough();

  // experiment
  auto* exp = app.add_subcommand("experiment", "run the solver and every configured diagnostics block");
  exp->fallthrough();

  // sparseness
  std::string snapshot;
  RegularityConditionConfig rc;
  auto* sp = app.add_subcommand("sparseness", "sparseness scans and criticality record of one snapshot");
  sp->fallthrough();
  sp->add_option("--snapshot", snapshot, "snapshot file")->required();
  sp->add_option("--delta", rc.delta, "sparseness target in (0, 1)");
  sp->add_option("--d0", rc.d0, "time-step constant");
  sp->add_option("--c1", rc.c1, "intense-vorticity factor > 1");
  sp->add_option("--n-dir", rc.n_dir, "Fibonacci directions (plus antipodes)");
  sp->add_option("--max-probes", rc.max_probes, "probe budget");
  sp->add_option("--r-levels", rc.r_levels, "scales r_max, r_max/2, ...");

  // cascade
  std::string manifest;
  LocalityConfig lc;
  auto* cas = app.add_subcommand("cascade", "localized vortex-stretching report from a run manifest");
  cas->fallthrough();
  cas->add_option("--manifest", manifest, "manifest.json of a run")->required();
  cas->add_option("--t", lc.t, "averaging time in (2T/3, T]; 0 selects T");
  cas->add_option("--T", lc.T, "temporal cutoff horizon; 0 selects the final time");
  cas->add_option("--K1", lc.K1);
  cas->add_option("--K2", lc.K2);
  cas->add_option("--rho", lc.rho, "cutoff sharpness in (1/2, 1)");
  cas->add_option("--kappa", lc.kappa, "temporal exponent in (0, 1)");
  cas->add_option("--C", lc.C, "estimate constant > 1");
  cas->add_option("--scales", lc.scales, "scales R; default R0, R0/2, ... down to 2 dx");
  cas->add_option("--variants", lc.variants, "jittered cover variants per scale");

  // oscillation
  std::string osc_snapshot, osc_manifest, bmo_variant;
  bool want_dist = false, want_llogl = false, want_monitor = false;
  int cr = 0, dc = 0, beta_samples = 24;
  OscillationConfig oc;
  double eps_rel = 1e-6;
  auto* osc = app.add_subcommand("oscillation", "distribution, L log L, mean-oscillation norms and sampling studies");
  osc->fallthrough();
  osc->add_option("--snapshot", osc_snapshot, "snapshot file");
  osc->add_option("--manifest", osc_manifest, "run manifest (needed by --monitor)");
  osc->add_flag("--distribution", want_dist, "distribution function of |omega|");
  osc->add_flag("--llogl", want_llogl, "int psi0 w log w");
  osc->add_option("--bmo", bmo_variant, "BMO, bmo or weighted norm of |omega|");
  osc->add_flag("--monitor", want_monitor, "vorticity-direction monitor over the run");
  osc->add_option("--cr-check", cr, "Coifman-Rochberg study with this many samples (>= 20)");
  osc->add_option("--divcurl-check", dc, "div-curl study with this many samples (>= 20)");
  osc->add_option("--stride", oc.stride, "cube center stride; 0 selects n/16");
  osc->add_option("--beta-samples", beta_samples);
  osc->add_option("--eps", eps_rel, "direction mask threshold relative to max |omega|");

  // harmonic
  std::vector<double> h_deltas;
  std::string layout;
  double m_delta = 0.5;
  std::vector<double> z0{0.0, 0.5};
  bool study = false;
  StudyConfig sc;
  auto* har = app.add_subcommand("harmonic", "h(delta) values and walk-on-spheres harmonic measures");
  har->fallthrough();
  har->add_option("--h-delta", h_deltas, "evaluate h, alpha_min at these deltas");
  har->add_option("--measure", layout, "estimate the measure of a layout: centered, periodic_blocks, random_blocks");
  har->add_option("--delta", m_delta, "occupied fraction for --measure");
  har->add_option("--z0", z0, "evaluation point (re im)")->expected(2);
  har->add_flag("--study", study, "sparse-segment study table");
  har->add_option("--walkers", sc.walkers);
  har->add_option("--blocks", sc.blocks);
  har->add_option("--eps", sc.eps);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const std::uint64_t seed = g.seed.value_or(0);
    if (*sim) {
      const ExperimentConfig c = config_from(g);
      const fs::path dir = out_dir(g, c.output.empty() ? "run" : c.output);
      const Trajectory t = simulate(c);
      write_run(t, c, dir);
      std::cout << "wrote " << (dir / "manifest.json").string() << " (" << t.snapshots.size() << " snapshots, "
                << t.status << ")\n";
    } else if (*exp) {
      const ExperimentConfig c = config_from(g);
      const fs::path dir = out_dir(g, c.output.empty() ? "experiment" : c.output);
      const ExperimentResult r = run_experiment(c, dir);
      std::cout << "wrote " << (dir / "manifest.json").string() << "\n";
      for (const auto& b : r.blocks)
        std::cout << "  " << b.name << ": " << b.status << (b.message.empty() ? "" : " (" + b.message + ")") << "\n";
    } else if (*sp) {
      const SnapshotData d = read_snapshot(snapshot);
      emit(out_dir(g, ".") / "sparseness.json", dump(sparseness_report(d.vector(), d.time, rc)));
    } else if (*cas) {
      if (g.seed) lc.seed = *g.seed;
      const Trajectory t = load_run(manifest);
      CascadeReport rep;
      const Json j = cascade_block(t, lc, &rep);
      const fs::path dir = out_dir(g, ".");
      emit(dir / "cascade.json", dump(j));
      emit(dir / "cascade.csv", cascade_csv(rep));
    } else if (*osc) {
      if (osc_snapshot.empty() && osc_manifest.empty()) throw ConfigError("oscillation needs --snapshot or --manifest");
      const Trajectory t = osc_manifest.empty() ? single_snapshot(osc_snapshot) : load_run(osc_manifest);
      const Snapshot& last = t.snapshots.back();
      const GridSpec& grid = t.grid();
      oc.validate(grid);
      const ScalarField mag = magnitude(last.omega);
      const ScalarField psi = macro_cutoff_field(grid);
      const fs::path dir = out_dir(g, ".");
      Json j{{"report_version", report_version}, {"time", last.time}, {"config", to_json(oc)}};
      if (want_dist) {
        const double winf = max_abs(mag);
        std::vector<double> betas;
        for (int i = 0; i < beta_samples && winf > 0.0; ++i)
          betas.push_back(winf / 100.0 * std::pow(100.0, double(i) / (beta_samples - 1)));
        const auto lam = distribution_function(mag, betas);
        j["distribution"] = Json{{"betas", betas}, {"lambdas", lam}};
        std::string csv = "beta,lambda\n";
        for (std::size_t i = 0; i < betas.size(); ++i)
          csv += std::to_string(betas[i]) + "," + std::to_string(lam[i]) + "\n";
        emit(dir / "distribution.csv", csv);
      }
      if (want_llogl) j["llogl"] = llogl(last.omega, psi);
      if (!bmo_variant.empty()) j["bmo"] = to_json(bmo_norm(mag, parse_bmo(bmo_variant), oc));
      if (want_monitor) {
        if (osc_manifest.empty()) throw ConfigError("--monitor needs --manifest");
        MonitorConfig mc;
        mc.oscillation = oc;
        mc.eps_relative = eps_rel;
        const DirectionMonitor mon = direction_monitor(t, psi, mc);
        j["monitor"] = to_json(mon);
        emit(dir / "monitor.csv", monitor_csv(mon));
      }
      if (cr > 0) j["coifman_rochberg"] = to_json(coifman_rochberg_check(grid, cr, seed, oc));
      if (dc > 0) j["div_curl"] = to_json(div_curl_check(grid, dc, seed));
      emit(dir / "oscillation.json", dump(j));
    } else if (*har) {
      const fs::path dir = out_dir(g, ".");
      Json j{{"report_version", report_version}};
      Json h = Json::array();
      for (double d : h_deltas) h.push_back(Json{{"delta", d}, {"h", h_delta(d)}, {"alpha_min", alpha_min(d)}});
      j["h_delta"] = h;
      if (!layout.empty()) {
        DiskProblem p;
        p.absorbing = sparse_layout(parse_layout(layout), m_delta, sc.blocks, seed);
        p.z0 = {z0[0], z0[1]};
        p.walkers = sc.walkers;
        p.eps = sc.eps;
        p.seed = seed;
        Json m = to_json(harmonic_measure_ws(p));
        m["layout"] = layout;
        m["delta"] = m_delta;
        j["measure"] = m;
      }
      if (study) {
        sc.seed = seed;
        const auto rows = sparse_segment_study(sc);
        j["study_config"] = to_json(sc);
        j["study"] = to_json(rows);
        emit(dir / "harmonic.csv", study_csv(rows));
      }
      emit(dir / "harmonic.json", dump(j));
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
