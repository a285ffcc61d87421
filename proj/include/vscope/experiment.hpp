#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vscope/report.hpp"

namespace vscope {

inline constexpr int config_version = 1;

struct OscillationBlock {
  OscillationConfig oscillation;
  double eps_relative = 1e-6;
  int beta_samples = 24;
  int cr_samples = 0;       // 0 skips the Coifman-Rochberg study
  int divcurl_samples = 0;  // 0 skips the div-curl study
};

struct HarmonicBlock {
  std::vector<double> h_deltas{0.25, 0.5, 0.75};
  StudyConfig study;
};

/// A scenario, a solver run and any subset of the diagnostics blocks. Every
/// seeded component draws from the single global seed.
struct ExperimentConfig {
  int version = config_version;
  std::uint64_t seed = 0;
  Scenario scenario;
  SolverConfig solver;
  std::optional<RegularityConditionConfig> geometry;
  std::optional<LocalityConfig> cascade;  // t = 0 selects the final time
  std::optional<OscillationBlock> oscillation;
  std::optional<HarmonicBlock> harmonic;
  std::string output;

  void set_seed(std::uint64_t s);
  void validate() const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Strict parse: unknown keys, wrong types and a missing or different
/// config_version are errors. Omitted keys take the documented defaults and the
/// effective values are echoed by to_json.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
Json to_json(const ExperimentConfig& c);

struct BlockStatus {
  std::string name;
  std::string status;  // "ok" or "error"
  std::string message;
  std::vector<std::string> files;
};

struct ExperimentResult {
  Trajectory trajectory;
  std::vector<BlockStatus> blocks;
  Json manifest;
};

Trajectory simulate(const ExperimentConfig& c);

/// Snapshots under dir/snapshots and dir/manifest.json; returns the manifest.
Json write_run(const Trajectory& traj, const ExperimentConfig& c, const std::filesystem::path& dir,
               const std::vector<BlockStatus>& blocks = {});

/// Rebuilds a trajectory from a manifest written by write_run.
Trajectory load_run(const std::filesystem::path& manifest);

/// Runs every enabled block; a failing block is recorded in the manifest and
/// the others still run.
ExperimentResult run_experiment(const ExperimentConfig& c, const std::filesystem::path& dir);

// Single-block drivers shared with the command-line tool.
Json geometry_report(const Trajectory& traj, const RegularityConditionConfig& cfg);
Json sparseness_report(const VectorField& omega, double time, const RegularityConditionConfig& cfg);
Json cascade_block(const Trajectory& traj, const LocalityConfig& cfg, CascadeReport* out = nullptr);
Json oscillation_block(const Trajectory& traj, const OscillationBlock& cfg, std::uint64_t seed,
                       DirectionMonitor* monitor = nullptr);
Json harmonic_block(const HarmonicBlock& cfg, std::vector<StudyRow>* rows = nullptr);

}  // namespace vscope
