#pragma once

// JSON and CSV renderings of every report type. Key order is fixed and floats
// are printed in shortest round-trip form, so equal inputs give equal bytes.

#include <string>
#include <vector>

#include "json.hpp"
#include "vscope/cascade.hpp"
#include "vscope/geometry.hpp"
#include "vscope/harmonic.hpp"
#include "vscope/oscillation.hpp"
#include "vscope/scenario.hpp"
#include "vscope/solver.hpp"

namespace vscope {

using Json = nlohmann::ordered_json;

inline constexpr int report_version = 1;

Json to_json(const GridSpec& g);
Json to_json(const SolverConfig& c);
Json to_json(const Scenario& s);
Json to_json(const RunSample& s);

Json to_json(const SparsenessReport& r);
Json to_json(const RegularityConditionConfig& c);
Json to_json(const RegularityReport& r);
Json to_json(const CriticalityRecord& r);

Json to_json(const Cover& c);  // certificate only, no samples
Json to_json(const Spread& s);
Json to_json(const LocalityConfig& c);
Json to_json(const MacroQuantities& m);
Json to_json(const BudgetTerms& b);
Json to_json(const CascadeReport& r);
/// R, <VST>, spread_min, spread_max, C_hat (empty when undefined).
std::string cascade_csv(const CascadeReport& r);

Json to_json(const OscillationConfig& c);
Json to_json(const BmoNorm& b);
Json to_json(const DirectionMonitor& m);
Json to_json(const RatioStats& s);
Json to_json(const CoifmanRochbergResult& r);
std::string monitor_csv(const DirectionMonitor& m);

Json to_json(const MeasureEstimate& m);
Json to_json(const StudyConfig& c);
Json to_json(const std::vector<StudyRow>& rows);
std::string study_csv(const std::vector<StudyRow>& rows);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::string& path, const std::string& text);
/// Pretty-printed JSON with a trailing newline.
std::string dump(const Json& j);

}  // namespace vscope
