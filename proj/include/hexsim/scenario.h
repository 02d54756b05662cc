#ifndef HEXSIM_SCENARIO_H
#define HEXSIM_SCENARIO_H

#include "hexsim/analytic.h"
#include "hexsim/metrics.h"
#include "hexsim/params.h"

#include <iosfwd>
#include <string>
#include <vector>

namespace hexsim {

enum class ScenarioKind { kHiddenSweep, kNoHiddenSweep, kCsthSweep };

const char* ToString (ScenarioKind kind);
/// Throws ConfigError on unknown names.
ScenarioKind ParseScenario (const std::string& name);

struct Scenario
{
  ScenarioKind kind = ScenarioKind::kHiddenSweep;
  /// Aggregate arrival rates in packets/s, or association CSTH values in dBm.
  std::vector<double> values;
  /// Aggregate rate used by the CSTH sweep.
  double fixedRate = 4800.0;
};

/// 1200..7200 pps in 600 pps steps, or -82..-73 dBm in 1 dB steps.
Scenario DefaultScenario (ScenarioKind kind);

/// Config for one sweep point: aggregate rate split evenly over the four classes.
SimConfig ConfigForPoint (const SimConfig& base, const Scenario& scenario, double value);

struct PointResult
{
  double ratePps = 0.0;
  double csthDbm = 0.0;
  std::vector<RunCounters> runs;
  MetricsSummary summary;
  /// Topology means over runs and member STAs, fed to the analytic model.
  AcVector inRange {};
  AcVector hidden {};
  SolveResult analytic;
};

struct ScenarioResult
{
  Scenario scenario;
  SimConfig config;
  std::vector<PointResult> points;
  /// Concatenated event traces in (point, run) order, when requested.
  std::string trace;
};

/**
 * Runs every sweep point `cfg.runCount` times with seeds seed + run index.
 * `threads` <= 0 uses the hardware concurrency. Output never depends on it.
 */
ScenarioResult RunScenario (const SimConfig& cfg, const Scenario& scenario, int threads = 1, bool trace = false);

/// Per-run rows for every point, in sweep order.
void WriteMetricsCsv (std::ostream& out, const ScenarioResult& result);
/// Mean rows (run column "mean") for every point.
void WriteSummaryCsv (std::ostream& out, const ScenarioResult& result);
void WriteAnalyticCsv (std::ostream& out, const ScenarioResult& result);

/// Scenario name plus a hash of the config and sweep values.
std::string OutputStem (const ScenarioResult& result);

/// Writes the CSV files and, with `plot`, one SVG chart per metric. Returns paths.
std::vector<std::string> EmitOutputs (const ScenarioResult& result, const std::string& outDir, bool plot);

/// Minimal line chart; one polyline per series.
struct ChartSeries
{
  std::string label;
  std::vector<double> y;
};

std::string RenderSvgChart (const std::string& title, const std::string& xLabel, const std::string& yLabel,
                            const std::vector<double>& x, const std::vector<ChartSeries>& series);

} // namespace hexsim

#endif /* HEXSIM_SCENARIO_H */
