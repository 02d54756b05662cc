#include "hexsim/scenario.h"

#include "hexsim/geometry.h"
#include "hexsim/mac.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace hexsim {

const char*
ToString (ScenarioKind kind)
{
  switch (kind)
    {
    case ScenarioKind::kHiddenSweep: return "hidden-sweep";
    case ScenarioKind::kNoHiddenSweep: return "no-hidden-sweep";
    case ScenarioKind::kCsthSweep: return "csth-sweep";
    }
  return "?";
}

ScenarioKind
ParseScenario (const std::string& name)
{
  for (auto k : {ScenarioKind::kHiddenSweep, ScenarioKind::kNoHiddenSweep, ScenarioKind::kCsthSweep})
    {
      if (name == ToString (k))
        {
          return k;
        }
    }
  throw ConfigError ("unknown scenario '" + name + "'");
}

Scenario
DefaultScenario (ScenarioKind kind)
{
  Scenario s;
  s.kind = kind;
  if (kind == ScenarioKind::kCsthSweep)
    {
      for (int c = -82; c <= -73; ++c)
        {
          s.values.push_back (c);
        }
    }
  else
    {
      for (int r = 1200; r <= 7200; r += 600)
        {
          s.values.push_back (r);
        }
    }
  return s;
}

SimConfig
ConfigForPoint (const SimConfig& base, const Scenario& scenario, double value)
{
  SimConfig cfg = base;
  const double rate = scenario.kind == ScenarioKind::kCsthSweep ? scenario.fixedRate : value;
  for (auto& a : cfg.ac)
    {
      a.arrivalRate = rate / kAcCount;
    }
  switch (scenario.kind)
    {
    case ScenarioKind::kHiddenSweep: cfg.topologyMode = TopologyMode::kRandomWithHidden; break;
    case ScenarioKind::kNoHiddenSweep: cfg.topologyMode = TopologyMode::kCompleteGraph; break;
    case ScenarioKind::kCsthSweep:
      cfg.topologyMode = TopologyMode::kRandomWithHidden;
      cfg.phy.csthAssociationDbm = value;
      break;
    }
  return cfg;
}

namespace {

struct Job
{
  std::size_t point = 0;
  int run = 0;
};

struct JobOutput
{
  RunCounters counters;
  AcVector inRange {};
  AcVector hidden {};
  std::string trace;
};

JobOutput
RunJob (const SimConfig& cfg, int run, bool trace)
{
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t> (run);
  const Topology top = BuildTopology (cfg, seed);
  JobOutput out;
  for (NodeId s : top.BssMembers ())
    {
      for (int k = 0; k < kAcCount; ++k)
        {
          out.inRange[k] += top.InRangeCounts (s)[k];
          out.hidden[k] += top.HiddenCounts (s)[k];
        }
    }
  const double members = std::max<std::size_t> (1, top.BssMembers ().size ());
  for (int k = 0; k < kAcCount; ++k)
    {
      out.inRange[k] /= members;
      out.hidden[k] /= members;
    }
  std::ostringstream os;
  out.counters = RunSimulation (cfg, top, seed, trace ? &os : nullptr);
  out.trace = os.str ();
  return out;
}

std::string
PointLabel (const Scenario& scenario, double value)
{
  return std::string (ToString (scenario.kind)) + " point " + FormatNumber (value);
}

} // namespace

ScenarioResult
RunScenario (const SimConfig& cfg, const Scenario& scenario, int threads, bool trace)
{
  if (scenario.values.empty ())
    {
      throw ConfigError ("scenario has no sweep values");
    }
  if (cfg.runCount < 1)
    {
      throw ConfigError ("run count must be at least 1");
    }
  ScenarioResult result;
  result.scenario = scenario;
  result.config = cfg;

  std::vector<SimConfig> configs;
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < scenario.values.size (); ++p)
    {
      configs.push_back (ConfigForPoint (cfg, scenario, scenario.values[p]));
      const auto errors = ValidateConfig (configs.back ());
      if (!errors.empty ())
        {
          throw ConfigError (PointLabel (scenario, scenario.values[p]) + ": " + errors.front ());
        }
      for (int r = 0; r < cfg.runCount; ++r)
        {
          jobs.push_back ({p, r});
        }
    }

  std::vector<JobOutput> outputs (jobs.size ());
  std::vector<std::exception_ptr> errors (jobs.size ());
  std::atomic<std::size_t> next {0};
  auto worker = [&] () {
    for (std::size_t i = next++; i < jobs.size (); i = next++)
      {
        try
          {
            outputs[i] = RunJob (configs[jobs[i].point], jobs[i].run, trace);
          }
        catch (...)
          {
            errors[i] = std::current_exception ();
          }
      }
  };
  int n = threads > 0 ? threads : static_cast<int> (std::thread::hardware_concurrency ());
  n = std::clamp<int> (n, 1, static_cast<int> (jobs.size ()));
  if (n == 1)
    {
      worker ();
    }
  else
    {
      std::vector<std::thread> pool;
      for (int t = 0; t < n; ++t)
        {
          pool.emplace_back (worker);
        }
      for (auto& t : pool)
        {
          t.join ();
        }
    }
  for (std::size_t i = 0; i < jobs.size (); ++i)
    {
      if (errors[i])
        {
          try
            {
              std::rethrow_exception (errors[i]);
            }
          catch (const std::exception& e)
            {
              throw std::runtime_error (PointLabel (scenario, scenario.values[jobs[i].point]) + ": " + e.what ());
            }
        }
    }

  std::size_t j = 0;
  for (std::size_t p = 0; p < scenario.values.size (); ++p)
    {
      PointResult pr;
      const SimConfig& pc = configs[p];
      pr.ratePps = scenario.kind == ScenarioKind::kCsthSweep ? scenario.fixedRate : scenario.values[p];
      pr.csthDbm = pc.phy.csthAssociationDbm;
      for (int r = 0; r < cfg.runCount; ++r, ++j)
        {
          pr.runs.push_back (outputs[j].counters);
          for (int k = 0; k < kAcCount; ++k)
            {
              pr.inRange[k] += outputs[j].inRange[k] / cfg.runCount;
              pr.hidden[k] += outputs[j].hidden[k] / cfg.runCount;
            }
          result.trace += outputs[j].trace;
        }
      pr.summary = Summarize (pr.runs);
      pr.analytic = SolveFixedPoint (MakeModelInputs (pc, pr.inRange, pr.hidden));
      result.points.push_back (std::move (pr));
    }
  return result;
}

void
WriteMetricsCsv (std::ostream& out, const ScenarioResult& result)
{
  out << kCsvHeader << '\n';
  for (const auto& p : result.points)
    {
      for (std::size_t r = 0; r < p.runs.size (); ++r)
        {
          WriteCsvRows (out, {ToString (result.scenario.kind), p.ratePps, p.csthDbm, static_cast<int> (r)},
                        RowsFor (p.runs[r]));
        }
    }
}

void
WriteSummaryCsv (std::ostream& out, const ScenarioResult& result)
{
  out << kCsvHeader << '\n';
  for (const auto& p : result.points)
    {
      WriteCsvRows (out, {ToString (result.scenario.kind), p.ratePps, p.csthDbm, -1}, p.summary.mean);
    }
}

void
WriteAnalyticCsv (std::ostream& out, const ScenarioResult& result)
{
  out << "scenario,arrival_rate_pps,csth_assoc_dbm,ac,in_range,hidden,tau,gamma,gamma_hidden,f_ncoll,converged,"
         "residual\n";
  for (const auto& p : result.points)
    {
      const auto& s = p.analytic.state;
      for (int k = 0; k < kAcCount; ++k)
        {
          out << ToString (result.scenario.kind) << ',' << FormatNumber (p.ratePps) << ',' << FormatNumber (p.csthDbm)
              << ',' << k << ',' << FormatNumber (p.inRange[k]) << ',' << FormatNumber (p.hidden[k]) << ','
              << FormatNumber (s.tau[k]) << ',' << FormatNumber (s.gamma[k]) << ',' << FormatNumber (s.gammaHidden[k])
              << ',' << FormatNumber (s.noCollision[k]) << ',' << (p.analytic.converged ? 1 : 0) << ','
              << FormatNumber (p.analytic.residual) << '\n';
        }
    }
}

std::string
OutputStem (const ScenarioResult& result)
{
  std::string key = ConfigHash (result.config) + ";" + FormatNumber (result.scenario.fixedRate);
  for (double v : result.scenario.values)
    {
      key += "," + FormatNumber (v);
    }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key)
    {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  char buf[17];
  std::snprintf (buf, sizeof buf, "%016llx", static_cast<unsigned long long> (h));
  return std::string (ToString (result.scenario.kind)) + "-" + buf;
}

namespace {

void
WriteFile (const std::filesystem::path& path, const std::string& content)
{
  std::ofstream f (path, std::ios::binary);
  if (!f)
    {
      throw std::runtime_error ("cannot write " + path.string ());
    }
  f << content;
  if (!f)
    {
      throw std::runtime_error ("write failed for " + path.string ());
    }
}

std::string
Escape (const std::string& s)
{
  std::string o;
  for (char c : s)
    {
      switch (c)
        {
        case '<': o += "&lt;"; break;
        case '>': o += "&gt;"; break;
        case '&': o += "&amp;"; break;
        default: o += c;
        }
    }
  return o;
}

std::string
Fixed (double v, int digits = 1)
{
  char buf[64];
  std::snprintf (buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

} // namespace

std::string
RenderSvgChart (const std::string& title, const std::string& xLabel, const std::string& yLabel,
                const std::vector<double>& x, const std::vector<ChartSeries>& series)
{
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#444444"};
  const double w = 640, h = 420, left = 70, right = 130, top = 40, bottom = 55;
  const double pw = w - left - right, ph = h - top - bottom;
  double xmin = x.empty () ? 0 : *std::min_element (x.begin (), x.end ());
  double xmax = x.empty () ? 1 : *std::max_element (x.begin (), x.end ());
  double ymin = 0.0, ymax = 0.0;
  for (const auto& s : series)
    {
      for (double v : s.y)
        {
          ymax = std::max (ymax, v);
          ymin = std::min (ymin, v);
        }
    }
  if (xmax == xmin)
    {
      xmax = xmin + 1;
    }
  if (ymax == ymin)
    {
      ymax = ymin + 1;
    }
  ymax *= 1.05;
  auto px = [&] (double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
  auto py = [&] (double v) { return top + ph - (v - ymin) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << Escape (title)
    << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i)
    {
      const double yv = ymin + (ymax - ymin) * i / 5.0;
      const double xv = xmin + (xmax - xmin) * i / 5.0;
      o << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << Fixed (py (yv)) << "\" y2=\""
        << Fixed (py (yv)) << "\" stroke=\"#ddd\"/>\n";
      o << "<text x=\"" << left - 6 << "\" y=\"" << Fixed (py (yv) + 4) << "\" text-anchor=\"end\">"
        << Fixed (yv, 3) << "</text>\n";
      o << "<text x=\"" << Fixed (px (xv)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
        << Fixed (xv, 0) << "</text>\n";
    }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">" << Escape (xLabel)
    << "</text>\n";
  o << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << Escape (yLabel) << "</text>\n";
  for (std::size_t s = 0; s < series.size (); ++s)
    {
      const char* color = kColors[s % 5];
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < x.size () && i < series[s].y.size (); ++i)
        {
          o << Fixed (px (x[i])) << ',' << Fixed (py (series[s].y[i])) << ' ';
        }
      o << "\"/>\n";
      const double ly = top + 14 + 18.0 * s;
      o << "<line x1=\"" << left + pw + 10 << "\" x2=\"" << left + pw + 30 << "\" y1=\"" << ly << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      o << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly + 4 << "\">" << Escape (series[s].label) << "</text>\n";
    }
  o << "</svg>\n";
  return o.str ();
}

std::vector<std::string>
EmitOutputs (const ScenarioResult& result, const std::string& outDir, bool plot)
{
  if (result.points.empty ())
    {
      throw std::invalid_argument ("no results to write");
    }
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories (outDir, ec);
  if (ec || !fs::is_directory (outDir))
    {
      throw std::runtime_error ("cannot create output directory " + outDir);
    }
  const std::string stem = OutputStem (result);
  const fs::path dir (outDir);
  std::vector<std::string> files;
  auto emit = [&] (const std::string& name, const std::string& content) {
    const fs::path p = dir / (stem + "-" + name);
    WriteFile (p, content);
    files.push_back (p.string ());
  };

  std::ostringstream metrics, summary, analytic;
  WriteMetricsCsv (metrics, result);
  WriteSummaryCsv (summary, result);
  WriteAnalyticCsv (analytic, result);
  emit ("metrics.csv", metrics.str ());
  emit ("summary.csv", summary.str ());
  emit ("analytic.csv", analytic.str ());
  emit ("config.txt", DumpConfig (result.config));
  if (!result.trace.empty ())
    {
      emit ("trace.tsv", result.trace);
    }
  if (!plot)
    {
      return files;
    }

  const bool csth = result.scenario.kind == ScenarioKind::kCsthSweep;
  const std::string xLabel = csth ? "association CSTH (dBm)" : "arrival rate (packets/s)";
  std::vector<double> x;
  for (const auto& p : result.points)
    {
      x.push_back (csth ? p.csthDbm : p.ratePps);
    }
  struct MetricSpec
  {
    const char* file;
    const char* title;
    double MetricRow::*field;
    bool perAc;
  };
  const MetricSpec specs[] = {
      {"backoff", "Mean backoff time (us)", &MetricRow::backoffUs, true},
      {"waiting", "Mean waiting time (us)", &MetricRow::waitingUs, true},
      {"collisions", "Collisions at the AP (per s)", &MetricRow::collisions, true},
      {"drop", "Drop ratio", &MetricRow::dropRatio, true},
      {"throughput", "Throughput (Mbps)", &MetricRow::throughputMbps, true},
      {"overhead", "Overhead ratio", &MetricRow::overheadRatio, false},
  };
  for (const auto& spec : specs)
    {
      std::vector<ChartSeries> series;
      const int first = spec.perAc ? 0 : kAllRow;
      for (int row = first; row <= kAllRow; ++row)
        {
          ChartSeries s;
          s.label = row == kAllRow ? "all" : "AC" + std::to_string (row);
          for (const auto& p : result.points)
            {
              s.y.push_back (p.summary.mean[row].*spec.field);
            }
          series.push_back (std::move (s));
        }
      emit (std::string (spec.file) + ".svg",
            RenderSvgChart (std::string (ToString (result.scenario.kind)) + ": " + spec.title, xLabel, spec.title, x,
                            series));
    }
  return files;
}

} // namespace hexsim
