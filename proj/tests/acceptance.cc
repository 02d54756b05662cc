// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include "hexsim/analytic.h"
#include "hexsim/geometry.h"
#include "hexsim/mac.h"
#include "hexsim/scenario.h"

#include "oracles.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace hexsim;

namespace {

// Pinned tolerances.
constexpr double kOfferedLoadMbps = 439.8;
constexpr double kOfferedTol = 0.03;
constexpr double kMaxDropNoHidden = 0.01;
constexpr double kSaturationMbps = 655.0;
constexpr double kSaturationTol = 0.05;
constexpr double kHiddenMbps = 357.0;
constexpr double kHiddenTol = 0.15;
constexpr double kHiddenDrop = 0.16;
constexpr double kHiddenDropTol = 0.06;
constexpr double kHiddenPerSta = 4.0;
constexpr double kHiddenPerStaTol = 1.5;
constexpr double kBackoffRatio = 5.0;
// A sweep step may rise by at most this fraction of the -82 dBm value, or by
// the absolute floor when that is larger, and still count as non-increasing.
constexpr double kMonotoneSlack = 0.05;
constexpr double kCollisionFloor = 1.0;
constexpr double kDropFloor = 0.001;
constexpr double kCsthDropMax = 0.01;
constexpr double kCsthThroughputTol = 0.03;
constexpr double kCsthHiddenMax = 0.5;
constexpr double kOracleTol = 0.01;
constexpr long kOracleTrials = 1000000;
constexpr double kSolverResidual = 1e-9;
constexpr int kSolverIterations = 10000;
constexpr int kOrderingInputs = 1000;
constexpr int kPropertyInstances = 100;
constexpr int kPropertyMaxStas = 6;
constexpr int kPropertyMaxMs = 50;

int g_failures = 0;
int g_threads = 1;

void
Report (int id, bool pass, const std::string& detail)
{
  std::printf ("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str ());
  std::fflush (stdout);
  g_failures += pass ? 0 : 1;
}

std::string
Fmt (const char* format, double a, double b = 0, double c = 0, double d = 0)
{
  char buf[256];
  std::snprintf (buf, sizeof buf, format, a, b, c, d);
  return buf;
}

bool
Within (double value, double target, double relTol)
{
  return std::abs (value - target) <= relTol * target;
}

PointResult
RunPoint (ScenarioKind kind, double value)
{
  Scenario s = DefaultScenario (kind);
  s.values = {value};
  return RunScenario (DefaultConfig (), s, g_threads).points.front ();
}

const MetricRow&
All (const PointResult& p)
{
  return p.summary.mean[kAllRow];
}

struct Baseline
{
  PointResult noHidden4800;
  PointResult noHidden7200;
  PointResult hidden4800;
};

void
Criterion1 (const Baseline& b)
{
  const MetricRow& r = All (b.noHidden4800);
  const bool pass = Within (r.throughputMbps, kOfferedLoadMbps, kOfferedTol) && r.dropRatio < kMaxDropNoHidden;
  Report (1, pass,
          Fmt ("no-hidden 4800 pps: throughput %.1f Mbps (target %.1f +-3%%), drop %.4f (< 0.01)", r.throughputMbps,
               kOfferedLoadMbps, r.dropRatio));
}

void
Criterion2 (const Baseline& b)
{
  const MetricRow& r = All (b.noHidden7200);
  Report (2, Within (r.throughputMbps, kSaturationMbps, kSaturationTol),
          Fmt ("no-hidden 7200 pps: throughput %.1f Mbps (target %.0f +-5%%)", r.throughputMbps, kSaturationMbps));
}

void
Criterion3 (const Baseline& b)
{
  const MetricRow& r = All (b.hidden4800);
  const bool thr = Within (r.throughputMbps, kHiddenMbps, kHiddenTol);
  const bool drop = std::abs (r.dropRatio - kHiddenDrop) <= kHiddenDropTol;
  const bool hid = std::abs (r.hiddenPerSta - kHiddenPerSta) <= kHiddenPerStaTol;
  Report (3, thr && drop && hid,
          Fmt ("hidden 4800 pps: throughput %.1f Mbps (357 +-15%%), drop %.4f (0.16 +-0.06), hidden/STA %.2f (4 +-1.5)",
               r.throughputMbps, r.dropRatio, r.hiddenPerSta));
}

void
Criterion4 (const Baseline& b)
{
  const double with = All (b.hidden4800).backoffUs;
  const double without = All (b.noHidden4800).backoffUs;
  const double ratio = without > 0 ? with / without : 0.0;
  Report (4, ratio >= kBackoffRatio,
          Fmt ("backoff %.0f us hidden vs %.0f us no-hidden, ratio %.2f (>= 5)", with, without, ratio));
}

void
Criterion5 (const Baseline& b)
{
  Scenario s = DefaultScenario (ScenarioKind::kCsthSweep);
  const ScenarioResult res = RunScenario (DefaultConfig (), s, g_threads);
  const auto& pts = res.points;
  const double collSlack = std::max (kCollisionFloor, kMonotoneSlack * All (pts.front ()).collisions);
  const double dropSlack = std::max (kDropFloor, kMonotoneSlack * All (pts.front ()).dropRatio);
  bool monotone = true;
  std::string series;
  for (std::size_t i = 0; i < pts.size (); ++i)
    {
      const MetricRow& r = All (pts[i]);
      series += Fmt (" [%.0f: coll %.0f/s drop %.2e hid %.2f]", pts[i].csthDbm, r.collisions, r.dropRatio,
                     r.hiddenPerSta);
      if (i > 0)
        {
          const MetricRow& prev = All (pts[i - 1]);
          monotone = monotone && r.collisions <= prev.collisions + collSlack && r.dropRatio <= prev.dropRatio + dropSlack;
        }
    }
  const MetricRow& last = All (pts.back ());
  const double baseline = All (b.noHidden4800).throughputMbps;
  const bool drop = last.dropRatio < kCsthDropMax;
  const bool thr = Within (last.throughputMbps, baseline, kCsthThroughputTol);
  const bool hid = last.hiddenPerSta <= kCsthHiddenMax;
  Report (5, monotone && drop && thr && hid,
          "monotone " + std::string (monotone ? "yes" : "no")
              + Fmt ("; at -73 dBm drop %.4f (< 0.01), throughput %.1f vs baseline %.1f (+-3%%), hidden/STA %.2f (<= "
                     "0.5);",
                     last.dropRatio, last.throughputMbps, baseline, last.hiddenPerSta)
              + series);
}

void
Criterion6 ()
{
  const SimConfig cfg = DefaultConfig ();
  const int tsu = VulnerablePeriodSlots (VulnerableMode::kSingleUser, cfg);
  double worst = 0.0;
  std::uint64_t seed = 100;
  for (double tau : {0.005, 0.02, 0.05})
    {
      for (int nh : {1, 4, 8})
        {
          const AcVector t {tau, tau, tau, tau};
          const AcVector h {0, 0, 0, static_cast<double> (nh)};
          const double model = NoCollisionProb (HiddenQuietProb (t, h), 0.0, tsu, 0);
          const double mc = oracle::QuietWindowFrequency ({tau, tau, tau, tau}, {0, 0, 0, nh}, tsu, kOracleTrials, ++seed);
          worst = std::max (worst, std::abs (model - mc));
        }
    }

  SimConfig loaded = cfg;
  for (auto& a : loaded.ac)
    {
      a.arrivalRate = 1200.0;
    }
  const double others = cfg.staCount - 1;
  const SolveResult sol = SolveFixedPoint (MakeModelInputs (loaded, {others, others, others, others}, {0, 0, 0, 0}));
  const bool solved = sol.converged && sol.residual < kSolverResidual && sol.iterations <= kSolverIterations;

  std::mt19937_64 gen (6);
  std::uniform_real_distribution<double> u (0.0, 1.0);
  std::uniform_int_distribution<int> cnt (0, 24);
  int violations = 0;
  for (int i = 0; i < kOrderingInputs; ++i)
    {
      AcVector tau {}, n {};
      for (int k = 0; k < kAcCount; ++k)
        {
          tau[k] = u (gen);
          n[k] = cnt (gen);
        }
      for (int k = 1; k < kAcCount; ++k)
        {
          violations += IdleProb (tau, n, k - 1) <= IdleProb (tau, n, k) ? 0 : 1;
        }
    }
  Report (6, worst <= kOracleTol && solved && violations == 0,
          Fmt ("max |model - MC| %.4f (<= 0.01, 3x3 grid, 1e6 trials); solver residual %.2e in %.0f iterations; "
               "ordering violations %.0f / 1000",
               worst, sol.residual, sol.iterations, violations));
}

std::string
AllCsv (const ScenarioResult& r)
{
  std::ostringstream o;
  WriteMetricsCsv (o, r);
  WriteSummaryCsv (o, r);
  WriteAnalyticCsv (o, r);
  return o.str ();
}

void
Criterion7 ()
{
  SimConfig cfg = DefaultConfig ();
  cfg.runCount = 4;
  cfg.runDurationS = 0.25;
  bool same = true;
  for (ScenarioKind kind : {ScenarioKind::kHiddenSweep, ScenarioKind::kNoHiddenSweep, ScenarioKind::kCsthSweep})
    {
      Scenario s = DefaultScenario (kind);
      s.values = kind == ScenarioKind::kCsthSweep ? std::vector<double> {-82, -76} : std::vector<double> {2400, 6000};
      const std::string a = AllCsv (RunScenario (cfg, s, 1));
      const std::string b = AllCsv (RunScenario (cfg, s, 1));
      const std::string c = AllCsv (RunScenario (cfg, s, std::max (4, g_threads)));
      same = same && a == b && a == c && !a.empty ();
    }
  Report (7, same, same ? "serial, repeated and parallel CSV bytes identical" : "CSV bytes differ");
}

void
Criterion8 ()
{
  std::mt19937_64 gen (8);
  std::uniform_int_distribution<int> stas (1, kPropertyMaxStas);
  std::uniform_int_distribution<int> ms (5, kPropertyMaxMs);
  std::uniform_real_distribution<double> rate (0.0, 6000.0);
  std::uniform_real_distribution<double> csth (-82.0, -70.0);
  std::uniform_int_distribution<int> ac (0, kAcCount - 1);
  std::bernoulli_distribution coin (0.5);
  int conservation = 0, nav = 0, aifs = 0, hearing = 0, window = 0;
  for (int i = 0; i < kPropertyInstances; ++i)
    {
      SimConfig c = DefaultConfig ();
      c.staCount = stas (gen);
      c.runDurationS = ms (gen) / 1000.0;
      for (auto& a : c.ac)
        {
          a.arrivalRate = rate (gen) / kAcCount;
        }
      c.apTriggers = coin (gen);
      const std::uint64_t seed = 500 + i;
      const Topology t = BuildTopology (c, seed);
      InvariantCounters inv;
      RunSimulation (c, t, seed, nullptr, &inv);
      conservation += inv.conservation ? 0 : 1;
      nav += inv.navViolations > 0 ? 1 : 0;
      aifs += inv.aifsViolations > 0 ? 1 : 0;

      // Same placement, stricter operational threshold: hearing must be a subgraph.
      SimConfig loose = c;
      loose.phy.csthAssociationDbm = -70.0;
      SimConfig strict = loose;
      strict.phy.csthOperationalDbm = csth (gen);
      const Topology tl = BuildTopology (loose, seed);
      const Topology ts = BuildTopology (strict, seed);
      bool subset = ts.NodeCount () == tl.NodeCount ();
      for (int a = 0; subset && a < ts.NodeCount (); ++a)
        {
          for (int b = 0; b < ts.NodeCount (); ++b)
            {
              subset = subset && (!ts.Hears (a, b) || tl.Hears (a, b));
            }
        }
      hearing += subset ? 0 : 1;

      // Window doubling and cap.
      const int k = ac (gen);
      for (int stage = 0; stage <= c.frames.retryLimit; ++stage)
        {
          const int expected = c.ac[k].cwMinStates << std::min (stage, c.ac[k].maxBackoffStage);
          window += WindowSize (k, stage, c) == expected ? 0 : 1;
        }
      bool threw = false;
      try
        {
          WindowSize (k, c.frames.retryLimit + 1, c);
        }
      catch (const ConfigError&)
        {
          threw = true;
        }
      window += threw ? 0 : 1;
    }
  const bool pass = conservation == 0 && nav == 0 && aifs == 0 && hearing == 0 && window == 0;
  char buf[256];
  std::snprintf (buf, sizeof buf,
                 "%d instances: conservation failures %d, NAV %d, AIFS %d, hearing monotonicity %d, window cap %d",
                 kPropertyInstances, conservation, nav, aifs, hearing, window);
  Report (8, pass, buf);
}

} // namespace

int
main ()
{
  g_threads = static_cast<int> (std::max (1u, std::thread::hardware_concurrency ()));
  const auto start = std::chrono::steady_clock::now ();

  Baseline b;
  b.noHidden4800 = RunPoint (ScenarioKind::kNoHiddenSweep, 4800);
  b.noHidden7200 = RunPoint (ScenarioKind::kNoHiddenSweep, 7200);
  b.hidden4800 = RunPoint (ScenarioKind::kHiddenSweep, 4800);

  Criterion1 (b);
  Criterion2 (b);
  Criterion3 (b);
  Criterion4 (b);
  Criterion5 (b);
  Criterion6 ();
  Criterion7 ();
  Criterion8 ();

  const double secs = std::chrono::duration<double> (std::chrono::steady_clock::now () - start).count ();
  std::printf ("%d of 8 criteria failed (%.1f s)\n", g_failures, secs);
  return g_failures == 0 ? 0 : 1;
}
