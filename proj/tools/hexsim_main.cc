// Command-line front end: scenario sweeps, analytic model, topology dumps.

#include "hexsim/analytic.h"
#include "hexsim/geometry.h"
#include "hexsim/params.h"
#include "hexsim/scenario.h"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace hexsim;

std::string
OneLine (std::string s)
{
  for (char& c : s)
    {
      if (c == '\n' || c == '\r')
        {
          c = ' ';
        }
    }
  return s;
}

struct Options
{
  std::string scenario = "hidden-sweep";
  std::string config;
  std::vector<double> rates;
  std::vector<double> csth;
  double fixedRate = 4800.0;
  int runs = -1;
  double duration = -1.0;
  long long seed = -1;
  std::string out = "out";
  bool plot = false;
  bool trace = false;
  int threads = 0;
  std::vector<std::string> sets;
};

SimConfig
BuildConfig (const Options& o)
{
  SimConfig cfg = o.config.empty () ? DefaultConfig () : LoadConfigFile (o.config);
  for (const auto& kv : o.sets)
    {
      const auto eq = kv.find ('=');
      if (eq == std::string::npos)
        {
          throw ConfigError ("--set expects key=value, got '" + kv + "'");
        }
      SetConfigValue (cfg, kv.substr (0, eq), kv.substr (eq + 1));
    }
  if (o.runs > 0)
    {
      cfg.runCount = o.runs;
    }
  if (o.duration > 0)
    {
      cfg.runDurationS = o.duration;
    }
  if (o.seed >= 0)
    {
      cfg.seed = static_cast<std::uint64_t> (o.seed);
    }
  const auto errors = ValidateConfig (cfg);
  if (!errors.empty ())
    {
      throw ConfigError (errors.front ());
    }
  return cfg;
}

int
RunCommand (const Options& o)
{
  const SimConfig cfg = BuildConfig (o);
  Scenario sc = DefaultScenario (ParseScenario (o.scenario));
  sc.fixedRate = o.fixedRate;
  if (sc.kind == ScenarioKind::kCsthSweep && !o.csth.empty ())
    {
      sc.values = o.csth;
    }
  if (sc.kind != ScenarioKind::kCsthSweep && !o.rates.empty ())
    {
      sc.values = o.rates;
    }
  const ScenarioResult result = RunScenario (cfg, sc, o.threads, o.trace);
  for (const auto& f : EmitOutputs (result, o.out, o.plot))
    {
      std::cout << f << '\n';
    }
  return 0;
}

int
AnalyticCommand (const Options& o, double inRange, double hidden)
{
  SimConfig cfg = BuildConfig (o);
  if (!o.rates.empty ())
    {
      for (auto& a : cfg.ac)
        {
          a.arrivalRate = o.rates.front () / kAcCount;
        }
    }
  AcVector n {inRange, inRange, inRange, inRange};
  AcVector h {hidden, hidden, hidden, hidden};
  const SolveResult r = SolveFixedPoint (MakeModelInputs (cfg, n, h));
  std::cout << "ac,tau,idle,gamma,gamma_hidden,f_ncoll,f_mu\n";
  for (int k = 0; k < kAcCount; ++k)
    {
      const auto& s = r.state;
      std::cout << k << ',' << FormatNumber (s.tau[k]) << ',' << FormatNumber (s.idle[k]) << ','
                << FormatNumber (s.gamma[k]) << ',' << FormatNumber (s.gammaHidden[k]) << ','
                << FormatNumber (s.noCollision[k]) << ',' << FormatNumber (s.txopShare[k]) << '\n';
    }
  std::cerr << "iterations=" << r.iterations << " residual=" << r.residual << " converged=" << r.converged
            << " clamps=" << r.clampEvents << '\n';
  return r.converged ? 0 : 3;
}

int
TopologyCommand (const Options& o, bool complete)
{
  SimConfig cfg = BuildConfig (o);
  if (!o.csth.empty ())
    {
      cfg.phy.csthAssociationDbm = o.csth.front ();
    }
  if (complete)
    {
      cfg.topologyMode = TopologyMode::kCompleteGraph;
    }
  const Topology t = BuildTopology (cfg, cfg.seed);
  t.WriteCsv (std::cout);
  std::cerr << "mean_hidden_per_sta=" << MeanHiddenPerSta (t) << '\n';
  return 0;
}

void
AddCommon (CLI::App* app, Options& o)
{
  app->add_option ("--config", o.config, "key=value config file");
  app->add_option ("--set", o.sets, "override one config key (key=value), repeatable");
  app->add_option ("--runs", o.runs, "runs per sweep point");
  app->add_option ("--duration", o.duration, "run duration in seconds");
  app->add_option ("--seed", o.seed, "base seed; run r uses seed + r");
}

} // namespace

int
main (int argc, char** argv)
{
  CLI::App app {"802.11ax uplink simulator with hidden terminals"};
  app.require_subcommand (1);
  Options o;

  auto* run = app.add_subcommand ("run", "run a scenario sweep and write CSV/SVG outputs");
  AddCommon (run, o);
  run->add_option ("--scenario", o.scenario, "hidden-sweep | no-hidden-sweep | csth-sweep")
      ->check (CLI::IsMember ({"hidden-sweep", "no-hidden-sweep", "csth-sweep"}));
  run->add_option ("--rates", o.rates, "aggregate arrival rates in packets/s")->delimiter (',');
  run->add_option ("--csth", o.csth, "association CSTH values in dBm")->delimiter (',');
  run->add_option ("--fixed-rate", o.fixedRate, "aggregate rate for the CSTH sweep");
  run->add_option ("--out", o.out, "output directory");
  run->add_flag ("--plot", o.plot, "write SVG charts");
  run->add_flag ("--trace", o.trace, "write a tab-separated event trace");
  run->add_option ("--threads", o.threads, "worker threads (0 = all cores)");

  double inRange = 23.0;
  double hidden = 0.0;
  auto* analytic = app.add_subcommand ("analytic", "solve the access model for one tagged STA");
  AddCommon (analytic, o);
  analytic->add_option ("--rates", o.rates, "aggregate arrival rate in packets/s")->delimiter (',');
  analytic->add_option ("--in-range", inRange, "STAs per class heard by the tagged STA");
  analytic->add_option ("--hidden", hidden, "STAs per class hidden from the tagged STA");

  bool complete = false;
  auto* topo = app.add_subcommand ("topology", "print one random topology as CSV");
  AddCommon (topo, o);
  topo->add_option ("--csth", o.csth, "association CSTH in dBm")->delimiter (',');
  topo->add_flag ("--complete", complete, "complete hearing graph");

  try
    {
      app.parse (argc, argv);
    }
  catch (const CLI::ParseError& e)
    {
      return app.exit (e);
    }

  try
    {
      if (run->parsed ())
        {
          return RunCommand (o);
        }
      if (analytic->parsed ())
        {
          return AnalyticCommand (o, inRange, hidden);
        }
      return TopologyCommand (o, complete);
    }
  catch (const ConfigError& e)
    {
      std::cerr << "error: config: " << OneLine (e.what ()) << '\n';
      return 2;
    }
  catch (const std::exception& e)
    {
      std::cerr << "error: runtime: " << OneLine (e.what ()) << '\n';
      return 1;
    }
}
