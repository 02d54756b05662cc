#include "hexsim/geometry.h"

#include "oracles.h"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace hexsim;

namespace {

std::vector<std::array<bool, kAcCount>>
AllClasses (int n)
{
  std::vector<std::array<bool, kAcCount>> c (n, {true, true, true, true});
  c[0] = {false, false, false, false};
  return c;
}

} // namespace

TEST_CASE ("pathloss")
{
  const PathLossParams p;
  CHECK (PathlossDb (1.0, p, 0.0) == doctest::Approx (p.referenceLossDb + 0.5));
  CHECK (PathlossDb (10.0, p, 0.0) == doctest::Approx (p.referenceLossDb + 20.0 + 5.0));
  CHECK (PathlossDb (10.0, p, 3.0) == doctest::Approx (p.referenceLossDb + 28.0));
  CHECK (PathlossDb (30.0, p, 0.0) > PathlossDb (10.0, p, 0.0));
  CHECK_THROWS (PathlossDb (0.0, p, 0.0));
  CHECK_THROWS (PathlossDb (-1.0, p, 0.0));
}

TEST_CASE ("max range matches an independent bisection")
{
  const PathLossParams p;
  const double d82 = MaxRangeM (23.0, -82.0, p);
  const double d73 = MaxRangeM (23.0, -73.0, p);
  CHECK (std::abs (d82 - oracle::RangeForBudget (105.0, p.referenceLossDb, p.exponent, p.wallDbPerM)) <= 0.01);
  CHECK (std::abs (d73 - oracle::RangeForBudget (96.0, p.referenceLossDb, p.exponent, p.wallDbPerM)) <= 0.01);
  CHECK (d73 < d82);
  CHECK (std::abs (PathlossDb (d82, p, 0.0) - 105.0) <= 0.1);
  CHECK (std::abs (PathlossDb (d73, p, 0.0) - 96.0) <= 0.1);
  // Loosely the 30 m association radius quoted for -73 dBm.
  CHECK (d73 > 20.0);
  CHECK (d73 < 40.0);
  CHECK_THROWS (MaxRangeM (23.0, 30.0, p));
  CHECK_THROWS (MaxRangeM (23.0, 0.0, p));
}

TEST_CASE ("inverse consistency over a range of budgets")
{
  PathLossParams p;
  for (double csth = -95.0; csth <= -40.0; csth += 2.5)
    {
      const double d = MaxRangeM (23.0, csth, p);
      CHECK (std::abs (PathlossDb (d, p, 0.0) - (23.0 - csth)) <= 0.1);
    }
}

TEST_CASE ("three-node line")
{
  // STA 1 - AP - STA 2, the STAs cannot hear each other.
  std::vector<Position> pos {{0, 0}, {-10, 0}, {10, 0}};
  std::vector<std::vector<bool>> h {{true, true, true}, {true, true, false}, {true, false, true}};
  const Topology t = Topology::FromHearing (pos, h, AllClasses (3));
  CHECK (t.HiddenNodeCount (1) == 1);
  CHECK (t.HiddenNodeCount (2) == 1);
  for (int k = 0; k < kAcCount; ++k)
    {
      CHECK (t.HiddenCounts (1)[k] == 1);
      CHECK (t.InRangeCounts (1)[k] == 0);
    }
  CHECK (MeanHiddenPerSta (t) == doctest::Approx (1.0));
  CHECK (t.Listeners (kApId) == std::vector<NodeId> {1, 2});
  CHECK (t.Listeners (1) == std::vector<NodeId> {0});
}

TEST_CASE ("hidden counts respect carried classes")
{
  std::vector<Position> pos (4);
  std::vector<std::vector<bool>> h (4, std::vector<bool> (4, true));
  h[1][3] = h[3][1] = false;
  auto carries = AllClasses (4);
  carries[3] = {false, true, false, true};
  const Topology t = Topology::FromHearing (pos, h, carries);
  CHECK (t.HiddenCounts (1) == AcCounts {0, 1, 0, 1});
  CHECK (t.InRangeCounts (1) == AcCounts {1, 1, 1, 1});
  CHECK (t.HiddenNodeCount (1) == 1);
  CHECK (hexsim::HiddenCounts (t)[1] == t.HiddenCounts (1));
}

TEST_CASE ("complete hearing graph has no hidden nodes")
{
  std::vector<Position> pos (3);
  std::vector<std::vector<bool>> h (3, std::vector<bool> (3, true));
  const Topology t = Topology::FromHearing (pos, h, AllClasses (3));
  CHECK (MeanHiddenPerSta (t) == 0.0);
}

TEST_CASE ("unassociated STA is rejected")
{
  std::vector<Position> pos (2);
  std::vector<std::vector<bool>> h {{true, false}, {true, true}};
  CHECK_THROWS (Topology::FromHearing (pos, h, AllClasses (2)));
}

TEST_CASE ("built topology invariants")
{
  SimConfig cfg = DefaultConfig ();
  for (auto& a : cfg.ac)
    {
      a.arrivalRate = 1000.0;
    }
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
      CAPTURE (seed);
      const Topology t = BuildTopology (cfg, seed);
      REQUIRE (t.StaCount () == cfg.staCount);
      const int others = t.StaCount () - 1;
      for (NodeId s : t.BssMembers ())
        {
          CHECK (t.Hears (s, kApId));
          CHECK (t.Hears (kApId, s));
          for (int k = 0; k < kAcCount; ++k)
            {
              CHECK (t.HiddenCounts (s)[k] + t.InRangeCounts (s)[k] == others);
            }
          for (NodeId o : t.BssMembers ())
            {
              CHECK (t.Hears (s, o) == t.Hears (o, s));
            }
        }
    }
}

TEST_CASE ("topology is a function of the seed")
{
  const SimConfig cfg = DefaultConfig ();
  std::ostringstream a, b, c;
  BuildTopology (cfg, 5).WriteCsv (a);
  BuildTopology (cfg, 5).WriteCsv (b);
  BuildTopology (cfg, 6).WriteCsv (c);
  CHECK (a.str () == b.str ());
  CHECK (a.str () != c.str ());
  CHECK (a.str ().rfind ("node_id,x_m,y_m,heard_by_ap,hidden_count\n", 0) == 0);
}

TEST_CASE ("association threshold bounds the BSS radius")
{
  SimConfig cfg = DefaultConfig ();
  cfg.phy.csthAssociationDbm = -73.0;
  const double d73 = MaxRangeM (23.0, -73.0, cfg.pathloss);
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
    {
      const Topology t = BuildTopology (cfg, seed);
      for (NodeId s : t.BssMembers ())
        {
          const auto& p = t.Positions ()[s];
          CHECK (std::hypot (p.x, p.y) <= d73 + 1e-9);
        }
    }
}

TEST_CASE ("complete-graph mode")
{
  SimConfig cfg = DefaultConfig ();
  cfg.topologyMode = TopologyMode::kCompleteGraph;
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
      CHECK (MeanHiddenPerSta (BuildTopology (cfg, seed)) == 0.0);
    }
}

TEST_CASE ("hearing edges shrink as the operational threshold rises")
{
  SimConfig base = DefaultConfig ();
  base.phy.csthAssociationDbm = -70.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
    {
      SimConfig loose = base;
      SimConfig strict = base;
      loose.phy.csthOperationalDbm = -82.0;
      strict.phy.csthOperationalDbm = -76.0;
      const Topology a = BuildTopology (loose, seed);
      const Topology b = BuildTopology (strict, seed);
      REQUIRE (a.NodeCount () == b.NodeCount ());
      for (int i = 0; i < a.NodeCount (); ++i)
        {
          for (int j = 0; j < a.NodeCount (); ++j)
            {
              if (b.Hears (i, j))
                {
                  CHECK (a.Hears (i, j));
                }
            }
        }
      CHECK (MeanHiddenPerSta (b) >= MeanHiddenPerSta (a));
    }
}

TEST_CASE ("mean hidden count falls as the association threshold rises")
{
  SimConfig cfg = DefaultConfig ();
  double prev = 1e9;
  for (int csth = -82; csth <= -73; csth += 3)
    {
      cfg.phy.csthAssociationDbm = csth;
      double sum = 0.0;
      for (std::uint64_t seed = 1; seed <= 40; ++seed)
        {
          sum += MeanHiddenPerSta (BuildTopology (cfg, seed));
        }
      const double mean = sum / 40.0;
      CAPTURE (csth);
      CHECK (mean <= prev);
      prev = mean;
    }
}
