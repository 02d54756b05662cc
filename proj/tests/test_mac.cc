#include "hexsim/mac.h"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace hexsim;

namespace {

std::vector<std::array<bool, kAcCount>>
Carries (int n, std::array<bool, kAcCount> sta = {true, true, true, true})
{
  std::vector<std::array<bool, kAcCount>> c (n, sta);
  c[0] = {false, false, false, false};
  return c;
}

Topology
Complete (int stas)
{
  const int n = stas + 1;
  return Topology::FromHearing (std::vector<Position> (n), std::vector<std::vector<bool>> (n, std::vector<bool> (n, true)),
                                Carries (n));
}

/// Every STA hears the AP; STA pairs hear each other with probability `link`.
Topology
RandomSmall (std::mt19937_64& gen, int stas, double link)
{
  const int n = stas + 1;
  std::bernoulli_distribution edge (link);
  std::vector<std::vector<bool>> h (n, std::vector<bool> (n, true));
  for (int a = 1; a < n; ++a)
    {
      for (int b = a + 1; b < n; ++b)
        {
          h[a][b] = h[b][a] = edge (gen);
        }
    }
  return Topology::FromHearing (std::vector<Position> (n), h, Carries (n));
}

SimConfig
Small (double aggregatePps, double seconds)
{
  SimConfig c = DefaultConfig ();
  c.runDurationS = seconds;
  for (auto& a : c.ac)
    {
      a.arrivalRate = aggregatePps / kAcCount;
    }
  return c;
}

} // namespace

TEST_CASE ("NAV policy")
{
  CHECK (NavApplies (NavPolicy::kIntraBssOnly, 0, 0));
  CHECK_FALSE (NavApplies (NavPolicy::kIntraBssOnly, 0, 1));
  CHECK (NavApplies (NavPolicy::kLegacy, 0, 1));

  NavState nav;
  CHECK (NavUpdate (nav, 500, 0, 0, NavPolicy::kIntraBssOnly));
  CHECK (nav.expiry == 500);
  CHECK_FALSE (NavUpdate (nav, 400, 0, 0, NavPolicy::kIntraBssOnly));
  CHECK (nav.expiry == 500);
  CHECK_FALSE (NavUpdate (nav, 900, 1, 0, NavPolicy::kIntraBssOnly));
  CHECK (nav.expiry == 500);
  CHECK (NavUpdate (nav, 900, 1, 0, NavPolicy::kLegacy));
  CHECK (nav.setterBss == 1);
}

TEST_CASE ("arrival generation")
{
  Rng a (1);
  CHECK (GenerateArrivals (0.0, 1000000, a).empty ());
  CHECK_THROWS (GenerateArrivals (-1.0, 1000000, a));

  Rng r1 (42), r2 (42);
  const auto x = GenerateArrivals (4800.0, 1000000, r1);
  const auto y = GenerateArrivals (4800.0, 1000000, r2);
  CHECK (x == y);
  CHECK (std::is_sorted (x.begin (), x.end ()));
  CHECK (x.back () < 1000000);
  CHECK (std::abs (static_cast<double> (x.size ()) - 4800.0) <= 3.0 * std::sqrt (4800.0));
}

TEST_CASE ("arrival counts are Poisson across seeds")
{
  double sum = 0.0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s)
    {
      Rng r (Rng::Derive (9, s));
      sum += static_cast<double> (GenerateArrivals (50.0, 1000000, r).size ());
    }
  CHECK (std::abs (sum / seeds - 50.0) <= 3.0 * std::sqrt (50.0 / seeds));
}

TEST_CASE ("retry escalates the window and drops past the limit")
{
  const SimConfig c = DefaultConfig ();
  Rng rng (3);
  Edcaf e;
  e.ac = 0;
  e.queue.push_back (Packet {});
  e.queue.push_back (Packet {});

  CHECK (HandleRetry (e, c, rng, 10) == RetryResult::kRequeued);
  CHECK (e.stage == 1);
  CHECK (WindowSize (0, e.stage, c) == 64);
  CHECK (e.counter >= 0);
  CHECK (e.counter < 64);
  CHECK (e.armed);

  for (int i = 2; i <= 7; ++i)
    {
      CHECK (HandleRetry (e, c, rng, 10) == RetryResult::kRequeued);
      CHECK (e.stage == i);
      CHECK (e.counter < WindowSize (0, e.stage, c));
    }
  CHECK (e.queue.front ().retries == 7);
  CHECK (HandleRetry (e, c, rng, 20) == RetryResult::kDropped);
  CHECK (e.queue.size () == 1);
  CHECK (e.stage == 0);
  CHECK (e.queue.front ().hol == 20);
  CHECK (e.counter < WindowSize (0, 0, c));

  Edcaf empty;
  CHECK_THROWS (HandleRetry (empty, c, rng, 0));
}

TEST_CASE ("counter stays inside the window on every draw")
{
  const SimConfig c = DefaultConfig ();
  Rng rng (8);
  for (int k = 0; k < kAcCount; ++k)
    {
      for (int trial = 0; trial < 200; ++trial)
        {
          Edcaf e;
          e.ac = k;
          e.queue.push_back (Packet {});
          const int fails = trial % 8;
          for (int i = 0; i < fails; ++i)
            {
              HandleRetry (e, c, rng, 0);
            }
          if (fails > 0)
            {
              REQUIRE (e.counter >= 0);
              REQUIRE (e.counter < WindowSize (k, e.stage, c));
              REQUIRE (e.stage <= c.frames.retryLimit);
            }
        }
    }
}

TEST_CASE ("responder ranking")
{
  std::vector<Candidate> c {{5, 1, 3}, {2, 3, 1}, {7, 3, 4}, {1, 1, 3}, {4, 0, 9}};
  CHECK (RankCandidates (c, 10) == std::vector<NodeId> {7, 2, 1, 5, 4});
  CHECK (RankCandidates (c, 3) == std::vector<NodeId> {7, 2, 1});
  CHECK (RankCandidates (c, 0).empty ());
}

TEST_CASE ("TXOP round budgets")
{
  const SimConfig c = DefaultConfig ();
  CHECK (MaxTxopRounds (c, 0) == 1);
  CHECK (MaxTxopRounds (c, 1) == 1);
  CHECK (MaxTxopRounds (c, 2) == 3);
  CHECK (MaxTxopRounds (c, 3) == 3);
  CHECK (MaxTriggerRounds (c) == 3);
  SimConfig s = c;
  s.ac[3].txopLimitUs = 0;
  CHECK (MaxTriggerRounds (s) == 1);
}

TEST_CASE ("single STA exchanges occupy the medium for the expected airtime")
{
  // One STA, background class only, no triggers: every success is RTS, CTS, DATA, BA.
  SimConfig c = Small (0.0, 0.5);
  c.staCount = 1;
  c.ac[0].arrivalRate = 200.0;
  c.apTriggers = false;
  c.phy.ber = 0.0;
  const Topology t = Topology::FromHearing (std::vector<Position> (2), {{true, true}, {true, true}},
                                            Carries (2, {true, false, false, false}));
  InvariantCounters inv;
  const RunCounters r = RunSimulation (c, t, 4, nullptr, &inv);
  const auto& a = r.ac[0];
  REQUIRE (a.delivered > 50);
  CHECK (a.dropped == 0);
  CHECK (r.collisions == 0);
  CHECK (r.controlAirtimeUs == doctest::Approx (132.0 * a.delivered).epsilon (0.01));
  CHECK (r.dataAirtimeUs >= 288.0 * a.delivered);
  CHECK (r.dataAirtimeUs <= 288.0 * (a.delivered + 1));
  CHECK (a.receivedBits == doctest::Approx (91632.0 * a.delivered));
  CHECK (inv.conservation);
  CHECK (inv.internalCollisions == 0);
  // Backoff is at least AIFS_0 per packet.
  CHECK (a.backoffSumUs / a.delivered >= AifsUs (c, 0));
}

TEST_CASE ("same seed gives the same trace")
{
  const SimConfig c = Small (2400.0, 0.05);
  const Topology t = BuildTopology (c, 3);
  std::ostringstream a, b;
  RunSimulation (c, t, 3, &a);
  RunSimulation (c, t, 3, &b);
  CHECK (a.str () == b.str ());
  CHECK_FALSE (a.str ().empty ());
  std::ostringstream d;
  RunSimulation (c, t, 4, &d);
  CHECK (a.str () != d.str ());
}

TEST_CASE ("NAV policies agree inside a single BSS")
{
  SimConfig c = Small (3600.0, 0.05);
  const Topology t = BuildTopology (c, 2);
  std::ostringstream a, b;
  RunSimulation (c, t, 2, &a);
  c.navPolicy = NavPolicy::kLegacy;
  RunSimulation (c, t, 2, &b);
  CHECK (a.str () == b.str ());
}

TEST_CASE ("complete graph: only contention windows collide")
{
  SimConfig c = Small (6000.0, 0.2);
  c.phy.ber = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed)
    {
      CAPTURE (seed);
      InvariantCounters inv;
      const RunCounters r = RunSimulation (c, Complete (24), seed, nullptr, &inv);
      CHECK (inv.nonContentionCollisions == 0);
      CHECK (inv.conservation);
      CHECK (r.collisions > 0);
    }
}

TEST_CASE ("hidden pair collides more than an audible pair")
{
  SimConfig c = Small (0.0, 0.5);
  c.staCount = 2;
  c.ac[0].arrivalRate = 2000.0;
  c.apTriggers = false;
  const auto carries = Carries (3, {true, false, false, false});
  const Topology hidden = Topology::FromHearing (std::vector<Position> (3),
                                                 {{true, true, true}, {true, true, false}, {true, false, true}},
                                                 carries);
  const Topology audible = Topology::FromHearing (std::vector<Position> (3),
                                                  std::vector<std::vector<bool>> (3, std::vector<bool> (3, true)),
                                                  carries);
  const RunCounters h = RunSimulation (c, hidden, 1);
  const RunCounters a = RunSimulation (c, audible, 1);
  CHECK (h.collisions > 2 * a.collisions);
  CHECK (h.ac[0].backoffSumUs / h.ac[0].delivered > a.ac[0].backoffSumUs / a.ac[0].delivered);
}

TEST_CASE ("HE uplink data never collides")
{
  SimConfig c = Small (4800.0, 0.2);
  c.staCount = 8;
  c.heFraction = 1.0;
  c.phy.ber = 0.0;
  std::mt19937_64 gen (12);
  for (int i = 0; i < 3; ++i)
    {
      InvariantCounters inv;
      RunSimulation (c, RandomSmall (gen, 8, 0.4), 20 + i, nullptr, &inv);
      CHECK (inv.nonContentionCollisions == 0);
    }
}

TEST_CASE ("grouped exchanges respect the antenna count")
{
  const SimConfig c = Small (7200.0, 0.2);
  InvariantCounters inv;
  RunSimulation (c, Complete (24), 5, nullptr, &inv);
  CHECK (inv.maxGrantConcurrency >= 2);
  CHECK (inv.maxGrantConcurrency <= c.phy.antennas);
  CHECK (inv.triggers > 0);
  CHECK (inv.groupCts > 0);
}

TEST_CASE ("invariants on random small instances")
{
  std::mt19937_64 gen (2024);
  std::uniform_int_distribution<int> staCount (1, 6);
  std::uniform_real_distribution<double> link (0.0, 1.0);
  std::uniform_real_distribution<double> rate (0.0, 6000.0);
  std::uniform_int_distribution<int> ms (5, 50);
  std::bernoulli_distribution coin (0.5);
  for (int instance = 0; instance < 100; ++instance)
    {
      CAPTURE (instance);
      const int stas = staCount (gen);
      const Topology t = RandomSmall (gen, stas, link (gen));
      SimConfig c = DefaultConfig ();
      c.staCount = stas;
      c.runDurationS = ms (gen) / 1000.0;
      for (auto& a : c.ac)
        {
          a.arrivalRate = rate (gen) / kAcCount;
        }
      c.apTriggers = coin (gen);
      c.heFraction = coin (gen) ? 0.5 : 0.0;
      c.phy.ber = coin (gen) ? 2e-6 : 2e-5;
      c.navPolicy = coin (gen) ? NavPolicy::kLegacy : NavPolicy::kIntraBssOnly;
      c.shareUpdateUs = 10000;

      InvariantCounters inv;
      const RunCounters r = RunSimulation (c, t, 1000 + instance, nullptr, &inv);
      REQUIRE (inv.conservation);
      REQUIRE (inv.navViolations == 0);
      REQUIRE (inv.aifsViolations == 0);
      REQUIRE (inv.overlappingOwnTx == 0);
      REQUIRE (inv.maxGrantConcurrency <= c.phy.antennas);

      const RowSet rows = RowsFor (r);
      for (const auto& row : rows)
        {
          REQUIRE (row.dropRatio >= 0.0);
          REQUIRE (row.dropRatio <= 1.0);
          REQUIRE (row.backoffUs >= 0.0);
          REQUIRE (row.waitingUs >= 0.0);
        }
      for (int k = 0; k < kAcCount; ++k)
        {
          const auto& a = r.ac[k];
          REQUIRE (a.arrivals == a.delivered + a.dropped + a.queued);
          REQUIRE (a.receivedBits <= 8.0 * c.frames.mpduOctets * a.arrivals);
        }
    }
}

TEST_CASE ("no failures means no drops")
{
  SimConfig c = Small (1200.0, 0.1);
  c.staCount = 1;
  c.phy.ber = 0.0;
  c.apTriggers = false;
  const RunCounters r = RunSimulation (c, Complete (1), 3);
  CHECK (r.collisions == 0);
  for (const auto& a : r.ac)
    {
      CHECK (a.dropped == 0);
    }
}
