#include "hexsim/geometry.h"

#include "hexsim/rng.h"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hexsim {

namespace {

constexpr std::uint64_t kPlacementStream = 0x7010;
constexpr std::uint64_t kShadowStream = 0x7011;
constexpr int kPlacementAttemptCap = 1000000;

// Below the 1 m reference the model is not meaningful.
double
LinkDistance (const Position& a, const Position& b)
{
  return std::max (1.0, std::hypot (a.x - b.x, a.y - b.y));
}

Position
DrawInDisc (Rng& rng, double radius, Placement placement)
{
  const double u = rng.Uniform ();
  const double r = placement == Placement::kArea ? radius * std::sqrt (u) : radius * u;
  const double theta = 2.0 * M_PI * rng.Uniform ();
  return {r * std::cos (theta), r * std::sin (theta)};
}

} // namespace

double
PathlossDb (double distanceM, const PathLossParams& params, double shadowDb)
{
  if (!(distanceM > 0.0))
    {
      throw std::invalid_argument ("pathloss distance must be positive");
    }
  return params.referenceLossDb + 10.0 * params.exponent * std::log10 (distanceM) + params.wallDbPerM * distanceM
         + shadowDb;
}

double
MaxRangeM (double txPowerDbm, double csthDbm, const PathLossParams& params)
{
  if (!(txPowerDbm > csthDbm))
    {
      throw std::invalid_argument ("transmit power must exceed the sensing threshold");
    }
  const double budget = txPowerDbm - csthDbm;
  if (budget < params.referenceLossDb)
    {
      throw std::invalid_argument ("link budget below reference loss: zero range");
    }
  double lo = 1e-3;
  double hi = 1.0;
  while (PathlossDb (hi, params, 0.0) <= budget)
    {
      lo = hi;
      hi *= 2.0;
    }
  while (hi - lo > 1e-4)
    {
      const double mid = 0.5 * (lo + hi);
      if (PathlossDb (mid, params, 0.0) <= budget)
        {
          lo = mid;
        }
      else
        {
          hi = mid;
        }
    }
  return lo;
}

Topology
Topology::FromHearing (std::vector<Position> positions, std::vector<std::vector<bool>> hearing,
                       std::vector<std::array<bool, kAcCount>> carries)
{
  const std::size_t n = positions.size ();
  if (n < 1 || hearing.size () != n || carries.size () != n)
    {
      throw std::invalid_argument ("topology tables disagree on node count");
    }
  for (const auto& row : hearing)
    {
      if (row.size () != n)
        {
          throw std::invalid_argument ("hearing matrix is not square");
        }
    }
  Topology t;
  t.m_positions = std::move (positions);
  t.m_hearing = std::move (hearing);
  t.m_carries = std::move (carries);
  t.Finalize ();
  return t;
}

void
Topology::Finalize ()
{
  const int n = NodeCount ();
  m_listeners.assign (n, {});
  for (int src = 0; src < n; ++src)
    {
      for (int l = 0; l < n; ++l)
        {
          if (l != src && m_hearing[l][src])
            {
              m_listeners[src].push_back (l);
            }
        }
    }
  m_members.clear ();
  for (int s = 1; s < n; ++s)
    {
      if (!m_hearing[s][kApId] || !m_hearing[kApId][s])
        {
          throw std::invalid_argument ("STA " + std::to_string (s) + " is not associated with the AP");
        }
      m_members.push_back (s);
    }
  m_hidden = hexsim::HiddenCounts (*this);
  m_inRange.assign (n, AcCounts {});
  m_hiddenNodes.assign (n, 0);
  for (NodeId s : m_members)
    {
      for (NodeId o : m_members)
        {
          if (o == s)
            {
              continue;
            }
          if (!m_hearing[s][o])
            {
              ++m_hiddenNodes[s];
            }
          for (int k = 0; k < kAcCount; ++k)
            {
              if (m_carries[o][k] && m_hearing[s][o])
                {
                  ++m_inRange[s][k];
                }
            }
        }
    }
}

void
Topology::WriteCsv (std::ostream& out) const
{
  out << "node_id,x_m,y_m,heard_by_ap,hidden_count\n";
  for (int i = 0; i < NodeCount (); ++i)
    {
      out << i << ',' << m_positions[i].x << ',' << m_positions[i].y << ',' << (m_hearing[kApId][i] ? 1 : 0) << ','
          << m_hiddenNodes[i] << '\n';
    }
}

std::vector<AcCounts>
HiddenCounts (const Topology& topology)
{
  std::vector<AcCounts> counts (topology.NodeCount (), AcCounts {});
  for (NodeId s : topology.BssMembers ())
    {
      for (NodeId o : topology.BssMembers ())
        {
          if (o == s || topology.Hears (s, o))
            {
              continue;
            }
          for (int k = 0; k < kAcCount; ++k)
            {
              if (topology.Carries (o, k))
                {
                  ++counts[s][k];
                }
            }
        }
    }
  return counts;
}

double
MeanHiddenPerSta (const Topology& topology)
{
  const auto& members = topology.BssMembers ();
  if (members.empty ())
    {
      throw std::invalid_argument ("BSS has no members");
    }
  double total = 0.0;
  for (NodeId s : members)
    {
      total += topology.HiddenNodeCount (s);
    }
  return total / static_cast<double> (members.size ());
}

Topology
BuildTopology (const SimConfig& cfg, std::uint64_t seed)
{
  const auto& phy = cfg.phy;
  const auto& pl = cfg.pathloss;
  Rng placeRng (Rng::Derive (seed, kPlacementStream));
  Rng shadowRng (Rng::Derive (seed, kShadowStream));

  const int n = cfg.staCount + 1;
  std::vector<Position> pos;
  pos.reserve (n);
  pos.push_back ({0.0, 0.0});

  std::vector<std::vector<bool>> hearing (n, std::vector<bool> (n, true));
  std::vector<std::array<bool, kAcCount>> carries (n);
  for (int k = 0; k < kAcCount; ++k)
    {
      carries[0][k] = false;
    }
  for (int s = 1; s < n; ++s)
    {
      for (int k = 0; k < kAcCount; ++k)
        {
          carries[s][k] = cfg.ac[k].arrivalRate > 0.0;
        }
    }

  if (cfg.topologyMode == TopologyMode::kCompleteGraph)
    {
      // Half the shadow-free range on both ends keeps every pair within range.
      PathLossParams flat = pl;
      flat.shadowingSigmaDb = 0.0;
      double radius = 0.5 * MaxRangeM (phy.txPowerDbm, phy.csthOperationalDbm, flat);
      radius = std::min (radius, MaxRangeM (phy.txPowerDbm, phy.csthAssociationDbm, flat));
      if (cfg.placementRadiusM > 0.0)
        {
          radius = std::min (radius, cfg.placementRadiusM);
        }
      for (int s = 1; s < n; ++s)
        {
          pos.push_back (DrawInDisc (placeRng, radius, cfg.placement));
        }
      return Topology::FromHearing (std::move (pos), std::move (hearing), std::move (carries));
    }

  const double radius = cfg.placementRadiusM > 0.0 ? cfg.placementRadiusM
                                                    : MaxRangeM (phy.txPowerDbm, phy.csthAssociationDbm, pl);
  std::vector<double> apShadow (1, 0.0);
  int attempts = 0;
  while (static_cast<int> (pos.size ()) < n)
    {
      if (++attempts > kPlacementAttemptCap)
        {
          throw std::runtime_error ("could not associate " + std::to_string (cfg.staCount)
                                    + " STAs within the placement attempt cap");
        }
      const Position p = DrawInDisc (placeRng, radius, cfg.placement);
      const double shadow = placeRng.Normal (0.0, pl.shadowingSigmaDb);
      const double rx = phy.txPowerDbm - PathlossDb (LinkDistance (p, pos[0]), pl, shadow);
      if (rx >= phy.csthAssociationDbm)
        {
          pos.push_back (p);
          apShadow.push_back (shadow);
        }
    }

  // One shadow draw per unordered pair keeps hearing symmetric.
  for (int a = 0; a < n; ++a)
    {
      for (int b = a + 1; b < n; ++b)
        {
          const double shadow = a == kApId ? apShadow[b] : shadowRng.Normal (0.0, pl.shadowingSigmaDb);
          const double rx = phy.txPowerDbm - PathlossDb (LinkDistance (pos[a], pos[b]), pl, shadow);
          const bool audible = rx >= phy.csthOperationalDbm;
          hearing[a][b] = audible;
          hearing[b][a] = audible;
        }
    }
  return Topology::FromHearing (std::move (pos), std::move (hearing), std::move (carries));
}

} // namespace hexsim
