#ifndef HEXSIM_GEOMETRY_H
#define HEXSIM_GEOMETRY_H

#include "hexsim/params.h"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace hexsim {

using NodeId = int;

/// Node 0 is always the access point.
inline constexpr NodeId kApId = 0;

struct Position
{
  double x = 0.0;
  double y = 0.0;
};

using AcCounts = std::array<int, kAcCount>;

/**
 * Static BSS layout. Index 0 of every per-node vector is the AP; STAs are
 * 1..staCount. Hearing is evaluated under the operational CSTH.
 */
class Topology
{
public:
  Topology () = default;

  /// Builds from an explicit hearing matrix. `carries[s][k]` says whether
  /// node s generates class-k traffic (ignored for the AP).
  static Topology FromHearing (std::vector<Position> positions, std::vector<std::vector<bool>> hearing,
                               std::vector<std::array<bool, kAcCount>> carries);

  int NodeCount () const { return static_cast<int> (m_positions.size ()); }
  int StaCount () const { return NodeCount () - 1; }
  const std::vector<Position>& Positions () const { return m_positions; }

  /// True when `listener` senses transmissions from `source`.
  bool Hears (NodeId listener, NodeId source) const { return m_hearing[listener][source]; }

  /// Nodes that hear `source`, excluding `source` itself.
  const std::vector<NodeId>& Listeners (NodeId source) const { return m_listeners[source]; }

  const std::vector<NodeId>& BssMembers () const { return m_members; }
  bool Carries (NodeId sta, int ac) const { return m_carries[sta][ac]; }

  /// N_{k,h}: class-k members not heard by `sta`.
  const AcCounts& HiddenCounts (NodeId sta) const { return m_hidden[sta]; }
  /// N_{k,t}: class-k members heard by `sta`.
  const AcCounts& InRangeCounts (NodeId sta) const { return m_inRange[sta]; }
  /// Number of distinct member STAs hidden from `sta`.
  int HiddenNodeCount (NodeId sta) const { return m_hiddenNodes[sta]; }

  int BssId (NodeId) const { return 0; }

  void WriteCsv (std::ostream& out) const;

private:
  void Finalize ();

  std::vector<Position> m_positions;
  std::vector<std::vector<bool>> m_hearing;
  std::vector<std::vector<NodeId>> m_listeners;
  std::vector<std::array<bool, kAcCount>> m_carries;
  std::vector<NodeId> m_members;
  std::vector<AcCounts> m_hidden;
  std::vector<AcCounts> m_inRange;
  std::vector<int> m_hiddenNodes;
};

/// Indoor femto loss: reference + 10 n log10(d) + wall * d + shadow.
double PathlossDb (double distanceM, const PathLossParams& params, double shadowDb);

/// Largest distance whose shadow-free loss fits the link budget, to 0.01 m.
double MaxRangeM (double txPowerDbm, double csthDbm, const PathLossParams& params);

/// Random placement until staCount STAs pass the association threshold.
Topology BuildTopology (const SimConfig& cfg, std::uint64_t seed);

/// Per-STA, per-AC hidden counts recomputed from the hearing relation.
std::vector<AcCounts> HiddenCounts (const Topology& topology);

double MeanHiddenPerSta (const Topology& topology);

} // namespace hexsim

#endif /* HEXSIM_GEOMETRY_H */
