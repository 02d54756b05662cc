#ifndef HEXSIM_MAC_H
#define HEXSIM_MAC_H

#include "hexsim/engine.h"
#include "hexsim/geometry.h"
#include "hexsim/metrics.h"
#include "hexsim/params.h"
#include "hexsim/rng.h"

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hexsim {

struct Packet
{
  int ac = 0;
  TimeUs arrival = 0;
  /// Time the packet reached the head of its queue; -1 while queued behind others.
  TimeUs hol = -1;
  int size = 0;
  int retries = 0;
  std::uint64_t uid = 0;
  bool receivedByAp = false;
  /// Start of the most recent transmission attempt.
  TimeUs lastAttempt = -1;
};

struct Edcaf
{
  int ac = 0;
  std::deque<Packet> queue;
  /// Remaining backoff slots.
  int counter = 0;
  int stage = 0;
  /// Contending for the medium (has a drawn counter and something to send).
  bool armed = false;
  TimeUs readyTime = 0;
  /// Start of the current AIFS + countdown interval.
  TimeUs countStart = 0;
  /// Scheduled expiry, -1 when frozen or not contending.
  TimeUs expiry = -1;
  std::uint64_t token = 0;
};

struct NavState
{
  TimeUs expiry = 0;
  int setterBss = -1;
};

/// Whether an overheard frame from `frameBss` may set the NAV of a node in `nodeBss`.
bool NavApplies (NavPolicy policy, int nodeBss, int frameBss);

/// Extends the NAV to `navEnd` when the policy allows it. Returns true on change.
bool NavUpdate (NavState& nav, TimeUs navEnd, int frameBss, int nodeBss, NavPolicy policy);

/// Poisson arrival instants in [0, duration).
std::vector<TimeUs> GenerateArrivals (double ratePps, TimeUs durationUs, Rng& rng);

enum class RetryResult { kRequeued, kDropped };

/// Charges a failure to the head-of-line packet: escalate the stage and
/// redraw the counter, or drop once retries exceed the limit.
RetryResult HandleRetry (Edcaf& edcaf, const SimConfig& cfg, Rng& rng, TimeUs now);

struct Candidate
{
  NodeId node = 0;
  /// Highest non-empty access category.
  int topAc = 0;
  int queueLength = 0;
};

/// Highest AC first, then longest queue, then lowest id; at most `limit`.
std::vector<NodeId> RankCandidates (std::vector<Candidate> candidates, int limit);

/// Largest number of data rounds a TXOP of class `ac` can carry.
int MaxTxopRounds (const SimConfig& cfg, int ac);

/// Trigger rounds that fit in the AP's TXOP (it contends at the highest class).
int MaxTriggerRounds (const SimConfig& cfg);

struct InvariantCounters
{
  std::int64_t navViolations = 0;
  std::int64_t aifsViolations = 0;
  std::int64_t overlappingOwnTx = 0;
  int maxGrantConcurrency = 0;
  std::int64_t internalCollisions = 0;
  std::int64_t triggers = 0;
  std::int64_t groupCts = 0;
  std::int64_t singleCts = 0;
  /// AP collisions involving a CTS, data or acknowledgement frame.
  std::int64_t nonContentionCollisions = 0;
  bool conservation = true;
};

/**
 * One BSS on one topology for one run. Owns the scheduler, the channel and
 * every EDCA function; single threaded.
 */
class BssSimulator
{
public:
  BssSimulator (const SimConfig& cfg, const Topology& topology, std::uint64_t seed);

  /// Tab-separated event lines: time_us, kind, node, detail.
  void SetTrace (std::ostream* trace) { m_trace = trace; }

  RunCounters Run ();

  const InvariantCounters& Invariants () const { return m_inv; }
  const Scheduler& Clock () const { return m_sched; }

private:
  struct Node
  {
    NodeId id = 0;
    bool he = false;
    std::array<Edcaf, kAcCount> edcaf;
    int audible = 0;
    bool transmitting = false;
    bool engaged = false;
    int pendingTx = 0;
    bool idle = true;
    TimeUs idleSince = 0;
    TimeUs lastBusyAt = -1;
    NavState nav;
    TimeUs navSetAt = -1;
    /// Exchange whose frame last extended the NAV.
    std::uint64_t navExchange = 0;
    std::uint64_t navToken = 0;
    TimeUs navBeforeRts = 0;
    TimeUs rtsNavFrom = -1;
    TimeUs lastSensedStart = -1;
    std::uint64_t timeoutToken = 0;
    std::uint64_t exchange = 0;
    Rng rng;
    Rng rxRng;
  };

  struct Exchange
  {
    std::uint64_t id = 0;
    bool trigger = false;
    NodeId primary = kApId;
    int ac = 0;
    std::vector<NodeId> named;
    std::vector<NodeId> successes;
    /// (node, ac) pairs transmitting data in the current round.
    std::vector<std::pair<NodeId, int>> sent;
    int pendingData = 0;
    int round = 1;
    int maxRounds = 1;
    bool grouped = false;
  };

  void Dispatch (const Event& ev);
  void OnArrival (NodeId n, int ac);
  void OnExpiry (NodeId n, int ac, std::uint64_t token);
  void OnTxStart (std::uint64_t pendingIndex);
  void OnTxEnd (TxId id);
  void OnTimeout (NodeId n, std::uint64_t token);
  void OnNavEvent (NodeId n, std::uint64_t token, bool rtsCheck);
  void OnShareUpdate ();

  void StartSu (NodeId n, int ac);
  void StartTrigger ();
  bool SendTrigger (Exchange& ex, TimeUs at);
  void AfterRts (const Transmission& tx, Reception atAp);
  void AfterCts (const Transmission& tx, const std::vector<Reception>& out);
  void AfterData (const Transmission& tx, Reception atAp);
  void AfterAck (const Transmission& tx, const std::vector<Reception>& out);
  void AfterTrigger (const Transmission& tx, const std::vector<Reception>& out);

  void Transmit (Frame frame);
  void ScheduleTx (Frame frame, TimeUs at);
  void SendData (NodeId n, int ac, Exchange& ex, TimeUs at);
  void ArmTimeout (NodeId n, TimeUs at);
  void Disengage (NodeId n);

  void Arm (NodeId n, int ac);
  void ScheduleExpiry (Node& node, Edcaf& e);
  void Freeze (Node& node);
  void ReEvaluate (Node& node);
  void ApplyNav (Node& node, const Frame& frame);

  void Deliver (NodeId n, int ac);
  void Retry (NodeId n, int ac);
  void ApOutcome (bool success);
  void RearmAp ();
  bool CanRespond (const Node& node, std::uint64_t exchange) const;
  int TopAc (const Node& node) const;
  std::vector<NodeId> SelectResponders (NodeId exclude, int limit) const;
  void CountApCollision (int ac);

  TimeUs Dur (FrameKind kind) const { return FrameDurationUs (kind, m_cfg.frames, m_cfg.phy); }
  Exchange& NewExchange ();

  SimConfig m_cfg;
  const Topology& m_top;
  std::uint64_t m_seed;
  Scheduler m_sched;
  Channel m_channel;
  std::vector<Node> m_nodes;
  std::vector<Frame> m_pending;
  std::unordered_map<std::uint64_t, Exchange> m_exchanges;
  std::uint64_t m_nextExchange = 1;
  std::uint64_t m_nextUid = 1;
  std::int64_t m_queuedTotal = 0;
  TimeUs m_end = 0;

  double m_fmu = 0.0;
  std::array<double, kAcCount> m_windowBits {};

  std::uint64_t m_apBusyPeriod = 0;
  std::uint64_t m_apCountedPeriod = 0;
  std::array<std::uint64_t, kAcCount> m_apCountedPeriodAc {};

  RunCounters m_counters;
  InvariantCounters m_inv;
  std::ostream* m_trace = nullptr;
};

/// Convenience wrapper: one run of `cfg.runDurationS` seconds.
RunCounters RunSimulation (const SimConfig& cfg, const Topology& topology, std::uint64_t seed,
                           std::ostream* trace = nullptr, InvariantCounters* invariants = nullptr);

} // namespace hexsim

#endif /* HEXSIM_MAC_H */
