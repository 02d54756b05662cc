#include "hexsim/mac.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hexsim {

namespace {

constexpr std::uint64_t kBackoffStream = 0x1000;
constexpr std::uint64_t kReceptionStream = 0x2000;
constexpr std::uint64_t kArrivalStream = 0x3000;

bool
Contains (const std::vector<NodeId>& v, NodeId n)
{
  return std::find (v.begin (), v.end (), n) != v.end ();
}

} // namespace

bool
NavApplies (NavPolicy policy, int nodeBss, int frameBss)
{
  return policy == NavPolicy::kLegacy || nodeBss == frameBss;
}

bool
NavUpdate (NavState& nav, TimeUs navEnd, int frameBss, int nodeBss, NavPolicy policy)
{
  if (!NavApplies (policy, nodeBss, frameBss) || navEnd <= nav.expiry)
    {
      return false;
    }
  nav.expiry = navEnd;
  nav.setterBss = frameBss;
  return true;
}

std::vector<TimeUs>
GenerateArrivals (double ratePps, TimeUs durationUs, Rng& rng)
{
  if (ratePps < 0.0)
    {
      throw std::invalid_argument ("arrival rate must be non-negative");
    }
  std::vector<TimeUs> out;
  if (ratePps == 0.0)
    {
      return out;
    }
  double t = 0.0;
  for (;;)
    {
      t += rng.Exponential (ratePps) * 1e6;
      const auto at = static_cast<TimeUs> (std::floor (t));
      if (at >= durationUs)
        {
          break;
        }
      out.push_back (at);
    }
  return out;
}

RetryResult
HandleRetry (Edcaf& e, const SimConfig& cfg, Rng& rng, TimeUs now)
{
  if (e.queue.empty ())
    {
      throw std::logic_error ("retry without a head-of-line packet");
    }
  const int limit = cfg.frames.retryLimit;
  RetryResult result = RetryResult::kRequeued;
  if (++e.queue.front ().retries > limit)
    {
      e.queue.pop_front ();
      e.stage = 0;
      result = RetryResult::kDropped;
      if (!e.queue.empty ())
        {
          e.queue.front ().hol = now;
        }
    }
  else
    {
      e.stage = std::min (e.stage + 1, limit);
    }
  e.expiry = -1;
  ++e.token;
  e.armed = !e.queue.empty ();
  if (e.armed)
    {
      e.counter = static_cast<int> (rng.UniformInt (WindowSize (e.ac, e.stage, cfg)));
      e.readyTime = now;
    }
  return result;
}

std::vector<NodeId>
RankCandidates (std::vector<Candidate> candidates, int limit)
{
  std::sort (candidates.begin (), candidates.end (), [] (const Candidate& a, const Candidate& b) {
    if (a.topAc != b.topAc)
      {
        return a.topAc > b.topAc;
      }
    if (a.queueLength != b.queueLength)
      {
        return a.queueLength > b.queueLength;
      }
    return a.node < b.node;
  });
  std::vector<NodeId> out;
  for (const auto& c : candidates)
    {
      if (static_cast<int> (out.size ()) >= limit)
        {
          break;
        }
      out.push_back (c.node);
    }
  return out;
}

int
MaxTxopRounds (const SimConfig& cfg, int ac)
{
  const TimeUs limit = cfg.ac.at (ac).txopLimitUs;
  const auto d = [&] (FrameKind k) { return FrameDurationUs (k, cfg.frames, cfg.phy); };
  const TimeUs sifs = cfg.phy.sifsUs;
  const TimeUs first = d (FrameKind::kRts) + d (FrameKind::kCts) + d (FrameKind::kData) + d (FrameKind::kBlockAck)
                       + 3 * sifs;
  const TimeUs more = d (FrameKind::kData) + d (FrameKind::kBlockAck) + 2 * sifs;
  if (limit <= first)
    {
      return 1;
    }
  return 1 + static_cast<int> ((limit - first) / more);
}

int
MaxTriggerRounds (const SimConfig& cfg)
{
  const TimeUs limit = cfg.ac[kAcCount - 1].txopLimitUs;
  const auto d = [&] (FrameKind k) { return FrameDurationUs (k, cfg.frames, cfg.phy); };
  const TimeUs sifs = cfg.phy.sifsUs;
  const TimeUs first = d (FrameKind::kTrigger) + d (FrameKind::kData) + d (FrameKind::kMultiBlockAck) + 2 * sifs;
  const TimeUs more = first + sifs;
  if (limit <= first)
    {
      return 1;
    }
  return 1 + static_cast<int> ((limit - first) / more);
}

BssSimulator::BssSimulator (const SimConfig& cfg, const Topology& topology, std::uint64_t seed)
  : m_cfg (cfg),
    m_top (topology),
    m_seed (seed),
    m_channel (topology)
{
  const auto errors = ValidateConfig (cfg);
  if (!errors.empty ())
    {
      throw ConfigError (errors.front ());
    }
  const int n = topology.NodeCount ();
  const auto heCount = std::llround (cfg.heFraction * topology.StaCount ());
  m_nodes.resize (n);
  for (int i = 0; i < n; ++i)
    {
      Node& node = m_nodes[i];
      node.id = i;
      node.he = i != kApId && i <= heCount;
      node.rng = Rng (Rng::Derive (seed, kBackoffStream + i));
      node.rxRng = Rng (Rng::Derive (seed, kReceptionStream + i));
      for (int k = 0; k < kAcCount; ++k)
        {
          node.edcaf[k].ac = k;
        }
    }
  m_end = std::llround (cfg.runDurationS * 1e6);

  for (NodeId s : topology.BssMembers ())
    {
      for (int k = 0; k < kAcCount; ++k)
        {
          if (!topology.Carries (s, k))
            {
              continue;
            }
          Rng rng (Rng::Derive (seed, kArrivalStream + static_cast<std::uint64_t> (s) * kAcCount + k));
          for (TimeUs t : GenerateArrivals (PerStaRate (cfg, k), m_end, rng))
            {
              m_sched.Schedule ({t, 0, EventKind::kArrival, s, k, 0, 0});
            }
        }
    }

  double total = 0.0;
  for (const auto& a : cfg.ac)
    {
      total += a.arrivalRate;
    }
  m_fmu = total > 0.0 ? 1.0 - cfg.ac[3].arrivalRate / total : 0.0;
  if (cfg.shareUpdateUs > 0)
    {
      m_sched.Schedule ({cfg.shareUpdateUs, 0, EventKind::kSlotTick, kApId, 0, 0, 0});
    }
}

RunCounters
BssSimulator::Run ()
{
  m_counters.events = m_sched.RunUntil (m_end, [this] (const Event& ev) { Dispatch (ev); });
  m_counters.durationS = m_cfg.runDurationS;
  if (!m_top.BssMembers ().empty ())
    {
      m_counters.hiddenPerSta = MeanHiddenPerSta (m_top);
    }
  for (const Node& node : m_nodes)
    {
      for (int k = 0; k < kAcCount; ++k)
        {
          m_counters.ac[k].queued += static_cast<std::int64_t> (node.edcaf[k].queue.size ());
        }
    }
  for (const auto& a : m_counters.ac)
    {
      m_inv.conservation = m_inv.conservation && a.arrivals == a.delivered + a.dropped + a.queued;
    }
  return m_counters;
}

void
BssSimulator::Dispatch (const Event& ev)
{
  if (m_trace != nullptr)
    {
      *m_trace << ev.time << '\t' << ToString (ev.kind) << '\t' << ev.node << "\tac=" << ev.ac << " aux=" << ev.aux
               << '\n';
    }
  switch (ev.kind)
    {
    case EventKind::kArrival: OnArrival (ev.node, ev.ac); break;
    case EventKind::kAifsExpiry: OnExpiry (ev.node, ev.ac, ev.token); break;
    case EventKind::kTxStart: OnTxStart (ev.aux); break;
    case EventKind::kTxEnd: OnTxEnd (ev.aux); break;
    case EventKind::kTimeout: OnTimeout (ev.node, ev.token); break;
    case EventKind::kNavExpiry: OnNavEvent (ev.node, ev.token, ev.aux == 1); break;
    case EventKind::kSlotTick: OnShareUpdate (); break;
    }
}

BssSimulator::Exchange&
BssSimulator::NewExchange ()
{
  const std::uint64_t id = m_nextExchange++;
  Exchange& ex = m_exchanges[id];
  ex.id = id;
  return ex;
}

// Medium state and backoff.

void
BssSimulator::ScheduleExpiry (Node& node, Edcaf& e)
{
  const TimeUs start = std::max (node.idleSince, e.readyTime);
  e.countStart = start;
  e.expiry = std::max (start + AifsUs (m_cfg, e.ac) + e.counter * m_cfg.phy.slotUs, m_sched.Now ());
  ++e.token;
  m_sched.Schedule ({e.expiry, 0, EventKind::kAifsExpiry, node.id, e.ac, e.token, 0});
}

void
BssSimulator::Freeze (Node& node)
{
  const TimeUs now = m_sched.Now ();
  for (Edcaf& e : node.edcaf)
    {
      // An expiry due this very microsecond still fires: both senders collide.
      if (e.expiry < 0 || e.expiry == now)
        {
          continue;
        }
      const TimeUs elapsed = now - e.countStart - AifsUs (m_cfg, e.ac);
      if (elapsed > 0)
        {
          e.counter -= static_cast<int> (std::min<TimeUs> (e.counter, elapsed / m_cfg.phy.slotUs));
        }
      e.expiry = -1;
      ++e.token;
    }
}

void
BssSimulator::ReEvaluate (Node& node)
{
  const TimeUs now = m_sched.Now ();
  const bool idle = !node.transmitting && !node.engaged && node.pendingTx == 0 && node.audible == 0
                    && now >= node.nav.expiry;
  if (idle && !node.idle)
    {
      node.idle = true;
      node.idleSince = now;
      for (Edcaf& e : node.edcaf)
        {
          if (e.armed && e.expiry < 0)
            {
              ScheduleExpiry (node, e);
            }
        }
    }
  else if (!idle && node.idle)
    {
      node.idle = false;
      node.lastBusyAt = now;
      Freeze (node);
    }
}

void
BssSimulator::Arm (NodeId n, int ac)
{
  Node& node = m_nodes[n];
  Edcaf& e = node.edcaf[ac];
  e.armed = true;
  e.readyTime = m_sched.Now ();
  e.expiry = -1;
  ++e.token;
  if (node.idle)
    {
      ScheduleExpiry (node, e);
    }
}

void
BssSimulator::ApplyNav (Node& node, const Frame& frame)
{
  const TimeUs now = m_sched.Now ();
  const TimeUs before = node.nav.expiry;
  if (!NavUpdate (node.nav, frame.navEnd, frame.bss, m_top.BssId (node.id), m_cfg.navPolicy))
    {
      return;
    }
  node.navSetAt = now;
  node.navExchange = frame.exchange;
  ++node.navToken;
  m_sched.Schedule ({frame.navEnd, 0, EventKind::kNavExpiry, node.id, 0, node.navToken, 0});
  if (frame.kind == FrameKind::kRts)
    {
      // Released again if nothing follows the RTS.
      node.navBeforeRts = before;
      node.rtsNavFrom = now;
      const TimeUs check = now + 2 * m_cfg.phy.sifsUs + Dur (FrameKind::kCts) + 2 * m_cfg.phy.slotUs;
      m_sched.Schedule ({check, 0, EventKind::kNavExpiry, node.id, 0, node.navToken, 1});
    }
}

void
BssSimulator::OnNavEvent (NodeId n, std::uint64_t token, bool rtsCheck)
{
  Node& node = m_nodes[n];
  if (token != node.navToken)
    {
      return;
    }
  if (rtsCheck)
    {
      if (node.lastSensedStart >= node.rtsNavFrom)
        {
          return;
        }
      node.nav.expiry = node.navBeforeRts;
      ++node.navToken;
      if (node.nav.expiry > m_sched.Now ())
        {
          m_sched.Schedule ({node.nav.expiry, 0, EventKind::kNavExpiry, n, 0, node.navToken, 0});
        }
    }
  ReEvaluate (node);
}

// Traffic and contention.

void
BssSimulator::OnArrival (NodeId n, int ac)
{
  Node& node = m_nodes[n];
  Edcaf& e = node.edcaf[ac];
  Packet p;
  p.ac = ac;
  p.arrival = m_sched.Now ();
  p.size = m_cfg.frames.mpduOctets;
  p.uid = m_nextUid++;
  e.queue.push_back (p);
  ++m_queuedTotal;
  Record (m_counters, {MetricEvent::kArrival, ac, 0, 0});
  if (e.queue.size () == 1)
    {
      e.queue.front ().hol = p.arrival;
      e.counter = static_cast<int> (node.rng.UniformInt (WindowSize (ac, e.stage, m_cfg)));
      Arm (n, ac);
    }
  const Node& ap = m_nodes[kApId];
  if (m_cfg.apTriggers && !ap.edcaf[kAcCount - 1].armed && !ap.engaged)
    {
      RearmAp ();
    }
}

void
BssSimulator::OnExpiry (NodeId n, int ac, std::uint64_t token)
{
  Node& node = m_nodes[n];
  const TimeUs now = m_sched.Now ();
  if (token != node.edcaf[ac].token || node.edcaf[ac].expiry != now)
    {
      return;
    }
  int winner = ac;
  for (int k = 0; k < kAcCount; ++k)
    {
      if (node.edcaf[k].expiry == now && k > winner)
        {
          winner = k;
        }
    }
  Edcaf& w = node.edcaf[winner];
  w.expiry = -1;
  ++w.token;
  for (int k = 0; k < kAcCount; ++k)
    {
      Edcaf& e = node.edcaf[k];
      if (k != winner && e.expiry == now)
        {
          e.expiry = -1;
          ++e.token;
          ++m_inv.internalCollisions;
          Retry (n, k);
        }
    }
  if (node.transmitting || node.engaged || node.pendingTx > 0)
    {
      // Counter stays at zero; the attempt happens after the next AIFS.
      return;
    }
  if (node.nav.expiry > now && node.navSetAt < now)
    {
      ++m_inv.navViolations;
    }
  if (node.lastBusyAt >= w.countStart && node.lastBusyAt < now)
    {
      ++m_inv.aifsViolations;
    }
  w.armed = false;
  if (n == kApId)
    {
      if (m_queuedTotal == 0)
        {
          return;
        }
      if (node.rng.Bernoulli (m_fmu) && !SelectResponders (kApId, m_cfg.phy.antennas).empty ())
        {
          StartTrigger ();
        }
      else
        {
          RearmAp ();
        }
      return;
    }
  StartSu (n, winner);
}

void
BssSimulator::Retry (NodeId n, int ac)
{
  Node& node = m_nodes[n];
  Edcaf& e = node.edcaf[ac];
  if (e.queue.empty ())
    {
      return;
    }
  if (HandleRetry (e, m_cfg, node.rng, m_sched.Now ()) == RetryResult::kDropped)
    {
      --m_queuedTotal;
      Record (m_counters, {MetricEvent::kDropped, ac, 0, 0});
    }
  if (e.armed && node.idle)
    {
      ScheduleExpiry (node, e);
    }
}

void
BssSimulator::Deliver (NodeId n, int ac)
{
  Node& node = m_nodes[n];
  Edcaf& e = node.edcaf[ac];
  if (e.queue.empty ())
    {
      return;
    }
  const Packet p = e.queue.front ();
  e.queue.pop_front ();
  --m_queuedTotal;
  Record (m_counters, {MetricEvent::kDelivered, ac, static_cast<double> (p.lastAttempt - p.hol),
                       static_cast<double> (p.hol - p.arrival)});
  e.stage = 0;
  if (e.queue.empty ())
    {
      e.armed = false;
      e.expiry = -1;
      ++e.token;
      return;
    }
  e.queue.front ().hol = m_sched.Now ();
  e.counter = static_cast<int> (node.rng.UniformInt (WindowSize (ac, 0, m_cfg)));
  Arm (n, ac);
}

void
BssSimulator::RearmAp ()
{
  Node& ap = m_nodes[kApId];
  Edcaf& e = ap.edcaf[kAcCount - 1];
  if (!m_cfg.apTriggers || m_queuedTotal == 0)
    {
      e.armed = false;
      e.expiry = -1;
      ++e.token;
      return;
    }
  e.counter = static_cast<int> (ap.rng.UniformInt (WindowSize (e.ac, e.stage, m_cfg)));
  Arm (kApId, e.ac);
}

void
BssSimulator::ApOutcome (bool success)
{
  Edcaf& e = m_nodes[kApId].edcaf[kAcCount - 1];
  e.stage = success ? 0 : std::min (e.stage + 1, m_cfg.frames.retryLimit);
  RearmAp ();
}

int
BssSimulator::TopAc (const Node& node) const
{
  for (int k = kAcCount - 1; k >= 0; --k)
    {
      if (!node.edcaf[k].queue.empty ())
        {
          return k;
        }
    }
  return -1;
}

std::vector<NodeId>
BssSimulator::SelectResponders (NodeId exclude, int limit) const
{
  std::vector<Candidate> candidates;
  for (NodeId s : m_top.BssMembers ())
    {
      const Node& node = m_nodes[s];
      if (s == exclude || node.transmitting || node.engaged || node.pendingTx > 0)
        {
          continue;
        }
      const int top = TopAc (node);
      if (top >= 0)
        {
          candidates.push_back ({s, top, static_cast<int> (node.edcaf[top].queue.size ())});
        }
    }
  return RankCandidates (std::move (candidates), limit);
}

bool
BssSimulator::CanRespond (const Node& node, std::uint64_t exchange) const
{
  const bool navClear = m_sched.Now () >= node.nav.expiry || node.navExchange == exchange;
  return !node.transmitting && !node.engaged && node.pendingTx == 0 && node.audible == 0 && navClear;
}

// Frame exchanges.

void
BssSimulator::Transmit (Frame frame)
{
  Node& src = m_nodes[frame.source];
  if (src.transmitting)
    {
      ++m_inv.overlappingOwnTx;
      return;
    }
  const TimeUs now = m_sched.Now ();
  const TimeUs dur = Dur (frame.kind);
  const bool data = frame.kind == FrameKind::kData;
  Record (m_counters, {data ? MetricEvent::kDataAirtime : MetricEvent::kControlAirtime, frame.ac,
                       static_cast<double> (dur), 0});
  src.transmitting = true;
  const TxId id = m_channel.Begin (std::move (frame), now, dur);
  const Frame& f = m_channel.Get (id).frame;
  if (data && f.grant != 0)
    {
      int concurrent = 0;
      for (TxId a : m_channel.Active ())
        {
          const Frame& o = m_channel.Get (a).frame;
          concurrent += o.kind == FrameKind::kData && o.grant == f.grant ? 1 : 0;
        }
      m_inv.maxGrantConcurrency = std::max (m_inv.maxGrantConcurrency, concurrent);
    }
  for (NodeId l : m_top.Listeners (f.source))
    {
      Node& ln = m_nodes[l];
      if (l == kApId && ln.audible == 0)
        {
          ++m_apBusyPeriod;
        }
      ++ln.audible;
      ln.lastSensedStart = now;
      ReEvaluate (ln);
    }
  ReEvaluate (src);
  m_sched.Schedule ({now + dur, 0, EventKind::kTxEnd, f.source, f.ac, 0, id});
}

void
BssSimulator::ScheduleTx (Frame frame, TimeUs at)
{
  Node& node = m_nodes[frame.source];
  ++node.pendingTx;
  const NodeId src = frame.source;
  const int ac = frame.ac;
  m_pending.push_back (std::move (frame));
  m_sched.Schedule ({at, 0, EventKind::kTxStart, src, ac, 0, m_pending.size () - 1});
  ReEvaluate (node);
}

void
BssSimulator::OnTxStart (std::uint64_t index)
{
  Frame f = std::move (m_pending.at (index));
  Node& node = m_nodes[f.source];
  --node.pendingTx;
  if (f.kind == FrameKind::kData)
    {
      Edcaf& e = node.edcaf[f.ac];
      auto it = m_exchanges.find (f.exchange);
      if (e.queue.empty () || it == m_exchanges.end ())
        {
          ReEvaluate (node);
          return;
        }
      Exchange& ex = it->second;
      Packet& p = e.queue.front ();
      f.packetId = p.uid;
      if (ex.trigger || ex.primary != f.source || ex.round > 1)
        {
          p.lastAttempt = m_sched.Now ();
        }
      ++ex.pendingData;
    }
  Transmit (std::move (f));
}

void
BssSimulator::ArmTimeout (NodeId n, TimeUs at)
{
  Node& node = m_nodes[n];
  ++node.timeoutToken;
  m_sched.Schedule ({at, 0, EventKind::kTimeout, n, 0, node.timeoutToken, 0});
}

void
BssSimulator::Disengage (NodeId n)
{
  Node& node = m_nodes[n];
  node.engaged = false;
  node.exchange = 0;
  ++node.timeoutToken;
  ReEvaluate (node);
}

void
BssSimulator::SendData (NodeId n, int ac, Exchange& ex, TimeUs at)
{
  Node& node = m_nodes[n];
  const TimeUs sifs = m_cfg.phy.sifsUs;
  Frame f;
  f.kind = FrameKind::kData;
  f.source = n;
  f.receivers = {kApId};
  f.navEnd = at + Dur (FrameKind::kData) + sifs + Dur (FrameKind::kBlockAck);
  f.ac = ac;
  f.grant = ex.id;
  f.exchange = ex.id;
  f.collisionImmune = node.he;
  node.engaged = true;
  node.exchange = ex.id;
  ex.sent.push_back ({n, ac});
  const TimeUs deadline = f.navEnd + m_cfg.phy.slotUs;
  ScheduleTx (std::move (f), at);
  ArmTimeout (n, deadline);
}

void
BssSimulator::StartSu (NodeId n, int ac)
{
  Node& node = m_nodes[n];
  Exchange& ex = NewExchange ();
  ex.primary = n;
  ex.ac = ac;
  ex.maxRounds = MaxTxopRounds (m_cfg, ac);
  ex.named = {n};
  node.edcaf[ac].queue.front ().lastAttempt = m_sched.Now ();
  node.engaged = true;
  node.exchange = ex.id;

  const TimeUs now = m_sched.Now ();
  const TimeUs sifs = m_cfg.phy.sifsUs;
  Frame f;
  f.kind = FrameKind::kRts;
  f.source = n;
  f.receivers = {kApId};
  f.navEnd = now + Dur (FrameKind::kRts) + Dur (FrameKind::kCts) + Dur (FrameKind::kData)
             + Dur (FrameKind::kBlockAck) + 3 * sifs;
  f.ac = ac;
  f.exchange = ex.id;
  ArmTimeout (n, now + Dur (FrameKind::kRts) + sifs + Dur (FrameKind::kCts) + m_cfg.phy.slotUs);
  Transmit (std::move (f));
}

void
BssSimulator::StartTrigger ()
{
  Exchange& ex = NewExchange ();
  ex.trigger = true;
  ex.primary = kApId;
  ex.ac = kAcCount - 1;
  ex.maxRounds = MaxTriggerRounds (m_cfg);
  Node& ap = m_nodes[kApId];
  ap.engaged = true;
  ap.exchange = ex.id;
  SendTrigger (ex, m_sched.Now ());
}

bool
BssSimulator::SendTrigger (Exchange& ex, TimeUs at)
{
  const auto responders = SelectResponders (kApId, m_cfg.phy.antennas);
  if (responders.empty ())
    {
      return false;
    }
  ex.named = responders;
  ++m_inv.triggers;
  const TimeUs sifs = m_cfg.phy.sifsUs;
  Frame f;
  f.kind = FrameKind::kTrigger;
  f.source = kApId;
  f.receivers = responders;
  f.navEnd = at + Dur (FrameKind::kTrigger) + Dur (FrameKind::kData) + Dur (FrameKind::kMultiBlockAck) + 2 * sifs;
  f.ac = ex.ac;
  f.exchange = ex.id;
  ArmTimeout (kApId, at + Dur (FrameKind::kTrigger) + sifs + Dur (FrameKind::kData) + m_cfg.phy.slotUs);
  if (at == m_sched.Now ())
    {
      Transmit (std::move (f));
    }
  else
    {
      ScheduleTx (std::move (f), at);
    }
  return true;
}

void
BssSimulator::OnTxEnd (TxId id)
{
  const Transmission tx = m_channel.Get (id);
  const TimeUs now = m_sched.Now ();
  m_channel.Finish (id);
  Node& src = m_nodes[tx.Source ()];
  src.transmitting = false;
  const auto& listeners = m_top.Listeners (tx.Source ());
  for (NodeId l : listeners)
    {
      --m_nodes[l].audible;
    }

  const double ber = m_cfg.phy.ber;
  std::vector<Reception> out;
  out.reserve (tx.frame.receivers.size ());
  for (NodeId r : tx.frame.receivers)
    {
      out.push_back (m_channel.Outcome (r, id, ber, m_cfg.frames, m_nodes[r].rxRng));
      if (r == kApId && out.back () == Reception::kCollided)
        {
          CountApCollision (tx.frame.ac);
          if (tx.frame.kind != FrameKind::kRts)
            {
              ++m_inv.nonContentionCollisions;
            }
        }
    }
  if (tx.frame.navEnd > now)
    {
      for (NodeId l : listeners)
        {
          if (Contains (tx.frame.receivers, l))
            {
              continue;
            }
          Node& ln = m_nodes[l];
          if (m_channel.Outcome (l, id, ber, m_cfg.frames, ln.rxRng) == Reception::kReceived)
            {
              ApplyNav (ln, tx.frame);
            }
        }
    }

  switch (tx.frame.kind)
    {
    case FrameKind::kRts: AfterRts (tx, out.at (0)); break;
    case FrameKind::kCts:
    case FrameKind::kGroupCts: AfterCts (tx, out); break;
    case FrameKind::kData: AfterData (tx, out.at (0)); break;
    case FrameKind::kBlockAck:
    case FrameKind::kGroupAck:
    case FrameKind::kMultiBlockAck: AfterAck (tx, out); break;
    case FrameKind::kTrigger: AfterTrigger (tx, out); break;
    }

  ReEvaluate (src);
  for (NodeId l : listeners)
    {
      ReEvaluate (m_nodes[l]);
    }
}

void
BssSimulator::CountApCollision (int ac)
{
  if (m_apCountedPeriod != m_apBusyPeriod)
    {
      m_apCountedPeriod = m_apBusyPeriod;
      Record (m_counters, {MetricEvent::kCollision, -1, 0, 0});
    }
  if (m_apCountedPeriodAc.at (ac) != m_apBusyPeriod)
    {
      m_apCountedPeriodAc[ac] = m_apBusyPeriod;
      Record (m_counters, {MetricEvent::kCollision, ac, 0, 0});
    }
}

void
BssSimulator::AfterRts (const Transmission& tx, Reception atAp)
{
  Node& ap = m_nodes[kApId];
  auto it = m_exchanges.find (tx.frame.exchange);
  if (atAp != Reception::kReceived || ap.transmitting || ap.pendingTx > 0 || it == m_exchanges.end ())
    {
      return;
    }
  Exchange& ex = it->second;
  std::vector<NodeId> secondaries;
  if (m_cfg.phy.antennas > 1)
    {
      secondaries = SelectResponders (ex.primary, m_cfg.phy.antennas - 1);
    }
  ex.grouped = !secondaries.empty ();
  ex.named = {ex.primary};
  ex.named.insert (ex.named.end (), secondaries.begin (), secondaries.end ());
  ap.engaged = true;
  ap.exchange = ex.id;
  if (ex.grouped)
    {
      ++m_inv.groupCts;
    }
  else
    {
      ++m_inv.singleCts;
    }

  const TimeUs sifs = m_cfg.phy.sifsUs;
  const TimeUs at = m_sched.Now () + sifs;
  Frame f;
  f.kind = ex.grouped ? FrameKind::kGroupCts : FrameKind::kCts;
  f.source = kApId;
  f.receivers = ex.named;
  f.navEnd = at + Dur (f.kind) + Dur (FrameKind::kData) + Dur (FrameKind::kBlockAck) + 2 * sifs;
  f.ac = ex.ac;
  f.exchange = ex.id;
  ScheduleTx (std::move (f), at);
  ArmTimeout (kApId, at + Dur (FrameKind::kCts) + sifs + Dur (FrameKind::kData) + m_cfg.phy.slotUs);
}

void
BssSimulator::AfterCts (const Transmission& tx, const std::vector<Reception>& out)
{
  auto it = m_exchanges.find (tx.frame.exchange);
  if (it == m_exchanges.end ())
    {
      return;
    }
  Exchange& ex = it->second;
  ex.sent.clear ();
  const TimeUs at = m_sched.Now () + m_cfg.phy.sifsUs;
  for (std::size_t i = 0; i < out.size (); ++i)
    {
      const NodeId n = tx.frame.receivers[i];
      Node& node = m_nodes[n];
      if (out[i] != Reception::kReceived)
        {
          continue;
        }
      if (n == ex.primary)
        {
          if (node.exchange == ex.id && node.pendingTx == 0 && !node.transmitting)
            {
              SendData (n, ex.ac, ex, at);
            }
          continue;
        }
      const int top = TopAc (node);
      if (top >= 0 && CanRespond (node, ex.id))
        {
          SendData (n, top, ex, at);
        }
    }
}

void
BssSimulator::AfterTrigger (const Transmission& tx, const std::vector<Reception>& out)
{
  auto it = m_exchanges.find (tx.frame.exchange);
  if (it == m_exchanges.end ())
    {
      return;
    }
  Exchange& ex = it->second;
  ex.sent.clear ();
  const TimeUs at = m_sched.Now () + m_cfg.phy.sifsUs;
  for (std::size_t i = 0; i < out.size (); ++i)
    {
      const NodeId n = tx.frame.receivers[i];
      Node& node = m_nodes[n];
      const int top = TopAc (node);
      if (out[i] == Reception::kReceived && top >= 0 && CanRespond (node, ex.id))
        {
          SendData (n, top, ex, at);
        }
    }
}

void
BssSimulator::AfterData (const Transmission& tx, Reception atAp)
{
  auto it = m_exchanges.find (tx.frame.exchange);
  if (it == m_exchanges.end ())
    {
      return;
    }
  Exchange& ex = it->second;
  ex.pendingData = std::max (0, ex.pendingData - 1);
  const NodeId n = tx.Source ();
  if (atAp == Reception::kReceived)
    {
      ex.successes.push_back (n);
      Edcaf& e = m_nodes[n].edcaf[tx.frame.ac];
      if (!e.queue.empty () && e.queue.front ().uid == tx.frame.packetId && !e.queue.front ().receivedByAp)
        {
          e.queue.front ().receivedByAp = true;
          const double bits = 8.0 * m_cfg.frames.mpduOctets;
          Record (m_counters, {MetricEvent::kReceivedBits, tx.frame.ac, bits, 0});
          m_windowBits[tx.frame.ac] += bits;
        }
    }
  if (ex.pendingData > 0)
    {
      return;
    }
  Node& ap = m_nodes[kApId];
  std::vector<NodeId> successes;
  successes.swap (ex.successes);
  if (ap.exchange != ex.id || !ap.engaged)
    {
      return;
    }
  if (successes.empty ())
    {
      Disengage (kApId);
      if (ex.trigger)
        {
          ApOutcome (false);
        }
      return;
    }
  const TimeUs sifs = m_cfg.phy.sifsUs;
  const TimeUs at = m_sched.Now () + sifs;
  Frame f;
  f.kind = ex.trigger ? FrameKind::kMultiBlockAck : (ex.grouped ? FrameKind::kGroupAck : FrameKind::kBlockAck);
  f.source = kApId;
  f.receivers = successes;
  f.acked = successes;
  if (ex.trigger)
    {
      // Ideal buffer knowledge: another round is worthwhile if packets remain beyond this round.
      f.continues = ex.round < ex.maxRounds && m_queuedTotal > static_cast<std::int64_t> (successes.size ());
      f.navEnd = at + Dur (f.kind)
                 + (f.continues ? 3 * sifs + Dur (FrameKind::kTrigger) + Dur (FrameKind::kData) + Dur (f.kind) : 0);
    }
  else
    {
      const bool primaryOk = Contains (successes, ex.primary);
      f.continues = primaryOk && ex.round < ex.maxRounds && m_nodes[ex.primary].edcaf[ex.ac].queue.size () > 1;
      f.navEnd = at + Dur (f.kind) + (f.continues ? 2 * sifs + Dur (FrameKind::kData) + Dur (f.kind) : 0);
    }
  f.ac = ex.ac;
  f.exchange = ex.id;
  ++ap.timeoutToken;
  ScheduleTx (std::move (f), at);
}

void
BssSimulator::AfterAck (const Transmission& tx, const std::vector<Reception>& out)
{
  auto it = m_exchanges.find (tx.frame.exchange);
  if (it == m_exchanges.end ())
    {
      return;
    }
  Exchange& ex = it->second;
  const bool continues = tx.frame.continues && !ex.trigger;
  const TimeUs sifs = m_cfg.phy.sifsUs;
  const TimeUs at = m_sched.Now () + sifs;
  if (continues)
    {
      ++ex.round;
      ArmTimeout (kApId, at + Dur (FrameKind::kData) + m_cfg.phy.slotUs);
    }
  else if (!ex.trigger)
    {
      Disengage (kApId);
    }
  std::vector<std::pair<NodeId, int>> next;
  for (std::size_t i = 0; i < out.size (); ++i)
    {
      const NodeId n = tx.frame.receivers[i];
      Node& node = m_nodes[n];
      if (node.exchange != ex.id || out[i] != Reception::kReceived)
        {
          continue;
        }
      int ac = -1;
      for (const auto& [who, sentAc] : ex.sent)
        {
          if (who == n)
            {
              ac = sentAc;
            }
        }
      if (ac < 0)
        {
          continue;
        }
      Deliver (n, ac);
      ++node.timeoutToken;
      const int top = n == ex.primary ? (node.edcaf[ex.ac].queue.empty () ? -1 : ex.ac) : TopAc (node);
      if (continues && top >= 0)
        {
          next.push_back ({n, top});
        }
      else
        {
          Disengage (n);
        }
    }
  ex.sent.clear ();
  for (const auto& [n, ac] : next)
    {
      SendData (n, ac, ex, at);
    }
  if (ex.trigger)
    {
      ++ex.round;
      if (!tx.frame.continues || !SendTrigger (ex, at))
        {
          Disengage (kApId);
          ApOutcome (true);
        }
    }
}

void
BssSimulator::OnTimeout (NodeId n, std::uint64_t token)
{
  Node& node = m_nodes[n];
  if (token != node.timeoutToken)
    {
      return;
    }
  const auto it = m_exchanges.find (node.exchange);
  Disengage (n);
  if (it == m_exchanges.end ())
    {
      return;
    }
  const Exchange& ex = it->second;
  if (n == kApId)
    {
      if (ex.trigger)
        {
          ApOutcome (false);
        }
      return;
    }
  if (!ex.trigger && ex.primary == n)
    {
      Retry (n, ex.ac);
    }
}

void
BssSimulator::OnShareUpdate ()
{
  double total = 0.0;
  for (double b : m_windowBits)
    {
      total += b;
    }
  if (total > 0.0)
    {
      m_fmu = 1.0 - m_windowBits[kAcCount - 1] / total;
    }
  m_windowBits.fill (0.0);
  m_sched.Schedule ({m_sched.Now () + m_cfg.shareUpdateUs, 0, EventKind::kSlotTick, kApId, 0, 0, 0});
}

RunCounters
RunSimulation (const SimConfig& cfg, const Topology& topology, std::uint64_t seed, std::ostream* trace,
               InvariantCounters* invariants)
{
  BssSimulator sim (cfg, topology, seed);
  sim.SetTrace (trace);
  RunCounters c = sim.Run ();
  if (invariants != nullptr)
    {
      *invariants = sim.Invariants ();
    }
  return c;
}

} // namespace hexsim
