#include "hexsim/engine.h"

#include <algorithm>
#include <cmath>

namespace hexsim {

const char*
ToString (EventKind kind)
{
  switch (kind)
    {
    case EventKind::kArrival: return "arrival";
    case EventKind::kAifsExpiry: return "aifs-expiry";
    case EventKind::kSlotTick: return "slot-tick";
    case EventKind::kTxStart: return "tx-start";
    case EventKind::kTxEnd: return "tx-end";
    case EventKind::kTimeout: return "timeout";
    case EventKind::kNavExpiry: return "nav-expiry";
    }
  return "?";
}

const char*
ToString (Reception r)
{
  switch (r)
    {
    case Reception::kReceived: return "received";
    case Reception::kCollided: return "collided";
    case Reception::kCorrupted: return "corrupted";
    }
  return "?";
}

std::uint64_t
Scheduler::Schedule (Event event)
{
  if (event.time < m_now)
    {
      throw SchedulingError ("event scheduled in the past");
    }
  event.sequence = m_nextSequence++;
  m_queue.push (event);
  return event.sequence;
}

bool
Interferes (NodeId receiver, const Transmission& tx, const Transmission& other, const Topology& topology)
{
  if (other.id == tx.id || !other.Overlaps (tx))
    {
      return false;
    }
  if (other.Source () == receiver)
    {
      return true;
    }
  if (!topology.Hears (receiver, other.Source ()))
    {
      return false;
    }
  if (tx.frame.collisionImmune)
    {
      return false;
    }
  const bool parallelUplink = tx.frame.kind == FrameKind::kData && other.frame.kind == FrameKind::kData
                              && tx.frame.grant != 0 && tx.frame.grant == other.frame.grant;
  return !parallelUplink;
}

Reception
ReceptionOutcome (NodeId receiver, const Transmission& tx, std::span<const Transmission* const> concurrent,
                  const Topology& topology, double ber, const FrameSizes& sizes, Rng& rng)
{
  if (!topology.Hears (receiver, tx.Source ()))
    {
      throw std::logic_error ("reception evaluated at a node that cannot hear the source");
    }
  for (const Transmission* other : concurrent)
    {
      if (Interferes (receiver, tx, *other, topology))
        {
          return Reception::kCollided;
        }
    }
  const double bits = 8.0 * FrameOctets (tx.frame.kind, sizes);
  const double survive = std::pow (1.0 - ber, bits);
  return rng.Bernoulli (survive) ? Reception::kReceived : Reception::kCorrupted;
}

TxId
Channel::Begin (Frame frame, TimeUs start, TimeUs duration)
{
  Transmission tx;
  tx.id = m_log.size ();
  tx.frame = std::move (frame);
  tx.start = start;
  tx.end = start + duration;
  for (TxId other : m_active)
    {
      tx.overlaps.push_back (other);
      m_log[other].overlaps.push_back (tx.id);
    }
  m_active.push_back (tx.id);
  m_log.push_back (std::move (tx));
  return m_log.back ().id;
}

void
Channel::Finish (TxId id)
{
  auto it = std::find (m_active.begin (), m_active.end (), id);
  if (it != m_active.end ())
    {
      m_active.erase (it);
    }
}

std::vector<const Transmission*>
Channel::Concurrent (TxId id) const
{
  std::vector<const Transmission*> out;
  for (TxId o : m_log.at (id).overlaps)
    {
      out.push_back (&m_log[o]);
    }
  return out;
}

bool
Channel::CollidedAt (NodeId receiver, TxId id) const
{
  const Transmission& tx = m_log.at (id);
  for (TxId o : tx.overlaps)
    {
      if (Interferes (receiver, tx, m_log[o], *m_topology))
        {
          return true;
        }
    }
  return false;
}

Reception
Channel::Outcome (NodeId receiver, TxId id, double ber, const FrameSizes& sizes, Rng& rng) const
{
  const auto concurrent = Concurrent (id);
  return ReceptionOutcome (receiver, m_log.at (id), concurrent, *m_topology, ber, sizes, rng);
}

} // namespace hexsim
