#ifndef HEXSIM_ENGINE_H
#define HEXSIM_ENGINE_H

#include "hexsim/geometry.h"
#include "hexsim/params.h"
#include "hexsim/rng.h"

#include <cstdint>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

namespace hexsim {

enum class EventKind {
  kArrival,
  kAifsExpiry,
  kSlotTick,
  kTxStart,
  kTxEnd,
  kTimeout,
  kNavExpiry,
};

const char* ToString (EventKind kind);

struct Event
{
  TimeUs time = 0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::kSlotTick;
  NodeId node = 0;
  int ac = 0;
  /// Matched against the owner's current token; stale events are dropped.
  std::uint64_t token = 0;
  std::uint64_t aux = 0;
};

class SchedulingError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Event queue ordered by (time, sequence). The clock never runs backwards.
class Scheduler
{
public:
  TimeUs Now () const { return m_now; }
  bool Empty () const { return m_queue.empty (); }
  std::size_t Pending () const { return m_queue.size (); }

  std::uint64_t Schedule (Event event);

  /// Dispatches every event with time <= end, then parks the clock at end.
  template <typename Handler>
  std::uint64_t RunUntil (TimeUs end, Handler&& handler)
  {
    if (end < m_now)
      {
        throw SchedulingError ("run_until target lies in the past");
      }
    std::uint64_t count = 0;
    while (!m_queue.empty () && m_queue.top ().time <= end)
      {
        Event ev = m_queue.top ();
        m_queue.pop ();
        m_now = ev.time;
        handler (ev);
        ++count;
      }
    m_now = end;
    return count;
  }

private:
  struct Later
  {
    bool operator() (const Event& a, const Event& b) const
    {
      return a.time != b.time ? a.time > b.time : a.sequence > b.sequence;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> m_queue;
  TimeUs m_now = 0;
  std::uint64_t m_nextSequence = 0;
};

using TxId = std::uint64_t;

/// MAC frame as seen on the air.
struct Frame
{
  FrameKind kind = FrameKind::kRts;
  NodeId source = 0;
  std::vector<NodeId> receivers;
  /// Absolute time up to which overhearing nodes defer.
  TimeUs navEnd = 0;
  int bss = 0;
  int ac = 0;
  /// Shared by all uplink data PPDUs solicited by one G-CTS or trigger.
  std::uint64_t grant = 0;
  std::uint64_t packetId = 0;
  /// Exchange this frame belongs to; 0 for none.
  std::uint64_t exchange = 0;
  /// HE uplink data never collides at the AP.
  bool collisionImmune = false;
  /// Acknowledgements: STAs whose data was received.
  std::vector<NodeId> acked;
  /// Acknowledgements: whether the TXOP continues with another round.
  bool continues = false;
};

struct Transmission
{
  TxId id = 0;
  Frame frame;
  TimeUs start = 0;
  TimeUs end = 0;
  /// Transmissions that were on the air at some point during this one.
  std::vector<TxId> overlaps;

  NodeId Source () const { return frame.source; }
  bool Overlaps (const Transmission& o) const { return o.start < end && start < o.end; }
};

enum class Reception { kReceived, kCollided, kCorrupted };

const char* ToString (Reception r);

/**
 * Receiver-centric outcome: any overlapping transmission audible at the
 * receiver (or sent by it) destroys the frame, except parallel uplink data
 * under one grant. Otherwise each bit survives with probability 1 - ber.
 */
Reception ReceptionOutcome (NodeId receiver, const Transmission& tx, std::span<const Transmission* const> concurrent,
                            const Topology& topology, double ber, const FrameSizes& sizes, Rng& rng);

/// True when `other` destroys `tx` at `receiver`.
bool Interferes (NodeId receiver, const Transmission& tx, const Transmission& other, const Topology& topology);

/// Bookkeeping for transmissions on the shared medium.
class Channel
{
public:
  explicit Channel (const Topology& topology)
    : m_topology (&topology)
  {
  }

  TxId Begin (Frame frame, TimeUs start, TimeUs duration);
  void Finish (TxId id);

  const Transmission& Get (TxId id) const { return m_log.at (id); }
  const std::vector<TxId>& Active () const { return m_active; }
  std::vector<const Transmission*> Concurrent (TxId id) const;

  /// Whether any overlapping transmission destroys `id` at `receiver`.
  bool CollidedAt (NodeId receiver, TxId id) const;
  Reception Outcome (NodeId receiver, TxId id, double ber, const FrameSizes& sizes, Rng& rng) const;

private:
  const Topology* m_topology;
  std::vector<Transmission> m_log;
  std::vector<TxId> m_active;
};

} // namespace hexsim

#endif /* HEXSIM_ENGINE_H */
