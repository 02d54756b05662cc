#ifndef HEXSIM_METRICS_H
#define HEXSIM_METRICS_H

#include "hexsim/params.h"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hexsim {

struct AcCounters
{
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  /// Packets still queued (including in flight) when the run stopped.
  std::int64_t queued = 0;
  std::int64_t collisions = 0;
  double backoffSumUs = 0.0;
  double waitingSumUs = 0.0;
  /// Distinct payload bits received by the AP.
  double receivedBits = 0.0;
};

/// Raw per-run accumulators filled by the MAC.
struct RunCounters
{
  std::array<AcCounters, kAcCount> ac {};
  /// Collided reception windows at the AP, counted once per busy period.
  std::int64_t collisions = 0;
  double controlAirtimeUs = 0.0;
  double dataAirtimeUs = 0.0;
  double durationS = 0.0;
  double hiddenPerSta = 0.0;
  std::uint64_t events = 0;
};

enum class MetricEvent {
  kArrival,
  kDelivered,   ///< a = backoff us, b = waiting us
  kDropped,
  kCollision,   ///< ac < 0 for the run-level counter
  kReceivedBits,///< a = bits
  kControlAirtime,
  kDataAirtime, ///< a = us
};

struct MetricRecord
{
  MetricEvent kind = MetricEvent::kArrival;
  int ac = 0;
  double a = 0.0;
  double b = 0.0;
};

void Record (RunCounters& counters, const MetricRecord& record);

/// One CSV row worth of metrics.
struct MetricRow
{
  double backoffUs = 0.0;
  double waitingUs = 0.0;
  /// Per run-second.
  double collisions = 0.0;
  double dropRatio = 0.0;
  double throughputMbps = 0.0;
  double overheadRatio = 0.0;
  double hiddenPerSta = 0.0;
  /// Set when no data airtime existed and the overhead ratio was forced to 0.
  bool overheadUndefined = false;
};

/// Rows 0..3 are the access categories, row 4 aggregates the run.
inline constexpr int kAllRow = kAcCount;
using RowSet = std::array<MetricRow, kAcCount + 1>;

RowSet RowsFor (const RunCounters& counters);

struct MetricsSummary
{
  RowSet mean {};
  RowSet stddev {};
  int runs = 0;
};

/// Mean and sample standard deviation across runs. Throws on empty input.
MetricsSummary Summarize (const std::vector<RunCounters>& runs);

/// Column order is fixed; consumers depend on it.
inline constexpr const char* kCsvHeader =
    "scenario,arrival_rate_pps,csth_assoc_dbm,run,ac,backoff_us,waiting_us,collisions,drop_ratio,"
    "throughput_mbps,overhead_ratio,hidden_per_sta";

struct CsvKey
{
  std::string scenario;
  double arrivalRatePps = 0.0;
  double csthAssocDbm = 0.0;
  /// Run index, or "mean" when negative.
  int run = 0;
};

void WriteCsvRows (std::ostream& out, const CsvKey& key, const RowSet& rows);

/// Shortest round-trip decimal form, stable across platforms.
std::string FormatNumber (double v);

} // namespace hexsim

#endif /* HEXSIM_METRICS_H */
