#include "hexsim/metrics.h"

#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hexsim {

void
Record (RunCounters& c, const MetricRecord& r)
{
  const bool perAc = r.ac >= 0 && r.ac < kAcCount;
  switch (r.kind)
    {
    case MetricEvent::kArrival:
      ++c.ac.at (r.ac).arrivals;
      break;
    case MetricEvent::kDelivered:
      {
        auto& a = c.ac.at (r.ac);
        ++a.delivered;
        a.backoffSumUs += r.a;
        a.waitingSumUs += r.b;
        break;
      }
    case MetricEvent::kDropped:
      ++c.ac.at (r.ac).dropped;
      break;
    case MetricEvent::kCollision:
      if (perAc)
        {
          ++c.ac[r.ac].collisions;
        }
      else
        {
          ++c.collisions;
        }
      break;
    case MetricEvent::kReceivedBits:
      c.ac.at (r.ac).receivedBits += r.a;
      break;
    case MetricEvent::kControlAirtime:
      c.controlAirtimeUs += r.a;
      break;
    case MetricEvent::kDataAirtime:
      c.dataAirtimeUs += r.a;
      break;
    }
}

namespace {

MetricRow
MakeRow (double delivered, double dropped, double backoff, double waiting, double collisions, double bits,
         const RunCounters& c)
{
  MetricRow row;
  row.backoffUs = delivered > 0 ? backoff / delivered : 0.0;
  row.waitingUs = delivered > 0 ? waiting / delivered : 0.0;
  row.dropRatio = delivered + dropped > 0 ? dropped / (delivered + dropped) : 0.0;
  const double duration = c.durationS > 0 ? c.durationS : 1.0;
  row.collisions = collisions / duration;
  row.throughputMbps = bits / duration / 1e6;
  if (c.dataAirtimeUs > 0)
    {
      row.overheadRatio = c.controlAirtimeUs / c.dataAirtimeUs;
    }
  else
    {
      row.overheadUndefined = true;
    }
  row.hiddenPerSta = c.hiddenPerSta;
  return row;
}

} // namespace

RowSet
RowsFor (const RunCounters& c)
{
  RowSet rows {};
  double delivered = 0, dropped = 0, backoff = 0, waiting = 0, bits = 0;
  for (int k = 0; k < kAcCount; ++k)
    {
      const auto& a = c.ac[k];
      rows[k] = MakeRow (a.delivered, a.dropped, a.backoffSumUs, a.waitingSumUs, a.collisions, a.receivedBits, c);
      delivered += a.delivered;
      dropped += a.dropped;
      backoff += a.backoffSumUs;
      waiting += a.waitingSumUs;
      bits += a.receivedBits;
    }
  rows[kAllRow] = MakeRow (delivered, dropped, backoff, waiting, c.collisions, bits, c);
  return rows;
}

MetricsSummary
Summarize (const std::vector<RunCounters>& runs)
{
  if (runs.empty ())
    {
      throw std::invalid_argument ("summarize needs at least one run");
    }
  std::vector<RowSet> all;
  all.reserve (runs.size ());
  for (const auto& r : runs)
    {
      all.push_back (RowsFor (r));
    }
  constexpr double MetricRow::*fields[] = {
      &MetricRow::backoffUs,      &MetricRow::waitingUs,     &MetricRow::collisions,   &MetricRow::dropRatio,
      &MetricRow::throughputMbps, &MetricRow::overheadRatio, &MetricRow::hiddenPerSta,
  };
  MetricsSummary s;
  s.runs = static_cast<int> (runs.size ());
  const double n = s.runs;
  for (std::size_t row = 0; row < s.mean.size (); ++row)
    {
      for (auto f : fields)
        {
          double sum = 0.0;
          for (const auto& rs : all)
            {
              sum += rs[row].*f;
            }
          const double mean = sum / n;
          double sq = 0.0;
          for (const auto& rs : all)
            {
              sq += (rs[row].*f - mean) * (rs[row].*f - mean);
            }
          s.mean[row].*f = mean;
          s.stddev[row].*f = n > 1 ? std::sqrt (sq / (n - 1)) : 0.0;
        }
      bool undefined = true;
      for (const auto& rs : all)
        {
          undefined = undefined && rs[row].overheadUndefined;
        }
      s.mean[row].overheadUndefined = undefined;
    }
  return s;
}

std::string
FormatNumber (double v)
{
  if (v == 0.0)
    {
      return "0";
    }
  char buf[64];
  auto res = std::to_chars (buf, buf + sizeof buf, v);
  return std::string (buf, res.ptr);
}

void
WriteCsvRows (std::ostream& out, const CsvKey& key, const RowSet& rows)
{
  const std::string run = key.run < 0 ? "mean" : std::to_string (key.run);
  for (std::size_t i = 0; i < rows.size (); ++i)
    {
      const auto& r = rows[i];
      out << key.scenario << ',' << FormatNumber (key.arrivalRatePps) << ',' << FormatNumber (key.csthAssocDbm) << ','
          << run << ',' << (i == kAllRow ? std::string ("all") : std::to_string (i)) << ','
          << FormatNumber (r.backoffUs) << ',' << FormatNumber (r.waitingUs) << ',' << FormatNumber (r.collisions)
          << ',' << FormatNumber (r.dropRatio) << ',' << FormatNumber (r.throughputMbps) << ','
          << FormatNumber (r.overheadRatio) << ',' << FormatNumber (r.hiddenPerSta) << '\n';
    }
}

} // namespace hexsim
