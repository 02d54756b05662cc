#include "hexsim/params.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace hexsim {

namespace {

std::string
FormatDouble (double v)
{
  char buf[64];
  auto res = std::to_chars (buf, buf + sizeof buf, v);
  return std::string (buf, res.ptr);
}

std::string
Trim (const std::string& s)
{
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of (ws);
  if (b == std::string::npos)
    {
      return {};
    }
  auto e = s.find_last_not_of (ws);
  return s.substr (b, e - b + 1);
}

double
ParseDouble (const std::string& key, const std::string& v)
{
  double out = 0.0;
  auto res = std::from_chars (v.data (), v.data () + v.size (), out);
  if (res.ec != std::errc () || res.ptr != v.data () + v.size ())
    {
      throw ConfigError ("bad number for " + key + ": '" + v + "'");
    }
  return out;
}

long long
ParseInt (const std::string& key, const std::string& v)
{
  long long out = 0;
  auto res = std::from_chars (v.data (), v.data () + v.size (), out);
  if (res.ec != std::errc () || res.ptr != v.data () + v.size ())
    {
      throw ConfigError ("bad integer for " + key + ": '" + v + "'");
    }
  return out;
}

bool
ParseBool (const std::string& key, const std::string& v)
{
  if (v == "true" || v == "1")
    {
      return true;
    }
  if (v == "false" || v == "0")
    {
      return false;
    }
  throw ConfigError ("bad boolean for " + key + ": '" + v + "'");
}

struct KeyBinding
{
  std::string name;
  std::function<std::string (const SimConfig&)> get;
  std::function<void (SimConfig&, const std::string&)> set;
};

template <typename Ref>
KeyBinding
IntegerKey (const std::string& name, Ref ref)
{
  return {name,
          [ref] (const SimConfig& c) { return std::to_string (ref (const_cast<SimConfig&> (c))); },
          [ref, name] (SimConfig& c, const std::string& v) {
            auto& field = ref (c);
            field = static_cast<std::remove_reference_t<decltype (field)>> (ParseInt (name, v));
          }};
}

template <typename Ref>
KeyBinding
DoubleKey (const std::string& name, Ref ref)
{
  return {name,
          [ref] (const SimConfig& c) { return FormatDouble (ref (const_cast<SimConfig&> (c))); },
          [ref, name] (SimConfig& c, const std::string& v) { ref (c) = ParseDouble (name, v); }};
}

template <typename Ref>
KeyBinding
BoolKey (const std::string& name, Ref ref)
{
  return {name,
          [ref] (const SimConfig& c) { return std::string (ref (const_cast<SimConfig&> (c)) ? "true" : "false"); },
          [ref, name] (SimConfig& c, const std::string& v) { ref (c) = ParseBool (name, v); }};
}

template <typename E, typename Ref>
KeyBinding
EnumKey (const std::string& name, Ref ref, std::vector<std::pair<E, std::string>> names)
{
  return {name,
          [ref, names] (const SimConfig& c) {
            E value = ref (const_cast<SimConfig&> (c));
            for (const auto& [e, s] : names)
              {
                if (e == value)
                  {
                    return s;
                  }
              }
            return std::string ("?");
          },
          [ref, names, name] (SimConfig& c, const std::string& v) {
            for (const auto& [e, s] : names)
              {
                if (s == v)
                  {
                    ref (c) = e;
                    return;
                  }
              }
            throw ConfigError ("bad value for " + name + ": '" + v + "'");
          }};
}

const std::vector<KeyBinding>&
Bindings ()
{
  static const std::vector<KeyBinding> bindings = [] {
    std::vector<KeyBinding> b;
    b.push_back (IntegerKey ("phy.slot_us", [] (SimConfig& c) -> auto& { return c.phy.slotUs; }));
    b.push_back (IntegerKey ("phy.sifs_us", [] (SimConfig& c) -> auto& { return c.phy.sifsUs; }));
    b.push_back (IntegerKey ("phy.difs_us", [] (SimConfig& c) -> auto& { return c.phy.difsUs; }));
    b.push_back (IntegerKey ("phy.phy_header_min_us", [] (SimConfig& c) -> auto& { return c.phy.phyHeaderMinUs; }));
    b.push_back (IntegerKey ("phy.phy_header_max_us", [] (SimConfig& c) -> auto& { return c.phy.phyHeaderMaxUs; }));
    b.push_back (IntegerKey ("phy.ofdm_symbol_us", [] (SimConfig& c) -> auto& { return c.phy.ofdmSymbolUs; }));
    b.push_back (IntegerKey ("phy.bits_per_symbol", [] (SimConfig& c) -> auto& { return c.phy.bitsPerSymbol; }));
    b.push_back (DoubleKey ("phy.bandwidth_mhz", [] (SimConfig& c) -> auto& { return c.phy.bandwidthMhz; }));
    b.push_back (IntegerKey ("phy.subcarriers", [] (SimConfig& c) -> auto& { return c.phy.subcarriers; }));
    b.push_back (DoubleKey ("phy.ber", [] (SimConfig& c) -> auto& { return c.phy.ber; }));
    b.push_back (DoubleKey ("phy.tx_power_dbm", [] (SimConfig& c) -> auto& { return c.phy.txPowerDbm; }));
    b.push_back (DoubleKey ("phy.csth_operational_dbm", [] (SimConfig& c) -> auto& { return c.phy.csthOperationalDbm; }));
    b.push_back (DoubleKey ("phy.csth_association_dbm", [] (SimConfig& c) -> auto& { return c.phy.csthAssociationDbm; }));
    b.push_back (IntegerKey ("phy.m_ant", [] (SimConfig& c) -> auto& { return c.phy.antennas; }));
    for (int k = 0; k < kAcCount; ++k)
      {
        std::string p = "ac" + std::to_string (k) + ".";
        b.push_back (IntegerKey (p + "aifsn", [k] (SimConfig& c) -> auto& { return c.ac[k].aifsn; }));
        b.push_back (IntegerKey (p + "cw_min_states", [k] (SimConfig& c) -> auto& { return c.ac[k].cwMinStates; }));
        b.push_back (IntegerKey (p + "max_backoff_stage", [k] (SimConfig& c) -> auto& { return c.ac[k].maxBackoffStage; }));
        b.push_back (IntegerKey (p + "txop_limit_us", [k] (SimConfig& c) -> auto& { return c.ac[k].txopLimitUs; }));
        b.push_back (DoubleKey (p + "arrival_rate_pps", [k] (SimConfig& c) -> auto& { return c.ac[k].arrivalRate; }));
      }
    b.push_back (IntegerKey ("frames.mpdu_octets", [] (SimConfig& c) -> auto& { return c.frames.mpduOctets; }));
    b.push_back (IntegerKey ("frames.mac_header_octets", [] (SimConfig& c) -> auto& { return c.frames.macHeaderOctets; }));
    b.push_back (IntegerKey ("frames.rts_octets", [] (SimConfig& c) -> auto& { return c.frames.rtsOctets; }));
    b.push_back (IntegerKey ("frames.cts_octets", [] (SimConfig& c) -> auto& { return c.frames.ctsOctets; }));
    b.push_back (IntegerKey ("frames.ack_octets", [] (SimConfig& c) -> auto& { return c.frames.ackOctets; }));
    b.push_back (IntegerKey ("frames.trigger_octets", [] (SimConfig& c) -> auto& { return c.frames.triggerOctets; }));
    b.push_back (IntegerKey ("frames.retry_limit", [] (SimConfig& c) -> auto& { return c.frames.retryLimit; }));
    b.push_back (DoubleKey ("pathloss.exponent", [] (SimConfig& c) -> auto& { return c.pathloss.exponent; }));
    b.push_back (DoubleKey ("pathloss.wall_db_per_m", [] (SimConfig& c) -> auto& { return c.pathloss.wallDbPerM; }));
    b.push_back (DoubleKey ("pathloss.shadowing_sigma_db", [] (SimConfig& c) -> auto& { return c.pathloss.shadowingSigmaDb; }));
    b.push_back (DoubleKey ("pathloss.reference_loss_db", [] (SimConfig& c) -> auto& { return c.pathloss.referenceLossDb; }));
    b.push_back (DoubleKey ("pathloss.frequency_ghz", [] (SimConfig& c) -> auto& { return c.pathloss.frequencyGhz; }));
    b.push_back (DoubleKey ("analytic.damping", [] (SimConfig& c) -> auto& { return c.analytic.damping; }));
    b.push_back (DoubleKey ("analytic.tolerance", [] (SimConfig& c) -> auto& { return c.analytic.tolerance; }));
    b.push_back (IntegerKey ("analytic.max_iterations", [] (SimConfig& c) -> auto& { return c.analytic.maxIterations; }));
    b.push_back (EnumKey<HiddenForm> ("analytic.hidden_form", [] (SimConfig& c) -> auto& { return c.analytic.hiddenForm; },
                                      {{HiddenForm::kProduct, "product"}, {HiddenForm::kLiteral, "literal"}}));
    b.push_back (EnumKey<IdleForm> ("analytic.idle_form", [] (SimConfig& c) -> auto& { return c.analytic.idleForm; },
                                    {{IdleForm::kPerClass, "per-class"}, {IdleForm::kLiteral, "literal"}}));
    b.push_back (IntegerKey ("sim.sta_count", [] (SimConfig& c) -> auto& { return c.staCount; }));
    b.push_back (DoubleKey ("sim.run_duration_s", [] (SimConfig& c) -> auto& { return c.runDurationS; }));
    b.push_back (IntegerKey ("sim.run_count", [] (SimConfig& c) -> auto& { return c.runCount; }));
    b.push_back (IntegerKey ("sim.seed", [] (SimConfig& c) -> auto& { return c.seed; }));
    b.push_back (EnumKey<NavPolicy> ("sim.nav_policy", [] (SimConfig& c) -> auto& { return c.navPolicy; },
                                     {{NavPolicy::kIntraBssOnly, "intra-bss-only"}, {NavPolicy::kLegacy, "legacy"}}));
    b.push_back (EnumKey<TopologyMode> ("sim.topology_mode", [] (SimConfig& c) -> auto& { return c.topologyMode; },
                                        {{TopologyMode::kRandomWithHidden, "random-with-hidden"},
                                         {TopologyMode::kCompleteGraph, "complete-graph"}}));
    b.push_back (BoolKey ("sim.cw_plus_one", [] (SimConfig& c) -> auto& { return c.cwPlusOne; }));
    b.push_back (BoolKey ("sim.per_sta_rates", [] (SimConfig& c) -> auto& { return c.perStaRates; }));
    b.push_back (DoubleKey ("geometry.placement_radius_m", [] (SimConfig& c) -> auto& { return c.placementRadiusM; }));
    b.push_back (EnumKey<Placement> ("geometry.placement", [] (SimConfig& c) -> auto& { return c.placement; },
                                     {{Placement::kPolar, "polar"}, {Placement::kArea, "area"}}));
    b.push_back (DoubleKey ("mac.he_fraction", [] (SimConfig& c) -> auto& { return c.heFraction; }));
    b.push_back (BoolKey ("mac.ap_triggers", [] (SimConfig& c) -> auto& { return c.apTriggers; }));
    b.push_back (IntegerKey ("mac.share_update_us", [] (SimConfig& c) -> auto& { return c.shareUpdateUs; }));
    return b;
  }();
  return bindings;
}

bool
IsPowerOfTwo (int v)
{
  return v > 0 && (v & (v - 1)) == 0;
}

} // namespace

const char*
ToString (FrameKind kind)
{
  switch (kind)
    {
    case FrameKind::kRts: return "RTS";
    case FrameKind::kCts: return "CTS";
    case FrameKind::kGroupCts: return "G-CTS";
    case FrameKind::kData: return "DATA";
    case FrameKind::kBlockAck: return "BA";
    case FrameKind::kGroupAck: return "G-ACK";
    case FrameKind::kTrigger: return "TRIGGER";
    case FrameKind::kMultiBlockAck: return "M-BA";
    }
  return "?";
}

bool
IsControl (FrameKind kind)
{
  return kind != FrameKind::kData;
}

SimConfig
DefaultConfig ()
{
  SimConfig cfg;
  const std::array<int, kAcCount> aifsn {7, 5, 3, 2};
  const std::array<int, kAcCount> cw {32, 32, 16, 8};
  const std::array<int, kAcCount> stages {5, 5, 1, 1};
  const std::array<TimeUs, kAcCount> txop {0, 0, 1504, 1504};
  for (int k = 0; k < kAcCount; ++k)
    {
      cfg.ac[k].aifsn = aifsn[k];
      cfg.ac[k].cwMinStates = cw[k];
      cfg.ac[k].maxBackoffStage = stages[k];
      cfg.ac[k].txopLimitUs = txop[k];
      // 4800 packets/s network wide, split evenly over the four categories.
      cfg.ac[k].arrivalRate = 1200.0;
    }
  return cfg;
}

int
FrameOctets (FrameKind kind, const FrameSizes& sizes)
{
  switch (kind)
    {
    case FrameKind::kRts: return sizes.rtsOctets;
    case FrameKind::kCts:
    case FrameKind::kGroupCts: return sizes.ctsOctets;
    case FrameKind::kData: return sizes.mpduOctets;
    case FrameKind::kBlockAck:
    case FrameKind::kGroupAck:
    case FrameKind::kMultiBlockAck: return sizes.ackOctets;
    case FrameKind::kTrigger: return sizes.triggerOctets;
    }
  throw ConfigError ("unknown frame kind " + std::to_string (static_cast<int> (kind)));
}

TimeUs
FrameDurationUs (FrameKind kind, const FrameSizes& sizes, const PhyParams& phy)
{
  const long long bits = 8LL * FrameOctets (kind, sizes);
  const long long symbols = (bits + phy.bitsPerSymbol - 1) / phy.bitsPerSymbol;
  const TimeUs header = kind == FrameKind::kData ? phy.phyHeaderMaxUs : phy.phyHeaderMinUs;
  return header + symbols * phy.ofdmSymbolUs;
}

TimeUs
AifsUs (const SimConfig& cfg, int ac)
{
  return cfg.phy.sifsUs + cfg.ac.at (ac).aifsn * cfg.phy.slotUs;
}

int
BaseWindow (const SimConfig& cfg, int ac)
{
  return cfg.ac.at (ac).cwMinStates + (cfg.cwPlusOne ? 1 : 0);
}

int
WindowSize (int ac, int stage, const SimConfig& cfg)
{
  if (stage < 0 || stage > cfg.frames.retryLimit)
    {
      throw ConfigError ("backoff stage " + std::to_string (stage) + " outside [0, R]");
    }
  const int capped = std::min (stage, cfg.ac.at (ac).maxBackoffStage);
  return BaseWindow (cfg, ac) << capped;
}

std::vector<std::string>
ValidateConfig (const SimConfig& cfg)
{
  std::vector<std::string> v;
  for (int k = 0; k < kAcCount; ++k)
    {
      const auto& a = cfg.ac[k];
      const std::string p = "ac" + std::to_string (k) + ".";
      if (a.aifsn < 2)
        {
          v.push_back (p + "aifsn below 2");
        }
      if (a.cwMinStates < 2 || !IsPowerOfTwo (a.cwMinStates))
        {
          v.push_back (p + "cw_min_states not a power of two >= 2");
        }
      if (a.maxBackoffStage < 0)
        {
          v.push_back (p + "max_backoff_stage negative");
        }
      if (a.txopLimitUs < 0)
        {
          v.push_back (p + "txop_limit_us negative");
        }
      if (!(a.arrivalRate >= 0.0))
        {
          v.push_back (p + "arrival_rate_pps negative");
        }
    }
  const auto& phy = cfg.phy;
  if (phy.slotUs <= 0)
    {
      v.push_back ("phy.slot_us not positive");
    }
  if (!(phy.sifsUs < phy.difsUs))
    {
      v.push_back ("phy.sifs_us not below phy.difs_us");
    }
  if (phy.bitsPerSymbol <= 0)
    {
      v.push_back ("phy.bits_per_symbol not positive");
    }
  if (phy.ofdmSymbolUs <= 0)
    {
      v.push_back ("phy.ofdm_symbol_us not positive");
    }
  if (phy.phyHeaderMinUs <= 0 || phy.phyHeaderMaxUs < phy.phyHeaderMinUs)
    {
      v.push_back ("phy header durations inconsistent");
    }
  if (!(phy.ber >= 0.0 && phy.ber < 1.0))
    {
      v.push_back ("ber out of [0,1)");
    }
  if (phy.csthAssociationDbm < phy.csthOperationalDbm)
    {
      v.push_back ("association CSTH below operational");
    }
  if (!(phy.txPowerDbm > phy.csthAssociationDbm))
    {
      v.push_back ("phy.tx_power_dbm not above association CSTH");
    }
  if (phy.antennas < 1)
    {
      v.push_back ("phy.m_ant below 1");
    }
  const auto& f = cfg.frames;
  if (f.mpduOctets <= 0 || f.macHeaderOctets <= 0 || f.rtsOctets <= 0 || f.ctsOctets <= 0 || f.ackOctets <= 0
      || f.triggerOctets <= 0)
    {
      v.push_back ("frame sizes must be positive");
    }
  if (f.retryLimit < 1)
    {
      v.push_back ("frames.retry_limit below 1");
    }
  const auto& pl = cfg.pathloss;
  if (!(pl.exponent > 0.0))
    {
      v.push_back ("pathloss.exponent not positive");
    }
  if (!(pl.wallDbPerM >= 0.0))
    {
      v.push_back ("pathloss.wall_db_per_m negative");
    }
  if (!(pl.shadowingSigmaDb >= 0.0))
    {
      v.push_back ("pathloss.shadowing_sigma_db negative");
    }
  if (cfg.staCount <= 0)
    {
      v.push_back ("sim.sta_count not positive");
    }
  if (!(cfg.runDurationS > 0.0))
    {
      v.push_back ("sim.run_duration_s not positive");
    }
  if (cfg.runCount < 1)
    {
      v.push_back ("sim.run_count below 1");
    }
  if (!(cfg.placementRadiusM >= 0.0))
    {
      v.push_back ("geometry.placement_radius_m negative");
    }
  if (!(cfg.heFraction >= 0.0 && cfg.heFraction <= 1.0))
    {
      v.push_back ("mac.he_fraction out of [0,1]");
    }
  if (cfg.shareUpdateUs <= 0)
    {
      v.push_back ("mac.share_update_us not positive");
    }
  if (!(cfg.analytic.damping > 0.0 && cfg.analytic.damping <= 1.0))
    {
      v.push_back ("analytic.damping out of (0,1]");
    }
  if (!(cfg.analytic.tolerance > 0.0) || cfg.analytic.maxIterations < 1)
    {
      v.push_back ("analytic solver limits not positive");
    }
  return v;
}

void
SetConfigValue (SimConfig& cfg, const std::string& key, const std::string& value)
{
  for (const auto& b : Bindings ())
    {
      if (b.name == key)
        {
          b.set (cfg, value);
          return;
        }
    }
  throw ConfigError ("unknown config key '" + key + "'");
}

void
ApplyConfigText (SimConfig& cfg, const std::string& text)
{
  std::istringstream in (text);
  std::string line;
  int lineNo = 0;
  while (std::getline (in, line))
    {
      ++lineNo;
      auto hash = line.find ('#');
      if (hash != std::string::npos)
        {
          line.erase (hash);
        }
      line = Trim (line);
      if (line.empty ())
        {
          continue;
        }
      auto eq = line.find ('=');
      if (eq == std::string::npos)
        {
          throw ConfigError ("line " + std::to_string (lineNo) + ": expected key=value");
        }
      SetConfigValue (cfg, Trim (line.substr (0, eq)), Trim (line.substr (eq + 1)));
    }
}

SimConfig
LoadConfigFile (const std::string& path)
{
  std::ifstream in (path);
  if (!in)
    {
      throw ConfigError ("cannot open config file " + path);
    }
  std::stringstream ss;
  ss << in.rdbuf ();
  SimConfig cfg = DefaultConfig ();
  ApplyConfigText (cfg, ss.str ());
  return cfg;
}

std::string
DumpConfig (const SimConfig& cfg)
{
  std::string out;
  for (const auto& b : Bindings ())
    {
      out += b.name + "=" + b.get (cfg) + "\n";
    }
  return out;
}

std::vector<std::string>
ConfigKeys ()
{
  std::vector<std::string> keys;
  for (const auto& b : Bindings ())
    {
      keys.push_back (b.name);
    }
  return keys;
}

std::string
ConfigHash (const SimConfig& cfg)
{
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : DumpConfig (cfg))
    {
      h ^= c;
      h *= 1099511628211ULL;
    }
  char buf[17];
  std::snprintf (buf, sizeof buf, "%016llx", static_cast<unsigned long long> (h));
  return buf;
}

double
PerStaRate (const SimConfig& cfg, int ac)
{
  const double rate = cfg.ac.at (ac).arrivalRate;
  return cfg.perStaRates ? rate : rate / cfg.staCount;
}

} // namespace hexsim
