#ifndef HEXSIM_PARAMS_H
#define HEXSIM_PARAMS_H

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hexsim {

/// Simulation time in integer microseconds.
using TimeUs = std::int64_t;

/// Number of EDCA access categories. Index 3 is the highest priority.
inline constexpr int kAcCount = 4;

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct AcParams
{
  int aifsn = 2;
  /// W_{k,0}: number of backoff states in stage 0.
  int cwMinStates = 16;
  int maxBackoffStage = 1;
  TimeUs txopLimitUs = 0;
  /// Packets per second. Network aggregate unless SimConfig::perStaRates.
  double arrivalRate = 0.0;
};

struct PhyParams
{
  TimeUs slotUs = 9;
  TimeUs sifsUs = 16;
  TimeUs difsUs = 34;
  TimeUs phyHeaderMinUs = 40;
  TimeUs phyHeaderMaxUs = 52;
  TimeUs ofdmSymbolUs = 4;
  int bitsPerSymbol = 1560;
  double bandwidthMhz = 80.0;
  int subcarriers = 234;
  double ber = 2e-6;
  double txPowerDbm = 23.0;
  double csthOperationalDbm = -82.0;
  double csthAssociationDbm = -82.0;
  int antennas = 4;
};

struct FrameSizes
{
  int mpduOctets = 11454;
  int macHeaderOctets = 36;
  int rtsOctets = 20;
  int ctsOctets = 14;
  int ackOctets = 32;
  int triggerOctets = 28;
  int retryLimit = 7;
};

/// Log-distance indoor model with a linear wall term and log-normal shadowing.
struct PathLossParams
{
  double exponent = 2.0;
  double wallDbPerM = 0.5;
  double shadowingSigmaDb = 4.0;
  /// Free-space loss at 1 m for 5 GHz.
  double referenceLossDb = 46.42;
  double frequencyGhz = 5.0;
};

enum class NavPolicy { kIntraBssOnly, kLegacy };
enum class TopologyMode { kRandomWithHidden, kCompleteGraph };
/// kPolar draws the radius uniformly, kArea draws points uniformly over the disc.
enum class Placement { kPolar, kArea };
enum class HiddenForm { kProduct, kLiteral };
enum class IdleForm { kPerClass, kLiteral };

struct AnalyticParams
{
  double damping = 0.5;
  double tolerance = 1e-9;
  int maxIterations = 10000;
  HiddenForm hiddenForm = HiddenForm::kProduct;
  IdleForm idleForm = IdleForm::kPerClass;
};

struct SimConfig
{
  std::array<AcParams, kAcCount> ac;
  PhyParams phy;
  FrameSizes frames;
  PathLossParams pathloss;
  AnalyticParams analytic;

  int staCount = 24;
  double runDurationS = 1.0;
  int runCount = 10;
  std::uint64_t seed = 1;
  NavPolicy navPolicy = NavPolicy::kIntraBssOnly;
  TopologyMode topologyMode = TopologyMode::kRandomWithHidden;
  /// Read the CW_min column literally, W_{k,0} = CW_min + 1.
  bool cwPlusOne = false;
  /// Interpret AcParams::arrivalRate per STA instead of network aggregate.
  bool perStaRates = false;

  /// 0 selects the association range at csthAssociationDbm.
  double placementRadiusM = 0.0;
  Placement placement = Placement::kPolar;

  /// Fraction of STAs that are HE capable; their uplink data is collision free.
  double heFraction = 0.0;
  bool apTriggers = true;
  TimeUs shareUpdateUs = 50000;
};

enum class FrameKind {
  kRts,
  kCts,
  kGroupCts,
  kData,
  kBlockAck,
  kGroupAck,
  kTrigger,
  kMultiBlockAck,
};

const char* ToString (FrameKind kind);
bool IsControl (FrameKind kind);

/// Table values used throughout the evaluation.
SimConfig DefaultConfig ();

/// Frame size in octets.
int FrameOctets (FrameKind kind, const FrameSizes& sizes);

/// PHY header plus whole OFDM symbols. Data frames carry the long header.
TimeUs FrameDurationUs (FrameKind kind, const FrameSizes& sizes, const PhyParams& phy);

/// AIFS_k = SIFS + AIFSN_k * slot.
TimeUs AifsUs (const SimConfig& cfg, int ac);

/// Stage-0 window in states, honouring cwPlusOne.
int BaseWindow (const SimConfig& cfg, int ac);

/// W_{k,i}; throws ConfigError when stage exceeds the retry limit.
int WindowSize (int ac, int stage, const SimConfig& cfg);

/// Empty when every invariant holds; otherwise one message per violation.
std::vector<std::string> ValidateConfig (const SimConfig& cfg);

/// Applies `key=value` lines. Unknown keys and malformed values throw ConfigError.
void ApplyConfigText (SimConfig& cfg, const std::string& text);
SimConfig LoadConfigFile (const std::string& path);
void SetConfigValue (SimConfig& cfg, const std::string& key, const std::string& value);

/// Canonical key=value dump; ApplyConfigText(DumpConfig(c)) reproduces c.
std::string DumpConfig (const SimConfig& cfg);
std::vector<std::string> ConfigKeys ();

/// FNV-1a over the canonical dump, as 16 hex digits.
std::string ConfigHash (const SimConfig& cfg);

/// Per-STA, per-AC Poisson rate in packets per second.
double PerStaRate (const SimConfig& cfg, int ac);

} // namespace hexsim

#endif /* HEXSIM_PARAMS_H */
