#include "hexsim/analytic.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hexsim {

namespace {

double
Clamp01 (double v, int* clamps)
{
  if (v < 0.0 || v > 1.0 || std::isnan (v))
    {
      if (clamps != nullptr)
        {
          ++*clamps;
        }
      if (std::isnan (v))
        {
          return 0.0;
        }
      return std::clamp (v, 0.0, 1.0);
    }
  return v;
}

void
RequireUnitInterval (double v, const char* what)
{
  if (!(v >= 0.0 && v <= 1.0))
    {
      throw std::invalid_argument (std::string (what) + " outside [0,1]");
    }
}

} // namespace

std::array<int, kAcCount>
AccessWindowMax (const SimConfig& cfg, bool* degenerate)
{
  std::array<int, kAcCount> a {};
  bool flat = false;
  a[0] = BaseWindow (cfg, 0) << cfg.ac[0].maxBackoffStage;
  for (int k = 1; k < kAcCount; ++k)
    {
      const int diff = cfg.ac[k - 1].aifsn - cfg.ac[k].aifsn;
      if (diff < 0)
        {
          throw std::invalid_argument ("AIFSN must not increase with priority");
        }
      flat = flat || diff == 0;
      a[k] = diff;
    }
  if (degenerate != nullptr)
    {
      *degenerate = flat;
    }
  return a;
}

double
IdleProb (const AcVector& tau, const AcVector& counts, int ac, IdleForm form)
{
  double f = 1.0;
  for (int l = ac; l < kAcCount; ++l)
    {
      RequireUnitInterval (tau[l], "tau");
      const double exponent = form == IdleForm::kPerClass ? counts[l] : counts[ac];
      f *= std::pow (1.0 - tau[l], exponent);
    }
  return f;
}

AcVector
SuccessProbNoHidden (const AcVector& idle, const AcVector& tau, const std::array<int, kAcCount>& accessMax, int* clamps)
{
  for (int k = 0; k < kAcCount; ++k)
    {
      RequireUnitInterval (idle[k], "idle probability");
      RequireUnitInterval (tau[k], "tau");
      if (tau[k] >= 1.0)
        {
          throw std::invalid_argument ("tau equal to 1 makes the success probability undefined");
        }
    }
  const double e1 = std::pow (idle[1], accessMax[1]);
  const double e2 = std::pow (idle[2], accessMax[2]);
  const double e3 = std::pow (idle[3], accessMax[3]);

  // Numerator of the success term for a class whose window is exhausted at level l.
  const double level1 = (1.0 - e1) * idle[1] + e1 * idle[0];
  const double level2 = (1.0 - e2) * idle[2] + e2 * level1;
  const double level3 = (1.0 - e3) * idle[3] + e3 * level2;

  AcVector g {};
  g[0] = idle[0] / (1.0 - tau[0]);
  g[1] = level1 / (1.0 - tau[1]);
  g[2] = level2 / (1.0 - tau[2]);
  g[3] = level3 / (1.0 - tau[3]);
  for (double& v : g)
    {
      v = Clamp01 (v, clamps);
    }
  return g;
}

int
VulnerablePeriodSlots (VulnerableMode mode, const SimConfig& cfg)
{
  const TimeUs slot = cfg.phy.slotUs;
  TimeUs span = 0;
  if (mode == VulnerableMode::kSingleUser)
    {
      span = FrameDurationUs (FrameKind::kRts, cfg.frames, cfg.phy) + cfg.phy.sifsUs
             + FrameDurationUs (FrameKind::kCts, cfg.frames, cfg.phy);
    }
  else
    {
      span = FrameDurationUs (FrameKind::kTrigger, cfg.frames, cfg.phy);
    }
  return static_cast<int> ((span + slot - 1) / slot);
}

double
HiddenQuietProb (const AcVector& tau, const AcVector& hidden, HiddenForm form)
{
  if (form == HiddenForm::kProduct)
    {
      double f = 1.0;
      for (int k = 0; k < kAcCount; ++k)
        {
          RequireUnitInterval (tau[k], "tau");
          f *= std::pow (1.0 - tau[k], hidden[k]);
        }
      return f;
    }
  double sum = 0.0;
  for (int k = 0; k < kAcCount; ++k)
    {
      if (!(tau[k] > 0.0) || !(hidden[k] > 0.0))
        {
          throw std::invalid_argument ("literal hidden form needs tau > 0 and hidden count > 0 in every class");
        }
      sum += std::pow (1.0 - tau[k], hidden[k]) / (tau[k] * hidden[k]);
    }
  return sum;
}

double
NoCollisionProb (double hiddenQuiet, double txopShare, int vulnerableSu, int vulnerableMu)
{
  RequireUnitInterval (hiddenQuiet, "hidden quiet probability");
  RequireUnitInterval (txopShare, "TXOP share probability");
  if (vulnerableSu < 0 || vulnerableMu < 0)
    {
      throw std::invalid_argument ("vulnerable period must be non-negative");
    }
  const double exponent = (1.0 - txopShare) * vulnerableSu + txopShare * vulnerableMu;
  return std::pow (hiddenQuiet, exponent);
}

double
TxopShareProb (const AcVector& throughput, int ac)
{
  double total = 0.0;
  for (double t : throughput)
    {
      if (t < 0.0)
        {
          throw std::invalid_argument ("negative throughput share");
        }
      total += t;
    }
  if (!(total > 0.0))
    {
      throw std::invalid_argument ("throughput shares sum to zero");
    }
  return 1.0 - throughput.at (ac) / total;
}

AcVector
SuccessProbHidden (const AcVector& gamma, double noCollision)
{
  RequireUnitInterval (noCollision, "no-collision probability");
  AcVector out {};
  for (int k = 0; k < kAcCount; ++k)
    {
      RequireUnitInterval (gamma[k], "gamma");
      out[k] = gamma[k] * noCollision;
    }
  return out;
}

double
AccessProbFromFailure (double p, int ac, const SimConfig& cfg)
{
  RequireUnitInterval (p, "failure probability");
  double num = 0.0;
  double den = 0.0;
  double pi = 1.0;
  for (int i = 0; i <= cfg.frames.retryLimit; ++i)
    {
      num += pi;
      den += pi * (WindowSize (ac, i, cfg) + 1) / 2.0;
      pi *= p;
    }
  return num / den;
}

NoiseSurvival
ChannelNoise (const SimConfig& cfg)
{
  const auto& f = cfg.frames;
  const double keep = 1.0 - cfg.phy.ber;
  NoiseSurvival n;
  n.delta = std::pow (keep, 8.0 * (f.rtsOctets + f.ctsOctets));
  n.sigma = std::pow (keep, 8.0 * (f.mpduOctets + f.ackOctets));
  return n;
}

AcVector
OfferedThroughputShares (const SimConfig& cfg)
{
  AcVector th {};
  const double bits = 8.0 * cfg.frames.mpduOctets;
  for (int k = 0; k < kAcCount; ++k)
    {
      th[k] = cfg.ac[k].arrivalRate * bits;
    }
  return th;
}

ModelInputs
MakeModelInputs (const SimConfig& cfg, const AcVector& inRange, const AcVector& hidden)
{
  ModelInputs in;
  in.config = cfg;
  in.inRange = inRange;
  in.hidden = hidden;
  in.throughputShares = OfferedThroughputShares (cfg);
  in.vulnerableSu = VulnerablePeriodSlots (VulnerableMode::kSingleUser, cfg);
  in.vulnerableMu = VulnerablePeriodSlots (VulnerableMode::kMultiUser, cfg);
  return in;
}

namespace {

AccessState
Evaluate (const ModelInputs& in, const AcVector& tau, const std::array<int, kAcCount>& accessMax, int* clamps)
{
  const auto& an = in.config.analytic;
  AccessState s;
  s.tau = tau;
  for (int k = 0; k < kAcCount; ++k)
    {
      s.idle[k] = IdleProb (tau, in.inRange, k, an.idleForm);
    }
  s.gamma = SuccessProbNoHidden (s.idle, tau, accessMax, clamps);
  s.hiddenQuiet = Clamp01 (HiddenQuietProb (tau, in.hidden, an.hiddenForm), clamps);
  double total = 0.0;
  for (double t : in.throughputShares)
    {
      total += t;
    }
  for (int k = 0; k < kAcCount; ++k)
    {
      s.txopShare[k] = total > 0.0 ? TxopShareProb (in.throughputShares, k) : 0.0;
      s.noCollision[k] = NoCollisionProb (s.hiddenQuiet, s.txopShare[k], in.vulnerableSu, in.vulnerableMu);
      s.gammaHidden[k] = s.gamma[k] * s.noCollision[k];
      s.failure[k] = 1.0 - s.gammaHidden[k];
    }
  return s;
}

} // namespace

SolveResult
SolveFixedPoint (const ModelInputs& inputs)
{
  const auto& cfg = inputs.config;
  const auto& an = cfg.analytic;
  for (int k = 0; k < kAcCount; ++k)
    {
      if (inputs.inRange[k] < 0.0 || inputs.hidden[k] < 0.0)
        {
          throw std::invalid_argument ("node counts must be non-negative");
        }
    }
  const auto accessMax = AccessWindowMax (cfg);

  SolveResult result;
  AcVector tau {};
  for (int k = 0; k < kAcCount; ++k)
    {
      tau[k] = AccessProbFromFailure (0.0, k, cfg);
    }
  double bestResidual = std::numeric_limits<double>::infinity ();
  AcVector bestTau = tau;
  for (int it = 1; it <= an.maxIterations; ++it)
    {
      const AccessState s = Evaluate (inputs, tau, accessMax, &result.clampEvents);
      double residual = 0.0;
      AcVector next {};
      for (int k = 0; k < kAcCount; ++k)
        {
          const double target = AccessProbFromFailure (s.failure[k], k, cfg);
          residual = std::max (residual, std::abs (target - tau[k]));
          next[k] = (1.0 - an.damping) * tau[k] + an.damping * target;
        }
      result.iterations = it;
      if (residual < bestResidual)
        {
          bestResidual = residual;
          bestTau = tau;
        }
      if (residual < an.tolerance)
        {
          result.converged = true;
          break;
        }
      tau = next;
    }
  result.residual = bestResidual;
  result.state = Evaluate (inputs, bestTau, accessMax, &result.clampEvents);
  return result;
}

} // namespace hexsim
