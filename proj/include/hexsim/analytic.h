#ifndef HEXSIM_ANALYTIC_H
#define HEXSIM_ANALYTIC_H

#include "hexsim/params.h"

#include <array>
#include <string>
#include <vector>

namespace hexsim {

using AcVector = std::array<double, kAcCount>;

/// Slot-level access quantities for one tagged STA and its surroundings.
struct AccessState
{
  AcVector tau {};
  AcVector idle {};          ///< f_k
  AcVector gamma {};         ///< success without hidden nodes
  AcVector gammaHidden {};   ///< success with hidden nodes
  double hiddenQuiet = 1.0;  ///< f_h
  AcVector txopShare {};     ///< f_mu, evaluated per tagged class
  AcVector noCollision {};   ///< f_ncoll, per tagged class
  AcVector failure {};       ///< p_k = 1 - gammaHidden
};

struct ModelInputs
{
  SimConfig config;
  AcVector inRange {};     ///< N_{k,t}, excluding the tagged STA
  AcVector hidden {};      ///< N_{k,h}
  AcVector throughputShares {};
  int vulnerableSu = 0;    ///< T_{v-su} in slots
  int vulnerableMu = 0;    ///< T_{v-mu} in slots
};

struct SolveResult
{
  AccessState state;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  /// Number of probabilities that had to be clamped into [0, 1].
  int clampEvents = 0;
};

/// Channel-noise survival of the RTS/CTS pair and of the DATA/BA pair.
struct NoiseSurvival
{
  double delta = 1.0;
  double sigma = 1.0;
};

enum class VulnerableMode { kSingleUser, kMultiUser };

/// A_{k,max} in slots. Throws when AIFSN increases with k; equal neighbours
/// give a zero window and set `degenerate`.
std::array<int, kAcCount> AccessWindowMax (const SimConfig& cfg, bool* degenerate = nullptr);

double IdleProb (const AcVector& tau, const AcVector& counts, int ac, IdleForm form = IdleForm::kPerClass);

/// Nested four-branch success probabilities; `clamps` counts results pushed back into [0,1].
AcVector SuccessProbNoHidden (const AcVector& idle, const AcVector& tau, const std::array<int, kAcCount>& accessMax,
                              int* clamps = nullptr);

int VulnerablePeriodSlots (VulnerableMode mode, const SimConfig& cfg);

double HiddenQuietProb (const AcVector& tau, const AcVector& hidden, HiddenForm form = HiddenForm::kProduct);

double NoCollisionProb (double hiddenQuiet, double txopShare, int vulnerableSu, int vulnerableMu);

double TxopShareProb (const AcVector& throughput, int ac);

AcVector SuccessProbHidden (const AcVector& gamma, double noCollision);

/// Renewal closure: transmission probability of class `ac` at failure probability `p`.
double AccessProbFromFailure (double p, int ac, const SimConfig& cfg);

NoiseSurvival ChannelNoise (const SimConfig& cfg);

/// Offered-load shares lambda_m * mpdu_bits.
AcVector OfferedThroughputShares (const SimConfig& cfg);

/// Inputs for a tagged STA from mean topology counts.
ModelInputs MakeModelInputs (const SimConfig& cfg, const AcVector& inRange, const AcVector& hidden);

SolveResult SolveFixedPoint (const ModelInputs& inputs);

} // namespace hexsim

#endif /* HEXSIM_ANALYTIC_H */
