#ifndef HEXSIM_RNG_H
#define HEXSIM_RNG_H

#include <cmath>
#include <cstdint>
#include <random>

namespace hexsim {

/// Seeded generator with platform-independent transforms. Streams are split
/// by hashing (seed, stream id) so adding a stream never perturbs another.
class Rng
{
public:
  explicit Rng (std::uint64_t seed = 0)
    : m_engine (seed)
  {
  }

  static std::uint64_t Derive (std::uint64_t seed, std::uint64_t stream)
  {
    std::uint64_t z = seed ^ (stream * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// [0, 1) with 53 random bits.
  double Uniform ()
  {
    return static_cast<double> (m_engine () >> 11) * 0x1.0p-53;
  }

  /// [0, n)
  std::uint32_t UniformInt (std::uint32_t n)
  {
    return static_cast<std::uint32_t> (Uniform () * n);
  }

  double Exponential (double rate)
  {
    return -std::log1p (-Uniform ()) / rate;
  }

  bool Bernoulli (double p)
  {
    if (p >= 1.0)
      {
        return true;
      }
    if (p <= 0.0)
      {
        return false;
      }
    return Uniform () < p;
  }

  double Normal (double mean, double sd)
  {
    // Box-Muller, one variate per call.
    double u1 = 1.0 - Uniform ();
    double u2 = Uniform ();
    return mean + sd * std::sqrt (-2.0 * std::log (u1)) * std::cos (2.0 * M_PI * u2);
  }

private:
  std::mt19937_64 m_engine;
};

} // namespace hexsim

#endif /* HEXSIM_RNG_H */
