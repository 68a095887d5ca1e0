#pragma once

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace sparse_anova {

//! SplitMix64 output function (Steele, Lea & Flood). Bijective on 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Folds a tuple of integers into one stream key. Order-sensitive.
constexpr std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) noexcept
{
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t p : parts)
    h = mix64(h ^ mix64(p));
  return h;
}

//! Seed of replicate j derived from a base seed.
constexpr std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t j) noexcept
{
  return stream_key({base, 0x5265706cULL, j});
}

//! SplitMix64 generator: the state is a counter, so any (key, position) pair
//! is reachable in O(1) and streams keyed by stream_key() never share state.
//! Satisfies UniformRandomBitGenerator for use with Boost.Random.
class SplitMix64 {
public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t key) noexcept
    : state_(key)
  {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept
  {
    const std::uint64_t z = state_;
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(z);
  }

private:
  std::uint64_t state_;
};

//! Standard normal variate (Boost's ziggurat; identical on every platform,
//! unlike std::normal_distribution).
inline double standard_normal(SplitMix64& gen)
{
  return boost::random::normal_distribution<double>(0.0, 1.0)(gen);
}

//! Chi-square variate with `dof` > 0 degrees of freedom.
inline double chi_square(SplitMix64& gen, double dof)
{
  return 2.0 * boost::random::gamma_distribution<double>(0.5 * dof, 1.0)(gen);
}

} // namespace sparse_anova
