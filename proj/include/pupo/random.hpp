#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace pupo {

/// Seeded 64-bit engine with portable uniform draws. The standard
/// distributions are implementation-defined; these are not, so a seed gives the
/// same artifacts on every toolchain.
class Rng
{
public:
  explicit Rng(std::uint64_t seed)
    : engine_{seed}
  {
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased by rejection.
  std::size_t index(std::size_t n)
  {
    std::uint64_t const bound = n;
    std::uint64_t const limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

private:
  std::mt19937_64 engine_;
};

/// Stateless 64-bit mix, used to derive independent sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seeded Fisher-Yates shuffle.
template <typename It>
void shuffle(It first, It last, Rng &rng)
{
  auto const n = static_cast<std::size_t>(last - first);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t const j = rng.index(i);
    std::swap(first[i - 1], first[j]);
  }
}

} // namespace pupo
