#pragma once

#include <cstdint>
#include <span>

namespace ucplab {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based seed splitting: the seed of stream `stream`, element `index`
// depends only on (master, stream, index), never on evaluation order. Serial
// and parallel runs therefore draw identical numbers.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(mix64(master) ^ stream) ^ index);
}

// Seed for a lattice site: folds the signed integer coordinates in order.
std::uint64_t site_seed(std::uint64_t master, std::uint64_t stream,
                        std::span<const long> site) noexcept;

// Small deterministic generator (SplitMix64 stream). Bit-identical across
// platforms and standard libraries, unlike std::uniform_real_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (one of the pair is discarded).
  double normal() noexcept;

 private:
  std::uint64_t state_;
};

}  // namespace ucplab
