#pragma once

#include <array>
#include <cstdint>

namespace mpfmfd {

// SplitMix64 (Steele, Lea, Flood 2014). Used only to expand a 64-bit seed
// into generator state and to derive independent seeds.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Derives a child seed for a named purpose. Pure function of its inputs.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// xoshiro256** 1.0 (Blackman & Vigna). Bit-identical on every platform.
// Substreams: stream k is the base state advanced by k calls to jump(),
// each jump skipping 2^128 outputs, so substreams never overlap in practice.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) noexcept;
  Xoshiro256(std::uint64_t seed, unsigned stream) noexcept;

  std::uint64_t next() noexcept;
  void jump() noexcept;

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  // Standard normal deviate, Marsaglia polar method.
  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mpfmfd
