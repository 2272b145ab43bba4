/// @file rng.hpp
/// @brief Counter-based random numbers keyed by (seed, sample, stream, counter).
///
/// Every draw is a pure function of its key, so fields do not depend on the
/// order in which sites or samples are visited, nor on the worker count.
#pragma once

#include <cstdint>

namespace parahom {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine_key(std::uint64_t key, std::uint64_t value) noexcept {
  return mix64(key ^ mix64(value + 0x632be59bd9b4e019ULL));
}

class KeyedStream {
 public:
  constexpr explicit KeyedStream(std::uint64_t key) noexcept : key_(mix64(key)) {}
  constexpr KeyedStream split(std::uint64_t id) const noexcept { return KeyedStream(combine_key(key_, id), 0); }
  constexpr std::uint64_t key() const noexcept { return key_; }

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept { return combine_key(key_, counter); }
  // uniform in [0, 1) with 53 random bits
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }
  // standard normal via Box-Muller on counters 2c, 2c+1
  double normal(std::uint64_t counter) const noexcept;

 private:
  constexpr KeyedStream(std::uint64_t raw, int) noexcept : key_(raw) {}
  std::uint64_t key_;
};

// Stream for one realization: (seed, sample index).
KeyedStream sample_stream(std::uint64_t seed, std::uint64_t sample_index) noexcept;

}  // namespace parahom
