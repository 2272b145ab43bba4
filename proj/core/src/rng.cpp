#include "parahom/rng.hpp"

#include <cmath>
#include <numbers>

namespace parahom {

double KeyedStream::normal(std::uint64_t counter) const noexcept {
  // 1 - u keeps the log argument in (0, 1]
  const double u1 = 1.0 - uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

KeyedStream sample_stream(std::uint64_t seed, std::uint64_t sample_index) noexcept {
  return KeyedStream(combine_key(mix64(seed), sample_index));
}

}  // namespace parahom
