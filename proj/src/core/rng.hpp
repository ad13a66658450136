#pragma once

#include <cstdint>

namespace llab {

// 64-bit avalanche finalizer (the murmur3 / splitmix64 constant pair).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

// Counter-based generator keyed by (seed, stream, event).  Each event gets its
// own short stream, so results do not depend on evaluation order or on how the
// event range is chunked across threads.  Consecutive draws walk the state by
// the golden-gamma increment and re-mix, splitmix64 style.
class EventRng {
 public:
  EventRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t event) {
    std::uint64_t h = mix64(seed + kGamma);
    h = mix64(h ^ (stream + kGamma));
    state_ = mix64(h ^ (event + kGamma));
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix64(state_);
  }

  // Uniform in [0, 1), 53 bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [-1, 1).
  double next_symmetric() { return 2.0 * next_unit() - 1.0; }

  friend bool operator==(const EventRng&, const EventRng&) = default;

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
};

}  // namespace llab
