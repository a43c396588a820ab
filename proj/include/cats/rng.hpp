#pragma once

#include <cstdint>

namespace cats {

/// splitmix64 finalizer; full-avalanche 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

enum class StreamKind : std::uint64_t {
  sample_tick = 1,
  violation = 2,
  violation_type = 3,
  accident = 4,
  placement = 5,
};

/// Counter-based random stream keyed by (seed, kind, a, b).
///
/// Draws depend only on the key and the draw index, never on call order
/// or on any other stream, so per-vehicle streams keyed by
/// (seed, vehicle, day) make results independent of iteration order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, StreamKind kind, std::uint64_t a, std::uint64_t b) {
    constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ull;
    std::uint64_t h = mix64(seed + golden);
    h = mix64(h + golden * static_cast<std::uint64_t>(kind));
    h = mix64(h + golden * (a + 1));
    key_ = mix64(h + golden * (b + 1));
  }

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ull;
    return mix64(key_ + counter_);
  }

  /// Uniform double in [0, 1).
  double next_uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Fixed-point multiply; deterministic.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool next_bernoulli(double p) { return next_uniform01() < p; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace cats
