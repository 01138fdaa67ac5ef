#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ufh {

// Deterministic 64-bit generator (splitmix64). Chosen over <random> engines so
// that every stream in an experiment is bit-stable across platforms and
// standard-library versions. State advances by the 64-bit golden-ratio
// constant; outputs pass through the standard two xorshift-multiply finalizer
// steps.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi], inclusive. Modulo bias is negligible for the small
  // ranges used here and keeps the draw count at exactly one per call.
  std::uint64_t uniform_u64(std::uint64_t lo, std::uint64_t hi) {
    return lo + next_u64() % (hi - lo + 1);
  }

  int uniform_int(int lo, int hi) {
    return static_cast<int>(static_cast<std::int64_t>(
        uniform_u64(0, static_cast<std::uint64_t>(hi - lo)))) + lo;
  }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, always consuming exactly two draws so that call sites have a
  // deterministic draw count.
  double gaussian() {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

 private:
  std::uint64_t state_;
};

// Derives independent sub-stream seeds from one experiment seed. Stream k is
// the (k+1)-th output of a splitmix64 seeded with the master seed.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed, int stream_index) {
  SplitMix64 rng(master_seed);
  std::uint64_t s = 0;
  for (int i = 0; i <= stream_index; ++i) s = rng.next_u64();
  return s;
}

}  // namespace ufh
