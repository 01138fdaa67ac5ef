#pragma once

#include <bit>
#include <cstdint>
#include <string>

namespace ufh {

// A functional hash is a 64-bit fingerprint of a candidate's input-output
// behavior. Values are serialized everywhere as lowercase 16-char hex.
using FunctionalHash = std::uint64_t;

inline constexpr FunctionalHash kFnvBasis = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::string to_hex16(FunctionalHash h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

// Folds one 64-bit value into the hash: byte-wise FNV-1a over the eight bytes
// of `value` in little-endian order. Order-sensitive by construction.
inline FunctionalHash hash_mix(FunctionalHash hash, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    hash = (hash ^ ((value >> (8 * i)) & 0xFF)) * kFnvPrime;
  }
  return hash;
}

// Sign / raw exponent / truncated mantissa of an IEEE-754 binary64 value.
// The decomposition is a pure bit operation, total over all bit patterns:
// every NaN maps to the canonical triple (0, all-ones exponent, 0) and the
// infinities keep their sign with zero mantissa.
struct FloatFingerprint {
  std::uint64_t sign = 0;      // 1 bit
  std::uint64_t exponent = 0;  // 11 raw (biased) bits
  std::uint64_t mantissa = 0;  // m_bits most-significant mantissa bits

  bool operator==(const FloatFingerprint&) const = default;
};

inline FloatFingerprint decompose_float(double x, int m_bits) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  const std::uint64_t exponent = (bits >> 52) & 0x7FF;
  const std::uint64_t mantissa = bits & 0xFFFFFFFFFFFFFULL;
  if (exponent == 0x7FF && mantissa != 0) {
    return {0, 0x7FF, 0};  // canonical NaN
  }
  return {bits >> 63, exponent, mantissa >> (52 - m_bits)};
}

// Folds one floating-point hashable output into the hash: decomposes it, then
// mixes sign, exponent, and truncated mantissa in that order.
inline FunctionalHash add_to_hash(FunctionalHash hash, double hashable_output,
                                  int m_bits) {
  const FloatFingerprint f = decompose_float(hashable_output, m_bits);
  hash = hash_mix(hash, f.sign);
  hash = hash_mix(hash, f.exponent);
  hash = hash_mix(hash, f.mantissa);
  return hash;
}

// Parameters of the functional hash. fixed_seed must stay constant across all
// hash computations within one experiment; the canonical examples and the
// hashing RNG both derive from it.
struct HashConfig {
  int m_bits = 24;          // mantissa bits kept, in [0, 52]
  int n_examples = 10;      // canonical examples per phase (N_E)
  int n_seeds = 3;          // repeated harvests with distinct seeds (N_S)
  std::uint64_t fixed_seed = 0x2545F4914F6CDD1DULL;
};

}  // namespace ufh
