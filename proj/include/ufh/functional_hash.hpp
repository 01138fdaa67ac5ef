#pragma once

#include <cstdint>

#include "ufh/hashing.hpp"
#include "ufh/rng.hpp"
#include "ufh/task.hpp"

namespace ufh {

// Computes the functional hash of a candidate: a short, canonical, seeded
// evaluation whose floating-point by-products ("hashable outputs") are folded
// into a 64-bit hash.
//
// For each of n_seeds seeds (fixed_seed, fixed_seed + 1, ...): reset a private
// RNG, run the candidate's initialize pass, then fold the hashable output of
// n_examples canonical training steps (forward + backward) and n_examples
// canonical validation steps (forward only). Per-seed sub-hashes are folded
// sequentially into one accumulator, seed 0 first.
//
// The RNG is private to this computation; hashing never advances any
// experiment-level stream. Canonical examples are a fixed, order-stable
// sequence, so equal candidates always produce equal hashes.
//
// Space requirements: hash_begin / hash_train_step / hash_validation_step as
// implemented by ProgramSpace and GraphSpace.
template <typename Space>
FunctionalHash unified_functional_hash(const Space& space,
                                       const typename Space::Candidate& candidate,
                                       const Task& task, const HashConfig& config,
                                       PassCounters* counters = nullptr) {
  FunctionalHash final_hash = kFnvBasis;
  for (int s = 0; s < config.n_seeds; ++s) {
    auto exec = space.hash_begin(candidate, task, config.fixed_seed + static_cast<std::uint64_t>(s),
                                 counters);
    FunctionalHash sub = kFnvBasis;
    for (int i = 0; i < config.n_examples; ++i) {
      double out = space.hash_train_step(exec, task, config, i, counters);
      sub = add_to_hash(sub, out, config.m_bits);
    }
    for (int i = 0; i < config.n_examples; ++i) {
      double out = space.hash_validation_step(exec, task, config, i, counters);
      sub = add_to_hash(sub, out, config.m_bits);
    }
    final_hash = hash_mix(final_hash, sub);
  }
  return final_hash;
}

}  // namespace ufh
