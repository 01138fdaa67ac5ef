#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "ufh/hashing.hpp"
#include "ufh/task.hpp"

namespace ufh {

// Fitness cache keyed by functional hash. Bounded capacity with
// least-recently-inserted eviction; a key forgotten and re-inserted counts as
// a fresh insertion. Lookups and insertions are internally locked so
// concurrent evaluation workers can share one cache; counters are atomic.
class Cache {
 public:
  explicit Cache(std::size_t capacity = 1000000) : capacity_(capacity) {}

  std::optional<FitnessRecord> lookup(FunctionalHash key) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) {
      misses_.fetch_add(1, std::memory_order_relaxed);
      return std::nullopt;
    }
    hits_.fetch_add(1, std::memory_order_relaxed);
    return it->second.record;
  }

  // Inserts if absent; an existing entry is left untouched (first completed
  // evaluation wins). Evicts the oldest insertion beyond capacity.
  void insert(FunctionalHash key, const FitnessRecord& record) {
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, fresh] = map_.try_emplace(key, Entry{record, next_serial_});
    if (!fresh) return;
    order_.push_back({key, next_serial_});
    ++next_serial_;
    while (map_.size() > capacity_) evict_oldest();
  }

  // Adds one more evaluation into the running mean for an existing key,
  // unless the entry has already absorbed max_evals of them. Returns the
  // (possibly updated) record, or nullopt if the key is absent.
  std::optional<FitnessRecord> aggregate(FunctionalHash key, double fitness, int max_evals) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    FitnessRecord& rec = it->second.record;
    if (rec.evals < max_evals) {
      rec.evals += 1;
      rec.fitness += (fitness - rec.fitness) / rec.evals;
    }
    return rec;
  }

  bool forget(FunctionalHash key) {
    std::lock_guard<std::mutex> lock(mu_);
    bool erased = map_.erase(key) > 0;
    if (erased) forgets_.fetch_add(1, std::memory_order_relaxed);
    return erased;
  }

  bool contains(FunctionalHash key) const {
    std::lock_guard<std::mutex> lock(mu_);
    return map_.count(key) > 0;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return map_.size();
  }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t hits() const { return hits_.load(std::memory_order_relaxed); }
  std::uint64_t misses() const { return misses_.load(std::memory_order_relaxed); }
  std::uint64_t forgets() const { return forgets_.load(std::memory_order_relaxed); }

  void reset_counters() {
    hits_ = 0;
    misses_ = 0;
    forgets_ = 0;
  }

 private:
  struct Entry {
    FitnessRecord record;
    std::uint64_t serial;
  };

  void evict_oldest() {
    // Stale order entries (forgotten keys, superseded serials) are skipped.
    while (!order_.empty()) {
      auto [key, serial] = order_.front();
      order_.pop_front();
      auto it = map_.find(key);
      if (it != map_.end() && it->second.serial == serial) {
        map_.erase(it);
        return;
      }
    }
  }

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::unordered_map<FunctionalHash, Entry> map_;
  std::deque<std::pair<FunctionalHash, std::uint64_t>> order_;
  std::uint64_t next_serial_ = 0;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
  std::atomic<std::uint64_t> forgets_{0};
};

// Per-hash seen counter gating entry of over-explored candidates. Counts only
// grow within an experiment.
class Tabulist {
 public:
  void increment(FunctionalHash key) {
    std::lock_guard<std::mutex> lock(mu_);
    ++counts_[key];
  }

  std::uint64_t count(FunctionalHash key) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
  }

  std::uint64_t total() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::uint64_t sum = 0;
    for (const auto& [k, v] : counts_) sum += v;
    return sum;
  }

 private:
  mutable std::mutex mu_;
  std::unordered_map<FunctionalHash, std::uint64_t> counts_;
};

}  // namespace ufh
