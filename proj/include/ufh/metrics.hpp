#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ufh/errors.hpp"

namespace ufh {

enum class CacheEvent : std::uint8_t { kNone, kHit, kMiss, kForget, kCollisionCheck };

inline const char* cache_event_name(CacheEvent e) {
  switch (e) {
    case CacheEvent::kNone: return "none";
    case CacheEvent::kHit: return "hit";
    case CacheEvent::kMiss: return "miss";
    case CacheEvent::kForget: return "forget";
    default: return "collision-check";
  }
}

// Best-so-far fitness over virtual time. One sample per admission; t is
// non-decreasing and best_fitness never decreases. population_best is the
// auxiliary per-step population maximum.
struct TimeCourse {
  struct Sample {
    double t = 0.0;
    std::uint64_t step = 0;  // admission index
    double best_fitness = 0.0;
    double population_best = 0.0;
    CacheEvent event = CacheEvent::kNone;
  };

  std::vector<Sample> samples;
  double horizon = 0.0;  // T
};

// Time-normalized integral of the best-so-far curve: (1/T) * integral of f
// over [0, T], with f a piecewise-constant step function that is 0 before the
// first admission.
inline double auc(const TimeCourse& tc) {
  if (tc.samples.empty()) throw EmptyTimeCourse("auc of empty time course");
  if (!(tc.horizon > 0.0)) throw EmptyTimeCourse("auc horizon must be positive");
  const double T = tc.horizon;
  double area = 0.0;
  double prev_t = 0.0;
  double prev_f = 0.0;
  for (const TimeCourse::Sample& s : tc.samples) {
    double t = s.t;
    if (t >= T) {
      t = T;
      area += prev_f * (t - prev_t);
      return area / T;
    }
    area += prev_f * (t - prev_t);
    prev_t = t;
    prev_f = s.best_fitness;
  }
  area += prev_f * (T - prev_t);
  return area / T;
}

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;
  int count = 0;
};

// Sample mean and standard error (sd / sqrt(n), with the n-1 variance).
inline MeanSem mean_sem(const std::vector<double>& xs) {
  if (xs.size() < 2) throw InsufficientRuns("need at least 2 runs per group");
  MeanSem out;
  out.count = static_cast<int>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / out.count;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.sem = std::sqrt(ss / (out.count - 1)) / std::sqrt(static_cast<double>(out.count));
  return out;
}

// One experiment's summary statistics.
struct ExperimentSummary {
  std::string config_id;
  std::uint64_t seed = 0;
  double auc = 0.0;
  double hit_fraction = 0.0;
  double collision_rate = 0.0;
  std::uint64_t eval_calls = 0;
  std::uint64_t hash_calls = 0;
  double best_fitness = 0.0;   // best ever admitted
  double final_fitness = 0.0;  // best of the final population
};

struct GroupStats {
  std::string config_id;
  MeanSem auc;
  MeanSem hit_fraction;
  MeanSem final_fitness;
};

// Groups run summaries by config_id and reports mean +/- SEM per group.
inline std::vector<GroupStats> sweep_aggregate(const std::vector<ExperimentSummary>& runs) {
  std::map<std::string, std::vector<const ExperimentSummary*>> groups;
  for (const ExperimentSummary& r : runs) groups[r.config_id].push_back(&r);
  std::vector<GroupStats> out;
  for (const auto& [id, members] : groups) {
    std::vector<double> aucs, hits, finals;
    for (const ExperimentSummary* m : members) {
      aucs.push_back(m->auc);
      hits.push_back(m->hit_fraction);
      finals.push_back(m->final_fitness);
    }
    GroupStats g;
    g.config_id = id;
    g.auc = mean_sem(aucs);
    g.hit_fraction = mean_sem(hits);
    g.final_fitness = mean_sem(finals);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace ufh
