#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ufh/cache.hpp"
#include "ufh/errors.hpp"
#include "ufh/functional_hash.hpp"
#include "ufh/metrics.hpp"
#include "ufh/rng.hpp"
#include "ufh/scheduler.hpp"
#include "ufh/task.hpp"

namespace ufh {

enum class Technique { kNone, kFec, kFecForgetful, kFea, kFcm, kTabulist };

inline const char* technique_name(Technique t) {
  switch (t) {
    case Technique::kNone: return "none";
    case Technique::kFec: return "fec";
    case Technique::kFecForgetful: return "fec_forgetful";
    case Technique::kFea: return "fea";
    case Technique::kFcm: return "fcm";
    default: return "tabulist";
  }
}

enum class ControllerKind { kRegularized, kClassic };

// Sentinel for a tabulist that only counts and never gates.
inline constexpr std::uint64_t kTabuNeverGate = ~0ULL;

struct EvolutionConfig {
  int population_size = 100;            // P
  int tournament_size = 10;             // T
  std::int64_t num_candidates = 1000;   // N, warm-up included
  Technique technique = Technique::kNone;
  ControllerKind controller = ControllerKind::kRegularized;
  double forget_probability = 0.1;      // F (forgetful FEC)
  int max_evals = 10;                   // M (FEA)
  std::uint64_t tabu_max_count = 5;     // K
  int max_retry = 32;                   // FCM / tabulist mutation cap
  std::size_t cache_capacity = 1000000;
  std::uint64_t seed = 1;

  void validate() const {
    if (tournament_size < 1) throw ConfigError("tournament_size must be >= 1");
    if (population_size < tournament_size)
      throw ConfigError("population_size must be >= tournament_size");
    if (num_candidates < population_size)
      throw ConfigError("num_candidates must be >= population_size");
    if (forget_probability < 0.0 || forget_probability > 1.0)
      throw ConfigError("forget_probability must be in [0, 1]");
    if (max_evals < 1) throw ConfigError("max_evals must be >= 1");
    if (tabu_max_count < 1) throw ConfigError("tabu_max_count must be >= 1");
    if (max_retry < 1) throw ConfigError("max_retry must be >= 1");
    if (cache_capacity < 1) throw ConfigError("cache_capacity must be >= 1");
  }
};

template <typename Space>
struct Individual {
  typename Space::Candidate candidate;
  FitnessRecord record;
  std::optional<FunctionalHash> hash;
  std::uint64_t insertion_index = 0;
};

// Samples T distinct population indices uniformly without replacement and
// returns the index of the highest-fitness member; ties go to the newest
// insertion. Consumes exactly T draws from the stream.
template <typename Space>
std::size_t select_parent_index(const std::deque<Individual<Space>>& population,
                                int tournament_size, SplitMix64& rng) {
  const std::size_t n = population.size();
  if (n < static_cast<std::size_t>(tournament_size)) {
    throw PopulationTooSmall("population smaller than tournament size");
  }
  // Floyd's algorithm: uniform T-subset with exactly T draws.
  std::vector<std::size_t> chosen;
  chosen.reserve(static_cast<std::size_t>(tournament_size));
  for (std::size_t j = n - static_cast<std::size_t>(tournament_size); j < n; ++j) {
    std::size_t t = static_cast<std::size_t>(rng.uniform_u64(0, j));
    bool already = false;
    for (std::size_t c : chosen) {
      if (c == t) {
        already = true;
        break;
      }
    }
    chosen.push_back(already ? j : t);
  }
  std::size_t best = chosen[0];
  for (std::size_t i = 1; i < chosen.size(); ++i) {
    const Individual<Space>& cand = population[chosen[i]];
    const Individual<Space>& cur = population[best];
    if (cand.record.fitness > cur.record.fitness ||
        (cand.record.fitness == cur.record.fitness &&
         cand.insertion_index > cur.insertion_index)) {
      best = chosen[i];
    }
  }
  return best;
}

template <typename Space>
const Individual<Space>& select_parent(const std::deque<Individual<Space>>& population,
                                       int tournament_size, SplitMix64& rng) {
  return population[select_parent_index(population, tournament_size, rng)];
}

// --- standalone technique wrappers -----------------------------------------
// Synchronous forms of the cached acquisition step, as used with serial
// scheduling. `evaluator` is invoked only when the technique calls for a fresh
// evaluation and must return the candidate's FitnessRecord.

template <typename EvalFn>
FitnessRecord acquire_fec(FunctionalHash key, Cache& cache, EvalFn&& evaluator) {
  if (auto cached = cache.lookup(key)) return *cached;
  FitnessRecord rec = evaluator();
  cache.insert(key, rec);
  return rec;
}

template <typename EvalFn>
FitnessRecord acquire_fec_forgetful(FunctionalHash key, Cache& cache, double forget_probability,
                                    SplitMix64& forget_rng, EvalFn&& evaluator) {
  if (auto cached = cache.lookup(key)) {
    if (forget_probability > 0.0 && forget_rng.uniform() < forget_probability) {
      cache.forget(key);
    }
    return *cached;
  }
  FitnessRecord rec = evaluator();
  cache.insert(key, rec);
  return rec;
}

template <typename EvalFn>
FitnessRecord acquire_fea(FunctionalHash key, Cache& cache, int max_evals, EvalFn&& evaluator) {
  if (auto cached = cache.lookup(key)) {
    if (cached->evals >= max_evals) return *cached;
    FitnessRecord fresh = evaluator();
    if (auto updated = cache.aggregate(key, fresh.fitness, max_evals)) return *updated;
    fresh.evals = 1;
    cache.insert(key, fresh);  // key raced away; treat as a fresh entry
    return fresh;
  }
  FitnessRecord rec = evaluator();
  rec.evals = 1;
  cache.insert(key, rec);
  return rec;
}

// Mutates once, then keeps applying cumulative mutations while the child's
// hash equals the parent's, up to max_retry total mutations; on exhaustion the
// current child is returned as-is. hash_fn is charged once per loop iteration.
template <typename Space, typename HashFn>
std::pair<typename Space::Candidate, FunctionalHash> mutate_fcm(
    const Space& space, const typename Space::Candidate& parent, FunctionalHash parent_hash,
    SplitMix64& rng, int max_retry, HashFn&& hash_fn) {
  typename Space::Candidate child = space.mutate(parent, rng);
  int mutations = 1;
  FunctionalHash child_hash = hash_fn(child);
  while (child_hash == parent_hash && mutations < max_retry) {
    child = space.mutate(child, rng);
    ++mutations;
    child_hash = hash_fn(child);
  }
  return {std::move(child), child_hash};
}

// While the child's hash has been seen at least K times, applies a cumulative
// mutation and re-hashes, up to max_retry mutations total (the incoming child
// counts as the first). Increments the final hash's count and returns the
// final child with its hash.
template <typename Space, typename HashFn>
std::pair<typename Space::Candidate, FunctionalHash> gate_tabulist(
    const Space& space, typename Space::Candidate child, Tabulist& tabulist, SplitMix64& rng,
    std::uint64_t max_seen_count, int max_retry, HashFn&& hash_fn) {
  FunctionalHash key = hash_fn(child);
  int mutations = 1;
  while (tabulist.count(key) >= max_seen_count && mutations < max_retry) {
    child = space.mutate(child, rng);
    ++mutations;
    key = hash_fn(child);
  }
  tabulist.increment(key);
  return {std::move(child), key};
}

// --- controller -------------------------------------------------------------

struct RunCounters {
  std::uint64_t draws = 0;
  std::uint64_t admissions = 0;
  std::uint64_t eval_calls = 0;
  std::uint64_t hash_calls = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t forgets = 0;
  std::uint64_t collision_checks = 0;
  std::uint64_t collisions = 0;
  std::uint64_t counterfactual_evals = 0;
  PassCounters passes;
};

struct EventRow {
  std::uint64_t step = 0;
  double t = 0.0;
  std::optional<FunctionalHash> hash;
  double fitness = 0.0;
  CacheEvent event = CacheEvent::kNone;
  std::uint64_t eval_calls = 0;  // cumulative
};

struct RunSpec {
  EvolutionConfig evolution;
  HashConfig hash;
  EvalConfig eval;
  CostModel cost;
  SchedulerSpec scheduler;
  bool collect_events = false;
  bool collect_admissions = false;
  // When set, every cache hit is shadowed by a full evaluation (off the
  // clock, with its own noise stream) and compared against the cached value.
  std::optional<double> counterfactual_tolerance;
};

// Drives one evolutionary search. The scheduler calls draw() to obtain the
// next work item (selection, mutation, hashing, and any fresh evaluation all
// happen here) and commit() when the item's virtual completion time arrives
// (cache writes and population admission happen there). Only the technique's
// own streams are consumed, so runs are reproducible given the seed.
template <typename Space>
class Controller {
 public:
  using Candidate = typename Space::Candidate;

  struct WorkItem {
    Candidate candidate;
    FitnessRecord record;
    std::optional<FunctionalHash> hash;
    CacheEvent event = CacheEvent::kNone;
    double duration = 0.0;
    bool insert_on_commit = false;
    bool aggregate_on_commit = false;
    double fresh_fitness = 0.0;
  };

  Controller(const Space& space, const Task& task, const RunSpec& spec)
      : space_(space),
        task_(task),
        spec_(spec),
        cache_(spec.evolution.cache_capacity),
        rng_evo_(derive_stream_seed(spec.evolution.seed, 0)),
        rng_forget_(derive_stream_seed(spec.evolution.seed, 1)),
        rng_noise_(derive_stream_seed(spec.evolution.seed, 2)),
        rng_shadow_noise_(derive_stream_seed(spec.evolution.seed, 3)) {
    spec.evolution.validate();
  }

  bool done() const { return draws_ >= spec_.evolution.num_candidates; }

  WorkItem draw(double /*now*/) {
    const EvolutionConfig& ec = spec_.evolution;
    WorkItem item;
    int hashes = 0;

    const bool warm_up = draws_ < ec.population_size || population_.empty();
    if (warm_up) {
      item.candidate = space_.random_candidate(rng_evo_);
    } else {
      // During the distributed ramp the population can briefly hold fewer
      // than T members; the tournament shrinks to the available pool.
      int t_eff = std::min<int>(ec.tournament_size, static_cast<int>(population_.size()));
      std::size_t parent_idx = select_parent_index<Space>(population_, t_eff, rng_evo_);
      Individual<Space>& parent = population_[parent_idx];
      switch (ec.technique) {
        case Technique::kFcm: {
          if (!parent.hash) {
            parent.hash = hash_candidate(parent.candidate);
            ++hashes;
          }
          int before = static_cast<int>(counters_.hash_calls);
          auto [child, child_hash] = mutate_fcm(
              space_, parent.candidate, *parent.hash, rng_evo_, ec.max_retry,
              [this](const Candidate& c) { return hash_candidate(c); });
          hashes += static_cast<int>(counters_.hash_calls) - before;
          item.candidate = std::move(child);
          item.hash = child_hash;
          break;
        }
        default:
          item.candidate = space_.mutate(parent.candidate, rng_evo_);
          break;
      }
    }
    ++draws_;

    switch (ec.technique) {
      case Technique::kNone:
      case Technique::kFcm:
        item.record = evaluate(item.candidate);
        item.duration = hashes * spec_.cost.hash_cost + item.record.eval_cost;
        break;
      case Technique::kTabulist: {
        // Warm-up seeds are hashed and counted but never gated.
        if (warm_up) {
          FunctionalHash key = hash_candidate(item.candidate);
          ++hashes;
          item.hash = key;
          tabulist_.increment(key);
        } else {
          int before = static_cast<int>(counters_.hash_calls);
          auto [child, key] = gate_tabulist(
              space_, std::move(item.candidate), tabulist_, rng_evo_, ec.tabu_max_count,
              ec.max_retry, [this](const Candidate& c) { return hash_candidate(c); });
          hashes += static_cast<int>(counters_.hash_calls) - before;
          item.candidate = std::move(child);
          item.hash = key;
        }
        item.record = evaluate(item.candidate);
        item.duration = hashes * spec_.cost.hash_cost + item.record.eval_cost;
        break;
      }
      case Technique::kFec:
      case Technique::kFecForgetful:
      case Technique::kFea: {
        FunctionalHash key = hash_candidate(item.candidate);
        ++hashes;
        item.hash = key;
        item.duration = hashes * spec_.cost.hash_cost;
        acquire_cached(key, item);  // adds the evaluation cost on a miss
        break;
      }
    }
    return item;
  }

  void commit(const WorkItem& item, double t) {
    if (item.insert_on_commit && item.hash) {
      cache_.insert(*item.hash, item.record);
    }
    FitnessRecord admitted = item.record;
    if (item.aggregate_on_commit && item.hash) {
      if (auto updated = cache_.aggregate(*item.hash, item.fresh_fitness,
                                          spec_.evolution.max_evals)) {
        admitted = *updated;
      } else {
        FitnessRecord rec = item.record;
        rec.fitness = item.fresh_fitness;
        rec.evals = 1;
        cache_.insert(*item.hash, rec);
        admitted = rec;
      }
    }

    Individual<Space> ind;
    ind.candidate = item.candidate;
    ind.record = admitted;
    ind.hash = item.hash;
    ind.insertion_index = next_insertion_index_++;
    population_.push_back(std::move(ind));
    if (population_.size() > static_cast<std::size_t>(spec_.evolution.population_size)) {
      if (spec_.evolution.controller == ControllerKind::kRegularized) {
        population_.pop_front();
      } else {
        remove_worst();
      }
    }

    ++counters_.admissions;
    if (admitted.fitness > best_so_far_) best_so_far_ = admitted.fitness;
    double pop_best = 0.0;
    for (const Individual<Space>& p : population_) {
      if (p.record.fitness > pop_best) pop_best = p.record.fitness;
    }
    timecourse_.samples.push_back(
        {t, counters_.admissions, best_so_far_, pop_best, item.event});
    if (spec_.collect_events) {
      events_.push_back({counters_.admissions, t, item.hash, admitted.fitness, item.event,
                         counters_.eval_calls});
    }
    if (spec_.collect_admissions) {
      admissions_.emplace_back(item.candidate, admitted.fitness);
    }
  }

  // Highest-fitness member of the final population, ties to the newest.
  std::optional<Individual<Space>> final_best() const {
    if (population_.empty()) return std::nullopt;
    std::size_t best = 0;
    for (std::size_t i = 1; i < population_.size(); ++i) {
      if (population_[i].record.fitness > population_[best].record.fitness ||
          (population_[i].record.fitness == population_[best].record.fitness &&
           population_[i].insertion_index > population_[best].insertion_index)) {
        best = i;
      }
    }
    return population_[best];
  }

  const RunCounters& counters() const { return counters_; }
  const TimeCourse& timecourse() const { return timecourse_; }
  TimeCourse& timecourse() { return timecourse_; }
  const std::vector<EventRow>& events() const { return events_; }
  const std::vector<std::pair<Candidate, double>>& admissions() const { return admissions_; }
  const std::deque<Individual<Space>>& population() const { return population_; }
  const Cache& cache() const { return cache_; }
  const Tabulist& tabulist() const { return tabulist_; }
  double best_so_far() const { return best_so_far_; }

 private:
  FunctionalHash hash_candidate(const Candidate& c) {
    ++counters_.hash_calls;
    return unified_functional_hash(space_, c, task_, spec_.hash, &counters_.passes);
  }

  FitnessRecord evaluate(const Candidate& c) {
    ++counters_.eval_calls;
    return space_.evaluate(c, task_, spec_.eval, rng_noise_, &counters_.passes);
  }

  // Cache lookup at draw time; insertion/aggregation deferred to commit so a
  // missed evaluation only becomes visible to other workers once it finishes.
  void acquire_cached(FunctionalHash key, WorkItem& item) {
    const EvolutionConfig& ec = spec_.evolution;
    auto cached = cache_.lookup(key);
    if (!cached) {
      ++counters_.misses;
      item.record = evaluate(item.candidate);
      item.record.evals = 1;
      item.event = CacheEvent::kMiss;
      if (ec.technique == Technique::kFea) {
        item.aggregate_on_commit = true;
        item.fresh_fitness = item.record.fitness;
        // commit() inserts when the key is still absent.
        item.record.evals = 1;
      } else {
        item.insert_on_commit = true;
      }
      item.duration += item.record.eval_cost;
      return;
    }

    ++counters_.hits;
    item.record = *cached;
    item.event = CacheEvent::kHit;
    if (spec_.counterfactual_tolerance) {
      ++counters_.collision_checks;
      ++counters_.counterfactual_evals;
      FitnessRecord fresh = space_.evaluate(item.candidate, task_, spec_.eval,
                                            rng_shadow_noise_, &counters_.passes);
      if (std::abs(cached->fitness - fresh.fitness) > *spec_.counterfactual_tolerance) {
        ++counters_.collisions;
      }
      item.event = CacheEvent::kCollisionCheck;
    }
    switch (ec.technique) {
      case Technique::kFecForgetful:
        if (ec.forget_probability > 0.0 &&
            rng_forget_.uniform() < ec.forget_probability) {
          cache_.forget(key);
          ++counters_.forgets;
          item.event = CacheEvent::kForget;
        }
        break;
      case Technique::kFea:
        if (cached->evals < ec.max_evals) {
          FitnessRecord fresh = evaluate(item.candidate);
          item.fresh_fitness = fresh.fitness;
          item.aggregate_on_commit = true;
          item.duration += fresh.eval_cost;
        }
        break;
      default:
        break;
    }
  }

  void remove_worst() {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < population_.size(); ++i) {
      if (population_[i].record.fitness < population_[worst].record.fitness ||
          (population_[i].record.fitness == population_[worst].record.fitness &&
           population_[i].insertion_index < population_[worst].insertion_index)) {
        worst = i;
      }
    }
    population_.erase(population_.begin() + static_cast<std::ptrdiff_t>(worst));
  }

  const Space& space_;
  const Task& task_;
  RunSpec spec_;
  Cache cache_;
  Tabulist tabulist_;
  SplitMix64 rng_evo_, rng_forget_, rng_noise_, rng_shadow_noise_;
  std::deque<Individual<Space>> population_;
  std::int64_t draws_ = 0;
  std::uint64_t next_insertion_index_ = 0;
  double best_so_far_ = 0.0;
  RunCounters counters_;
  TimeCourse timecourse_;
  std::vector<EventRow> events_;
  std::vector<std::pair<Candidate, double>> admissions_;
};

// --- run drivers -------------------------------------------------------------

template <typename Space>
struct RunResult {
  TimeCourse timecourse;
  RunCounters counters;
  std::optional<Individual<Space>> final_best;
  double best_ever = 0.0;
  double final_clock = 0.0;
  std::vector<EventRow> events;
  std::vector<std::pair<typename Space::Candidate, double>> admissions;

  double hit_fraction() const {
    std::uint64_t total = counters.hits + counters.misses;
    return total == 0 ? 0.0 : static_cast<double>(counters.hits) / total;
  }
  double collision_rate() const {
    return counters.hits == 0 ? 0.0
                              : static_cast<double>(counters.collisions) / counters.hits;
  }
};

template <typename Space>
RunResult<Space> run_evolution(const Space& space, const Task& task, const RunSpec& spec) {
  Controller<Space> controller(space, task, spec);
  ScheduleOutcome outcome;
  if (spec.scheduler.mode == SchedulerSpec::Mode::kSerial) {
    outcome = run_serial(controller, spec.scheduler.budget);
  } else {
    outcome = run_distributed(controller, spec.scheduler.workers, spec.scheduler.budget);
  }
  RunResult<Space> result;
  result.timecourse = controller.timecourse();
  result.timecourse.horizon =
      outcome.budget_exhausted ? spec.scheduler.budget : outcome.final_clock;
  result.counters = controller.counters();
  result.final_best = controller.final_best();
  result.best_ever = controller.best_so_far();
  result.final_clock = outcome.final_clock;
  result.events = controller.events();
  result.admissions = controller.admissions();
  return result;
}

template <typename Space>
RunResult<Space> run_regularized_evolution(const Space& space, const Task& task, RunSpec spec) {
  spec.evolution.controller = ControllerKind::kRegularized;
  return run_evolution(space, task, spec);
}

template <typename Space>
RunResult<Space> run_classic_tournament(const Space& space, const Task& task, RunSpec spec) {
  spec.evolution.controller = ControllerKind::kClassic;
  return run_evolution(space, task, spec);
}

}  // namespace ufh
