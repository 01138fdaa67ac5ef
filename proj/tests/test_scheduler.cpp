#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "mock_space.hpp"
#include "ufh/evolution.hpp"
#include "ufh/program_space.hpp"
#include "ufh/scheduler.hpp"

using ufh::ProgramSpace;
using ufh::RunSpec;
using ufh::SchedulerSpec;
using ufh::SplitMix64;
using ufh::Task;
using ufh::TaskKind;
using ufh::Technique;

namespace {

RunSpec two_candidate_spec(Technique technique) {
  RunSpec spec;
  spec.evolution.population_size = 2;
  spec.evolution.tournament_size = 1;
  spec.evolution.num_candidates = 2;
  spec.evolution.technique = technique;
  spec.evolution.seed = 1;
  spec.cost.hash_cost = 1.0;
  return spec;
}

}  // namespace

TEST_CASE("serial clock accumulates hash and evaluation costs") {
  Task task = Task::make(TaskKind::kAffineRegression, 1, 4);
  // Two candidates with costs 5 and 7, hash cost 1.
  MockSpace space;
  space.scripted_random = {10, 20};
  space.cost = [](MockSpace::Candidate c) { return c == 10 ? 5.0 : 7.0; };

  // Baseline: no hashing, final clock = 5 + 7 = 12.
  {
    MockSpace s = space;
    s.script_pos = 0;
    auto res = ufh::run_evolution(s, task, two_candidate_spec(Technique::kNone));
    CHECK(res.final_clock == 12.0);
  }
  // FEC with distinct candidates: (1 + 5) + (1 + 7) = 14.
  {
    MockSpace s = space;
    s.script_pos = 0;
    auto res = ufh::run_evolution(s, task, two_candidate_spec(Technique::kFec));
    CHECK(res.final_clock == 14.0);
  }
  // Second candidate functionally identical: (1 + 5) + 1 = 7.
  {
    MockSpace s = space;
    s.script_pos = 0;
    s.func_id = [](MockSpace::Candidate) { return 99ULL; };
    auto res = ufh::run_evolution(s, task, two_candidate_spec(Technique::kFec));
    CHECK(res.final_clock == 7.0);
    CHECK(res.counters.hits == 1);
  }
}

TEST_CASE("budget smaller than the first candidate admits nothing") {
  Task task = Task::make(TaskKind::kAffineRegression, 1, 4);
  MockSpace space;
  space.cost = [](MockSpace::Candidate) { return 10.0; };
  RunSpec spec = two_candidate_spec(Technique::kNone);
  spec.scheduler.budget = 5.0;
  auto res = ufh::run_evolution(space, task, spec);
  CHECK(res.timecourse.samples.empty());
  CHECK(res.counters.admissions == 0);
  CHECK(res.final_clock == 0.0);
}

TEST_CASE("serial conservation: final clock equals the sum of charged costs") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 21, 4);
  RunSpec spec;
  spec.evolution.population_size = 10;
  spec.evolution.tournament_size = 3;
  spec.evolution.num_candidates = 300;
  spec.evolution.technique = Technique::kFec;
  spec.evolution.seed = 5;
  spec.eval.num_train = 10;
  spec.eval.num_validation = 5;
  spec.cost.hash_cost = 0.25;
  auto res = ufh::run_evolution(space, task, spec);
  double expected = res.counters.hash_calls * 0.25 +
                    res.counters.eval_calls * spec.eval.eval_cost_per_example *
                        (spec.eval.num_train + spec.eval.num_validation);
  CHECK(res.final_clock == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("distributed W=1 reproduces serial byte-for-byte") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 31, 4);
  for (Technique technique : {Technique::kNone, Technique::kFec}) {
    RunSpec spec;
    spec.evolution.population_size = 15;
    spec.evolution.tournament_size = 4;
    spec.evolution.num_candidates = 400;
    spec.evolution.technique = technique;
    spec.evolution.seed = 9;
    spec.eval.num_train = 10;
    spec.eval.num_validation = 5;
    spec.cost.hash_cost = 0.02;

    RunSpec serial = spec;
    serial.scheduler.mode = SchedulerSpec::Mode::kSerial;
    RunSpec dist = spec;
    dist.scheduler.mode = SchedulerSpec::Mode::kDistributed;
    dist.scheduler.workers = 1;

    auto a = ufh::run_evolution(space, task, serial);
    auto b = ufh::run_evolution(space, task, dist);
    REQUIRE(a.timecourse.samples.size() == b.timecourse.samples.size());
    for (std::size_t i = 0; i < a.timecourse.samples.size(); ++i) {
      CHECK(a.timecourse.samples[i].t == b.timecourse.samples[i].t);
      CHECK(a.timecourse.samples[i].best_fitness == b.timecourse.samples[i].best_fitness);
      CHECK(a.timecourse.samples[i].population_best ==
            b.timecourse.samples[i].population_best);
    }
    CHECK(a.final_clock == b.final_clock);
  }
}

TEST_CASE("distributed: cheaper work finishes first") {
  Task task = Task::make(TaskKind::kAffineRegression, 1, 4);
  MockSpace space;
  space.scripted_random = {10, 20};
  space.cost = [](MockSpace::Candidate c) { return c == 10 ? 10.0 : 2.0; };
  RunSpec spec = two_candidate_spec(Technique::kNone);
  spec.scheduler.mode = SchedulerSpec::Mode::kDistributed;
  spec.scheduler.workers = 2;
  auto res = ufh::run_evolution(space, task, spec);
  REQUIRE(res.timecourse.samples.size() == 2);
  // Candidate 20 (cost 2) is admitted before candidate 10 (cost 10).
  CHECK(res.timecourse.samples[0].t == 2.0);
  CHECK(res.timecourse.samples[1].t == 10.0);
}

TEST_CASE("determinism: a rerun with the same seed gives identical time courses") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 41, 4);
  RunSpec spec;
  spec.evolution.population_size = 12;
  spec.evolution.tournament_size = 3;
  spec.evolution.num_candidates = 240;
  spec.evolution.technique = Technique::kFec;
  spec.evolution.seed = 4;
  spec.eval.num_train = 8;
  spec.eval.num_validation = 4;
  spec.cost.hash_cost = 0.05;
  spec.scheduler.mode = SchedulerSpec::Mode::kDistributed;
  spec.scheduler.workers = 7;
  auto a = ufh::run_evolution(space, task, spec);
  auto b = ufh::run_evolution(space, task, spec);
  REQUIRE(a.timecourse.samples.size() == b.timecourse.samples.size());
  for (std::size_t i = 0; i < a.timecourse.samples.size(); ++i) {
    CHECK(a.timecourse.samples[i].t == b.timecourse.samples[i].t);
    CHECK(a.timecourse.samples[i].best_fitness == b.timecourse.samples[i].best_fitness);
  }
}

TEST_CASE("clock monotonicity holds across all recorded events") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 51, 4);
  RunSpec spec;
  spec.evolution.population_size = 10;
  spec.evolution.tournament_size = 2;
  spec.evolution.num_candidates = 200;
  spec.evolution.technique = Technique::kFec;
  spec.evolution.seed = 2;
  spec.eval.num_train = 8;
  spec.eval.num_validation = 4;
  spec.cost.hash_cost = 0.05;
  spec.scheduler.mode = SchedulerSpec::Mode::kDistributed;
  spec.scheduler.workers = 16;
  auto res = ufh::run_evolution(space, task, spec);
  double prev = 0.0;
  for (const auto& s : res.timecourse.samples) {
    CHECK(s.t >= prev);
    prev = s.t;
  }
}

TEST_CASE("FEC alters distributed admission order on most seeds") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 61, 4);
  int differing = 0;
  const int kSeeds = 50;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    RunSpec spec;
    spec.evolution.population_size = 20;
    spec.evolution.tournament_size = 5;
    spec.evolution.num_candidates = 300;
    spec.evolution.seed = static_cast<std::uint64_t>(seed);
    spec.eval.num_train = 10;
    spec.eval.num_validation = 5;
    spec.cost.hash_cost = 0.015;
    spec.scheduler.mode = SchedulerSpec::Mode::kDistributed;
    spec.scheduler.workers = 16;
    spec.collect_admissions = true;

    RunSpec none = spec;
    none.evolution.technique = Technique::kNone;
    RunSpec fec = spec;
    fec.evolution.technique = Technique::kFec;
    auto a = ufh::run_evolution(space, task, none);
    auto b = ufh::run_evolution(space, task, fec);
    bool same = a.admissions.size() == b.admissions.size();
    if (same) {
      for (std::size_t i = 0; i < a.admissions.size(); ++i) {
        if (!(a.admissions[i].first == b.admissions[i].first)) {
          same = false;
          break;
        }
      }
    }
    if (!same) ++differing;
  }
  CHECK(differing >= kSeeds * 9 / 10);
}

TEST_CASE("predicted_speedup formula") {
  // No hits: hashing is pure overhead, ratio below 1.
  CHECK(ufh::predicted_speedup(0.0, 10, 3, 3000) < 1.0);
  CHECK(ufh::predicted_speedup(0.0, 10, 3, 3000) ==
        doctest::Approx(3000.0 / (30.0 + 3000.0)));
  // Every candidate hits: 3000 / 30 = 100x.
  CHECK(ufh::predicted_speedup(1.0, 10, 3, 3000) == doctest::Approx(100.0));
  // Hash cost equal to training cost: break-even at full hit rate.
  CHECK(ufh::predicted_speedup(1.0, 10, 3, 30) == doctest::Approx(1.0));
  CHECK_THROWS_AS((void)ufh::predicted_speedup(1.5, 10, 3, 30), ufh::DomainError);
  CHECK_THROWS_AS((void)ufh::predicted_speedup(0.5, 0, 3, 30), ufh::DomainError);
}
