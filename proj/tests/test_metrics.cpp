#include <cmath>
#include <vector>

#include "doctest.h"
#include "mock_space.hpp"
#include "ufh/evolution.hpp"
#include "ufh/metrics.hpp"
#include "ufh/program_space.hpp"

using ufh::auc;
using ufh::ExperimentSummary;
using ufh::mean_sem;
using ufh::ProgramSpace;
using ufh::RunSpec;
using ufh::SplitMix64;
using ufh::Task;
using ufh::TaskKind;
using ufh::Technique;
using ufh::TimeCourse;

namespace {

TimeCourse staircase(const std::vector<std::pair<double, double>>& samples, double horizon) {
  TimeCourse tc;
  tc.horizon = horizon;
  std::uint64_t step = 0;
  for (auto [t, f] : samples) tc.samples.push_back({t, ++step, f, f, ufh::CacheEvent::kNone});
  return tc;
}

// Riemann-sum oracle on a fine grid; left-continuous step function of the
// best-so-far samples, zero before the first admission.
double auc_oracle(const TimeCourse& tc, int grid_points) {
  double sum = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    double t = tc.horizon * (static_cast<double>(i) + 0.5) / grid_points;
    double f = 0.0;
    for (const auto& s : tc.samples) {
      if (s.t <= t) {
        f = s.best_fitness;
      } else {
        break;
      }
    }
    sum += f;
  }
  return sum / grid_points;
}

}  // namespace

TEST_CASE("auc on simple staircases") {
  CHECK(auc(staircase({{0.0, 0.5}}, 10.0)) == doctest::Approx(0.5));
  CHECK(auc(staircase({{0.0, 0.0}, {5.0, 1.0}}, 10.0)) == doctest::Approx(0.5));
  CHECK_THROWS_AS((void)auc(TimeCourse{}), ufh::EmptyTimeCourse);
}

TEST_CASE("auc matches a 1e5-point Riemann oracle on random staircases") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 1 + rng.uniform_int(0, 30);
    double horizon = 1.0 + rng.uniform_real(0.0, 99.0);
    std::vector<std::pair<double, double>> samples;
    double t = 0.0, f = 0.0;
    for (int i = 0; i < n; ++i) {
      t += rng.uniform_real(0.0, horizon / n);
      f = std::min(1.0, f + rng.uniform_real(0.0, 0.2));
      samples.push_back({t, f});
    }
    TimeCourse tc = staircase(samples, horizon);
    double direct = auc(tc);
    CHECK(direct == doctest::Approx(auc_oracle(tc, 100000)).epsilon(1e-4));
    CHECK(std::abs(direct - auc_oracle(tc, 100000)) < 1e-3);
    CHECK(direct >= 0.0);
    CHECK(direct <= 1.0);
  }
}

TEST_CASE("auc is monotone under pointwise dominance") {
  SplitMix64 rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + rng.uniform_int(0, 20);
    double horizon = 10.0;
    std::vector<std::pair<double, double>> lo, hi;
    double t = 0.0, f = 0.0;
    for (int i = 0; i < n; ++i) {
      t += rng.uniform_real(0.0, horizon / n);
      f = std::min(1.0, f + rng.uniform_real(0.0, 0.1));
      lo.push_back({t, f});
      hi.push_back({t, std::min(1.0, f + 0.05)});
    }
    CHECK(auc(staircase(hi, horizon)) >= auc(staircase(lo, horizon)));
  }
}

TEST_CASE("samples beyond the horizon are clipped") {
  TimeCourse tc = staircase({{0.0, 0.2}, {4.0, 0.6}, {12.0, 1.0}}, 10.0);
  CHECK(auc(tc) == doctest::Approx((0.2 * 4.0 + 0.6 * 6.0) / 10.0));
}

TEST_CASE("mean_sem formulas") {
  CHECK_THROWS_AS((void)mean_sem({1.0}), ufh::InsufficientRuns);
  auto same = mean_sem({0.7, 0.7, 0.7});
  CHECK(same.mean == doctest::Approx(0.7));
  CHECK(same.sem == doctest::Approx(0.0));
  auto two = mean_sem({0.0, 1.0});
  CHECK(two.mean == doctest::Approx(0.5));
  CHECK(two.sem == doctest::Approx(0.5));

  // Statistical sanity: 100 draws from a known gaussian.
  SplitMix64 rng(23);
  std::vector<double> xs;
  for (int i = 0; i < 100; ++i) xs.push_back(3.0 + 0.5 * rng.gaussian());
  auto g = mean_sem(xs);
  CHECK(std::abs(g.mean - 3.0) < 3.0 * g.sem + 1e-9);
}

TEST_CASE("sweep_aggregate groups by config id") {
  std::vector<ExperimentSummary> runs;
  for (int seed = 0; seed < 5; ++seed) {
    ExperimentSummary a;
    a.config_id = "baseline";
    a.seed = static_cast<std::uint64_t>(seed);
    a.auc = 0.4 + 0.01 * seed;
    runs.push_back(a);
    ExperimentSummary b;
    b.config_id = "fec";
    b.seed = static_cast<std::uint64_t>(seed);
    b.auc = 0.5 + 0.01 * seed;
    runs.push_back(b);
  }
  auto groups = ufh::sweep_aggregate(runs);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].config_id == "baseline");
  CHECK(groups[0].auc.mean == doctest::Approx(0.42));
  CHECK(groups[0].auc.count == 5);
  CHECK(groups[1].config_id == "fec");
  CHECK(groups[1].auc.mean == doctest::Approx(0.52));
}

TEST_CASE("hit and miss fractions sum to one") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 71, 4);
  RunSpec spec;
  spec.evolution.population_size = 10;
  spec.evolution.tournament_size = 3;
  spec.evolution.num_candidates = 300;
  spec.evolution.technique = Technique::kFec;
  spec.evolution.seed = 8;
  spec.eval.num_train = 10;
  spec.eval.num_validation = 5;
  spec.cost.hash_cost = 0.03;
  auto res = ufh::run_evolution(space, task, spec);
  CHECK(res.counters.hits + res.counters.misses == res.counters.admissions);
  double hit_fraction = res.hit_fraction();
  double miss_fraction =
      static_cast<double>(res.counters.misses) / (res.counters.hits + res.counters.misses);
  CHECK(hit_fraction + miss_fraction == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("counterfactual runs: zero collisions at full precision, collisions when forced") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 81, 4);
  RunSpec spec;
  spec.evolution.population_size = 50;
  spec.evolution.tournament_size = 10;
  spec.evolution.num_candidates = 10000;
  spec.evolution.technique = Technique::kFec;
  spec.evolution.seed = 3;
  spec.eval.num_train = 10;
  spec.eval.num_validation = 5;
  spec.cost.hash_cost = 0.03;
  spec.counterfactual_tolerance = 1e-9;

  // Deterministic evaluator at full mantissa precision: no collisions.
  {
    RunSpec full = spec;
    full.hash.m_bits = 52;
    auto res = ufh::run_evolution(space, task, full);
    CHECK(res.counters.collision_checks == res.counters.hits);
    CHECK(res.counters.collisions == 0);
    CHECK(res.collision_rate() == 0.0);
    CHECK(res.counters.counterfactual_evals == res.counters.hits);
  }
  // Discarding the whole mantissa forces truncation collisions.
  {
    RunSpec coarse = spec;
    coarse.hash.m_bits = 0;
    coarse.evolution.num_candidates = 4000;
    auto res = ufh::run_evolution(space, task, coarse);
    CHECK(res.counters.collisions > 0);
    CHECK(res.collision_rate() > 0.0);
  }
  // Noise below the tolerance masquerades as collisions even at full precision.
  {
    RunSpec noisy = spec;
    noisy.hash.m_bits = 52;
    noisy.evolution.num_candidates = 2000;
    noisy.eval.noise_sigma = 0.05;
    noisy.counterfactual_tolerance = 1e-9;  // far below the noise scale
    auto res = ufh::run_evolution(space, task, noisy);
    CHECK(res.counters.collisions > 0);
  }
}

TEST_CASE("counterfactual shadow evaluations do not alter FEC dynamics") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 91, 4);
  RunSpec spec;
  spec.evolution.population_size = 15;
  spec.evolution.tournament_size = 4;
  spec.evolution.num_candidates = 400;
  spec.evolution.technique = Technique::kFec;
  spec.evolution.seed = 12;
  spec.eval.num_train = 10;
  spec.eval.num_validation = 5;
  spec.cost.hash_cost = 0.02;
  spec.collect_admissions = true;

  RunSpec with_cf = spec;
  with_cf.counterfactual_tolerance = 1e-9;
  auto plain = ufh::run_evolution(space, task, spec);
  auto shadow = ufh::run_evolution(space, task, with_cf);
  REQUIRE(plain.admissions.size() == shadow.admissions.size());
  for (std::size_t i = 0; i < plain.admissions.size(); ++i) {
    CHECK(plain.admissions[i].first == shadow.admissions[i].first);
    CHECK(plain.admissions[i].second == shadow.admissions[i].second);
  }
  CHECK(plain.final_clock == shadow.final_clock);
}
