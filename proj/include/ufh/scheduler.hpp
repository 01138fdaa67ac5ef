#pragma once

#include <cassert>
#include <cstdint>
#include <queue>
#include <utility>
#include <vector>

#include "ufh/errors.hpp"
#include "ufh/metrics.hpp"

namespace ufh {

// Virtual time in seconds, advanced only by completing work items.
struct VirtualClock {
  double now = 0.0;

  void advance_to(double t) {
    assert(t >= now);
    now = t;
  }
};

// Virtual cost accounting. Each hash computation costs hash_cost seconds; an
// evaluation costs its FitnessRecord::eval_cost. The default hash cost is a
// deliberate overestimate; reference configs set it to
// n_examples * n_seeds * eval_cost_per_example so hashing is charged at the
// same per-example rate as evaluation.
struct CostModel {
  double hash_cost = 10.0;
};

struct SchedulerSpec {
  enum class Mode { kSerial, kDistributed };
  Mode mode = Mode::kSerial;
  int workers = 1;
  double budget = 1.0e18;  // virtual seconds
};

struct ScheduleOutcome {
  double final_clock = 0.0;
  bool budget_exhausted = false;
};

// Strictly sequential execution: each item's full cost advances the clock
// before the next candidate is drawn. Stops when the controller's candidate
// budget is exhausted or the next completion would exceed the time budget.
template <typename Controller>
ScheduleOutcome run_serial(Controller& controller, double budget) {
  VirtualClock clock;
  ScheduleOutcome out;
  while (!controller.done()) {
    auto item = controller.draw(clock.now);
    double completes_at = clock.now + item.duration;
    if (completes_at > budget) {
      out.budget_exhausted = true;
      break;
    }
    clock.advance_to(completes_at);
    controller.commit(item, clock.now);
  }
  out.final_clock = clock.now;
  return out;
}

// Deterministic discrete-event simulation of a W-worker pool. Up to W items
// are in flight; completions are processed in virtual-time order with ties
// broken by submission order. A completing worker admits its result and
// immediately draws the next candidate from the population as of that instant.
// W = 1 reproduces run_serial exactly.
template <typename Controller>
ScheduleOutcome run_distributed(Controller& controller, int workers, double budget) {
  using Item = decltype(controller.draw(0.0));
  struct InFlight {
    double completes_at;
    std::uint64_t submission;
    Item item;
  };
  auto later = [](const InFlight& a, const InFlight& b) {
    if (a.completes_at != b.completes_at) return a.completes_at > b.completes_at;
    return a.submission > b.submission;
  };
  std::priority_queue<InFlight, std::vector<InFlight>, decltype(later)> in_flight(later);

  std::uint64_t submission = 0;
  VirtualClock clock;
  ScheduleOutcome out;
  for (int w = 0; w < workers && !controller.done(); ++w) {
    auto item = controller.draw(0.0);
    double d = item.duration;
    in_flight.push({d, submission++, std::move(item)});
  }
  while (!in_flight.empty()) {
    InFlight next = std::move(const_cast<InFlight&>(in_flight.top()));
    in_flight.pop();
    if (next.completes_at > budget) {
      out.budget_exhausted = true;
      break;
    }
    clock.advance_to(next.completes_at);
    controller.commit(next.item, clock.now);
    if (!controller.done()) {
      auto item = controller.draw(clock.now);
      double d = item.duration;
      in_flight.push({clock.now + d, submission++, std::move(item)});
    }
  }
  out.final_clock = clock.now;
  return out;
}

// Per-candidate cost ratio implied by the hashing cost model: a baseline
// evaluation costs n_train example units while a cached search costs
// n_examples * n_seeds units of hashing plus the miss fraction of evaluations.
inline double predicted_speedup(double hit_rate, int n_examples, int n_seeds, int n_train) {
  if (hit_rate < 0.0 || hit_rate > 1.0) throw DomainError("hit rate outside [0, 1]");
  if (n_examples < 1 || n_seeds < 1 || n_train < 1) throw DomainError("counts must be >= 1");
  double denom = static_cast<double>(n_examples) * n_seeds + (1.0 - hit_rate) * n_train;
  if (denom <= 0.0) throw DomainError("non-positive denominator");
  return static_cast<double>(n_train) / denom;
}

}  // namespace ufh
