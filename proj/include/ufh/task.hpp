#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ufh/errors.hpp"
#include "ufh/hashing.hpp"
#include "ufh/rng.hpp"

namespace ufh {

enum class TaskKind { kAffineRegression, kNonlinearRegression };

inline std::string task_kind_name(TaskKind k) {
  return k == TaskKind::kAffineRegression ? "affine_regression" : "nonlinear_regression";
}

// Scalar fitness plus evaluation metadata. `evals` counts how many evaluations
// have been aggregated into `fitness` (used by the running-mean cache).
struct FitnessRecord {
  double fitness = 0.0;
  double eval_cost = 0.0;  // virtual seconds
  int evals = 1;

  bool operator==(const FitnessRecord&) const = default;
};

// Evaluation protocol parameters. `noise_sigma` > 0 adds Gaussian noise to the
// validation error before the fitness map; eval_cost_per_example sets the
// virtual cost charged per processed example.
struct EvalConfig {
  int num_train = 100;
  int num_validation = 20;
  double noise_sigma = 0.0;
  double eval_cost_per_example = 0.001;  // virtual seconds
};

// A regression task with deterministic, index-addressable example streams.
// Examples are pure functions of (task seed, phase, index), so any consumer
// can regenerate them without shared state; the same task seed always yields
// the same sequences.
//
// Program-space view: feature vector x (dim components) with scalar label.
//   affine:    y = w.x + b
//   nonlinear: y = tanh(w.x) + b
// Graph-space view: point (x1, x2) with scalar target.
//   affine:    t = a*x1 + b*x2 + c
//   nonlinear: t = x1*x2 + x2
struct Task {
  TaskKind kind = TaskKind::kAffineRegression;
  std::uint64_t seed = 1;
  int dim = 4;                 // program-space feature dimension
  std::vector<double> weights; // size dim (program) / {a, b, c} (graph affine)
  double bias = 0.0;

  static Task make(TaskKind kind, std::uint64_t seed, int dim) {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("task dimension out of range");
    Task t;
    t.kind = kind;
    t.seed = seed;
    t.dim = dim;
    SplitMix64 rng(derive_stream_seed(seed, 0));
    t.weights.resize(static_cast<std::size_t>(std::max(dim, 3)));
    for (double& w : t.weights) w = rng.uniform_real(-1.0, 1.0);
    t.bias = rng.uniform_real(-1.0, 1.0);
    return t;
  }

  // --- program-space examples ---------------------------------------------

  static constexpr int kMaxDim = 16;

  // Fixed-capacity feature storage keeps example generation allocation-free
  // on the evaluation hot path.
  struct Example {
    std::array<double, kMaxDim> x{};
    double y = 0.0;
  };

  Example train_example(int index) const { return example(0x7261696EULL, index); }
  Example validation_example(int index) const { return example(0x76616C69ULL, index); }

  // --- graph-space examples ------------------------------------------------

  struct Point {
    double x1 = 0.0, x2 = 0.0, target = 0.0;
  };

  Point train_point(int index) const { return point(0x7261696EULL, index); }
  Point validation_point(int index) const { return point(0x76616C69ULL, index); }

  double graph_target(double x1, double x2) const {
    if (kind == TaskKind::kAffineRegression) {
      return weights[0] * x1 + weights[1] * x2 + weights[2];
    }
    return x1 * x2 + x2;
  }

  // Deterministic over [0, num_train): used to iterate train examples in a
  // fixed "shuffled" order, identical for every evaluation of this task.
  std::vector<int> train_order(int num_train) const {
    std::vector<int> order(static_cast<std::size_t>(num_train));
    for (int i = 0; i < num_train; ++i) order[static_cast<std::size_t>(i)] = i;
    SplitMix64 rng(derive_stream_seed(seed, 1));
    for (int i = num_train - 1; i > 0; --i) {
      int j = rng.uniform_int(0, i);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    return order;
  }

  // Seed for the RNG visible to candidate code during evaluation (e.g.
  // gaussian-initialization instructions). Fixed per task so evaluation is a
  // deterministic function of the candidate.
  std::uint64_t eval_rng_seed() const { return derive_stream_seed(seed, 2); }

 private:
  SplitMix64 example_rng(std::uint64_t phase_tag, int index) const {
    FunctionalHash h = hash_mix(kFnvBasis, seed);
    h = hash_mix(h, phase_tag);
    h = hash_mix(h, static_cast<std::uint64_t>(index));
    return SplitMix64(h);
  }

  Example example(std::uint64_t phase_tag, int index) const {
    SplitMix64 rng = example_rng(phase_tag, index);
    Example ex;
    double dot = 0.0;
    for (int i = 0; i < dim; ++i) {
      ex.x[static_cast<std::size_t>(i)] = rng.uniform_real(-1.0, 1.0);
      dot += weights[static_cast<std::size_t>(i)] * ex.x[static_cast<std::size_t>(i)];
    }
    ex.y = (kind == TaskKind::kAffineRegression) ? dot + bias : std::tanh(dot) + bias;
    return ex;
  }

  Point point(std::uint64_t phase_tag, int index) const {
    SplitMix64 rng = example_rng(phase_tag ^ 0x67726170ULL, index);
    Point p;
    p.x1 = rng.uniform_real(-1.0, 1.0);
    p.x2 = rng.uniform_real(-1.0, 1.0);
    p.target = graph_target(p.x1, p.x2);
    return p;
  }
};

// Counts interpreter passes; threaded through evaluation and hashing so tests
// can assert exact cost accounting.
struct PassCounters {
  std::uint64_t forward = 0;
  std::uint64_t backward = 0;
};

// Maps an accumulated validation error to [0, 1]. Total: any non-finite or
// negative intermediate collapses to the boundary values.
inline double fitness_from_error(double rms_error) {
  if (std::isnan(rms_error)) return 0.0;
  double f = 1.0 / (1.0 + rms_error);
  if (std::isnan(f)) return 0.0;
  return std::clamp(f, 0.0, 1.0);
}

// Replaces non-finite values written to candidate memory. Infinities saturate
// to +/-1e6; NaN canonicalizes to +1e6 (sign of a NaN is not portable).
inline double saturate(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return 1.0e6;
  return x > 0 ? 1.0e6 : -1.0e6;
}

}  // namespace ufh
