#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "ufh/program_space.hpp"
#include "ufh/task.hpp"

using ufh::Bank;
using ufh::EvalConfig;
using ufh::Instruction;
using ufh::PassKind;
using ufh::ProgramCandidate;
using ufh::ProgramOp;
using ufh::ProgramSpace;
using ufh::ProgramSpaceConfig;
using ufh::SplitMix64;
using ufh::Task;
using ufh::TaskKind;

namespace {

Instruction ins(ProgramOp op, int a, int b, int out) {
  Instruction i;
  i.op = op;
  i.a = static_cast<std::uint8_t>(a);
  i.b = static_cast<std::uint8_t>(b);
  i.out = static_cast<std::uint8_t>(out);
  return i;
}

Instruction set_const(int out, double value) {
  Instruction i;
  i.op = ProgramOp::kScalarConst;
  i.out = static_cast<std::uint8_t>(out);
  i.c1 = value;
  return i;
}

// Reference forward outputs over the canonical examples, via direct use of the
// execution engine; used to confirm rewrites preserve behavior.
std::vector<double> forward_trace(const ProgramSpace& space, const ProgramCandidate& c,
                                  const Task& task, int n_examples, std::uint64_t seed) {
  std::vector<double> outs;
  auto exec = space.begin_execution(c, seed);
  for (int i = 0; i < n_examples; ++i) {
    Task::Example ex = task.train_example(i);
    outs.push_back(space.run_forward(exec, ex.x.data()));
    space.run_backward(exec, ex.y);
  }
  for (int i = 0; i < n_examples; ++i) {
    Task::Example ex = task.validation_example(i);
    outs.push_back(space.run_forward(exec, ex.x.data()));
  }
  return outs;
}

}  // namespace

TEST_CASE("interpreter computes hand-checked programs") {
  ProgramSpace space;
  ProgramCandidate c;
  c.initialize = {set_const(2, 3.0), set_const(3, 4.0)};
  c.forward = {ins(ProgramOp::kScalarMul, 2, 3, 1)};  // s1 = 12
  auto exec = space.begin_execution(c, 0);
  double x[4] = {0, 0, 0, 0};
  CHECK(space.run_forward(exec, x) == 12.0);

  ProgramCandidate d;
  d.initialize = {set_const(2, 2.0)};
  d.forward = {
      ins(ProgramOp::kVectorHeaviside, 0, 0, 3),  // v3 = 1 where x > 0
      ins(ProgramOp::kScalarVectorMul, 2, 3, 1),  // v1 = 2 * v3
      ins(ProgramOp::kVectorDot, 1, 0, 1),        // s1 = v1 . v0
  };
  auto exec2 = space.begin_execution(d, 0);
  double x2[4] = {1.0, -1.0, 0.5, 0.25};
  CHECK(space.run_forward(exec2, x2) == doctest::Approx(2.0 * (1.0 + 0.5 + 0.25)));
}

TEST_CASE("saturating division never produces non-finite values") {
  ProgramSpace space;
  ProgramCandidate c;
  c.forward = {ins(ProgramOp::kScalarDiv, 2, 3, 1)};  // s1 = s2 / s3 (both zero)
  auto exec = space.begin_execution(c, 0);
  double x[4] = {0, 0, 0, 0};
  CHECK(space.run_forward(exec, x) == 1.0e6);

  c.initialize = {set_const(2, -5.0)};
  auto exec2 = space.begin_execution(c, 0);
  CHECK(space.run_forward(exec2, x) == -1.0e6);
}

TEST_CASE("empty program predicts zero; fitness matches the closed-form oracle") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 17, 4);
  EvalConfig ec;
  ec.num_train = 20;
  ec.num_validation = 50;
  SplitMix64 rng(0);
  ProgramCandidate empty;
  ufh::FitnessRecord rec = space.evaluate(empty, task, ec, rng);

  double sum_sq = 0.0;
  for (int i = 0; i < ec.num_validation; ++i) {
    double y = task.validation_example(i).y;
    sum_sq += y * y;
  }
  double expected = 1.0 / (1.0 + std::sqrt(sum_sq / ec.num_validation));
  CHECK(rec.fitness == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rec.eval_cost == doctest::Approx(0.001 * (20 + 50)));
}

TEST_CASE("affine SGD exemplar reaches high fitness on a noiseless affine task") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 5, 4);
  EvalConfig ec;
  ec.num_train = 1000;
  ec.num_validation = 50;
  SplitMix64 rng(0);
  ufh::FitnessRecord rec = space.evaluate(space.affine_sgd_exemplar(), task, ec, rng);
  CHECK(rec.fitness >= 0.95);
}

TEST_CASE("evaluation is deterministic when noise is zero") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kNonlinearRegression, 9, 4);
  EvalConfig ec;
  ec.num_train = 30;
  ec.num_validation = 10;
  SplitMix64 rng_a(1), rng_b(2);  // different streams must not matter at sigma=0
  SplitMix64 sample_rng(3);
  for (int i = 0; i < 20; ++i) {
    ProgramCandidate c = space.random_candidate(sample_rng);
    auto r1 = space.evaluate(c, task, ec, rng_a);
    auto r2 = space.evaluate(c, task, ec, rng_b);
    CHECK(r1.fitness == r2.fitness);
  }
}

TEST_CASE("fitness stays in [0,1] even for overflowing programs") {
  ProgramSpace space;
  ProgramCandidate c;
  c.initialize = {set_const(2, 1.0e5)};
  // Repeated squaring overflows to infinity, which saturates on write.
  c.forward = {
      ins(ProgramOp::kScalarMul, 2, 2, 2), ins(ProgramOp::kScalarMul, 2, 2, 2),
      ins(ProgramOp::kScalarMul, 2, 2, 2), ins(ProgramOp::kScalarMul, 2, 2, 2),
      ins(ProgramOp::kScalarMul, 2, 2, 2), ins(ProgramOp::kScalarMul, 2, 2, 2),
      ins(ProgramOp::kScalarAdd, 2, 0, 1),
  };
  Task task = Task::make(TaskKind::kAffineRegression, 3, 4);
  EvalConfig ec;
  SplitMix64 rng(0);
  ufh::FitnessRecord rec = space.evaluate(c, task, ec, rng);
  CHECK(rec.fitness >= 0.0);
  CHECK(rec.fitness <= 1.0);
  CHECK(std::isfinite(rec.fitness));
}

TEST_CASE("random candidates: degenerate bound, validity, determinism") {
  ProgramSpaceConfig cfg;
  cfg.max_len = 0;
  ProgramSpace tiny(cfg);
  SplitMix64 rng(4);
  ProgramCandidate c = tiny.random_candidate(rng);
  CHECK(c.total_length() == 0);

  ProgramSpace space;
  SplitMix64 r1(8), r2(8);
  bool all_valid = true;
  bool all_equal = true;
  for (int i = 0; i < 10000; ++i) {
    ProgramCandidate a = space.random_candidate(r1);
    if (!space.valid(a)) all_valid = false;
    if (!(a == space.random_candidate(r2))) all_equal = false;
  }
  CHECK(all_valid);
  CHECK(all_equal);
}

TEST_CASE("mutation: atomicity, kind balance, and validity") {
  ProgramSpace space;
  SplitMix64 rng(21);

  // Empty candidate: insertion is the only applicable edit.
  ProgramCandidate empty;
  for (int i = 0; i < 50; ++i) {
    ProgramCandidate child = space.mutate(empty, rng);
    CHECK(child.total_length() == 1);
  }

  int inserts = 0, deletes = 0, modifies = 0;
  SplitMix64 sample_rng(22);
  for (int i = 0; i < 10000; ++i) {
    // Parent with room in every pass and at least one instruction.
    ProgramCandidate parent;
    int len = 1 + sample_rng.uniform_int(0, 5);
    for (int j = 0; j < len; ++j) parent.forward.push_back(space.random_instruction(sample_rng));
    parent.backward.push_back(space.random_instruction(sample_rng));
    ProgramCandidate child = space.mutate(parent, rng);
    CHECK(space.valid(child));
    std::size_t pl = parent.total_length(), cl = child.total_length();
    if (cl == pl + 1) {
      ++inserts;
    } else if (cl + 1 == pl) {
      ++deletes;
    } else {
      CHECK(cl == pl);
      ++modifies;
      // At most one instruction slot differs (a resample can land unchanged).
      int diffs = 0;
      for (PassKind k : {PassKind::kInitialize, PassKind::kForward, PassKind::kBackward}) {
        const auto& ps = parent.pass(k);
        const auto& cs = child.pass(k);
        REQUIRE(ps.size() == cs.size());
        for (std::size_t j = 0; j < ps.size(); ++j) {
          if (!(ps[j] == cs[j])) ++diffs;
        }
      }
      CHECK(diffs <= 1);
    }
  }
  // Each kind within +/-5% of the uniform third.
  for (int count : {inserts, deletes, modifies}) {
    CHECK(count > 10000 / 3 - 500);
    CHECK(count < 10000 / 3 + 500);
  }
}

TEST_CASE("equivalent_rewrite preserves behavior bit-exactly") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 11, 4);
  SplitMix64 rng(31);
  int generated = 0;
  while (generated < 300) {
    ProgramCandidate c = space.random_candidate(rng);
    ProgramCandidate r;
    try {
      r = space.equivalent_rewrite(c, rng);
    } catch (const ufh::NoCapacity&) {
      continue;
    }
    ++generated;
    CHECK(r.total_length() == c.total_length() + 1);
    CHECK(space.valid(r));
    CHECK(forward_trace(space, c, task, 10, 123) == forward_trace(space, r, task, 10, 123));
  }

  // Rewrite of a rewrite is still behavior-preserving.
  SplitMix64 rng2(32);
  ProgramCandidate base = space.affine_sgd_exemplar();
  ProgramCandidate once = space.equivalent_rewrite(base, rng2);
  ProgramCandidate twice = space.equivalent_rewrite(once, rng2);
  CHECK(forward_trace(space, base, task, 10, 9) == forward_trace(space, twice, task, 10, 9));
}

TEST_CASE("equivalent_rewrite reports NoCapacity at maximum size") {
  ProgramSpaceConfig cfg;
  cfg.max_len = 2;
  ProgramSpace space(cfg);
  ProgramCandidate full;
  SplitMix64 rng(41);
  for (PassKind k : {PassKind::kInitialize, PassKind::kForward, PassKind::kBackward}) {
    full.pass(k) = {space.random_instruction(rng), space.random_instruction(rng)};
  }
  CHECK_THROWS_AS((void)space.equivalent_rewrite(full, rng), ufh::NoCapacity);
}

TEST_CASE("noise draws come from the provided stream only when enabled") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 2, 4);
  EvalConfig quiet;
  SplitMix64 rng(50), rng_ref(50);
  (void)space.evaluate(space.affine_sgd_exemplar(), task, quiet, rng);
  CHECK(rng.next_u64() == rng_ref.next_u64());  // no draws consumed at sigma=0

  EvalConfig noisy;
  noisy.noise_sigma = 0.05;
  SplitMix64 na(7), nb(7);
  auto r1 = space.evaluate(space.affine_sgd_exemplar(), task, noisy, na);
  auto r2 = space.evaluate(space.affine_sgd_exemplar(), task, noisy, nb);
  CHECK(r1.fitness == r2.fitness);  // same stream position, same draw
  auto r3 = space.evaluate(space.affine_sgd_exemplar(), task, noisy, na);
  CHECK(r1.fitness != r3.fitness);  // stream advanced
}

TEST_CASE("hashable output of a constant-prediction forward pass is the label") {
  ProgramSpace space;
  Task task = Task::make(TaskKind::kAffineRegression, 23, 4);
  ProgramCandidate zero;
  zero.forward = {set_const(1, 0.0)};  // s1 = 0
  ufh::HashConfig hc;
  auto exec = space.hash_begin(zero, task, hc.fixed_seed);
  for (int i = 0; i < 5; ++i) {
    double out = space.hash_validation_step(exec, task, hc, i);
    CHECK(out == task.validation_example(i).y);
  }
}
