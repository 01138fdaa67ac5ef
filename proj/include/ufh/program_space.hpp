#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ufh/errors.hpp"
#include "ufh/rng.hpp"
#include "ufh/task.hpp"

namespace ufh {

// An imperative search space: candidates are three straight-line instruction
// sequences (initialize / forward / backward) over a small typed virtual
// memory of scalars, vectors, and matrices. The harness feeds the feature
// vector through v0, reads the prediction from s1 after each forward pass, and
// places the label in s0 before each backward pass. Memory persists across
// examples within an evaluation, which is what lets candidates learn.

enum class Bank : std::uint8_t { kScalar, kVector, kMatrix };

enum class ProgramOp : std::uint8_t {
  kScalarConst,      // s[out] = c1
  kScalarAdd,        // s[out] = s[a] + s[b]
  kScalarSub,        // s[out] = s[a] - s[b]
  kScalarMul,        // s[out] = s[a] * s[b]
  kScalarDiv,        // s[out] = s[a] / s[b], saturating
  kScalarMax,        // s[out] = max(s[a], s[b])
  kScalarHeaviside,  // s[out] = s[a] > 0 ? 1 : 0
  kVectorAdd,        // v[out] = v[a] + v[b]
  kVectorSub,        // v[out] = v[a] - v[b]
  kScalarVectorMul,  // v[out] = s[a] * v[b]
  kVectorDot,        // s[out] = v[a] . v[b]
  kVectorMax,        // v[out] = max(v[a], v[b]) elementwise
  kVectorHeaviside,  // v[out] = heaviside(v[a]) elementwise
  kMatrixVectorMul,  // v[out] = m[a] . v[b]
  kVectorOuter,      // m[out] = v[a] (x) v[b]
  kMatrixAdd,        // m[out] = m[a] + m[b]
  kGaussianScalar,   // s[out] = gaussian(c1, c2)
  kGaussianVector,   // v[out] = gaussian(c1, c2) per component
  kGaussianMatrix,   // m[out] = gaussian(c1, c2) per entry
};

inline constexpr int kNumProgramOps = 19;

struct OpSignature {
  const char* name;
  Bank out;
  int arity;      // number of address inputs
  Bank in0, in1;  // banks of the inputs (ignored beyond arity)
  int num_consts;
  bool draws_rng;
};

inline const OpSignature& op_signature(ProgramOp op) {
  static const std::array<OpSignature, kNumProgramOps> kTable = {{
      {"scalar_const", Bank::kScalar, 0, Bank::kScalar, Bank::kScalar, 1, false},
      {"scalar_add", Bank::kScalar, 2, Bank::kScalar, Bank::kScalar, 0, false},
      {"scalar_sub", Bank::kScalar, 2, Bank::kScalar, Bank::kScalar, 0, false},
      {"scalar_mul", Bank::kScalar, 2, Bank::kScalar, Bank::kScalar, 0, false},
      {"scalar_div", Bank::kScalar, 2, Bank::kScalar, Bank::kScalar, 0, false},
      {"scalar_max", Bank::kScalar, 2, Bank::kScalar, Bank::kScalar, 0, false},
      {"scalar_heaviside", Bank::kScalar, 1, Bank::kScalar, Bank::kScalar, 0, false},
      {"vector_add", Bank::kVector, 2, Bank::kVector, Bank::kVector, 0, false},
      {"vector_sub", Bank::kVector, 2, Bank::kVector, Bank::kVector, 0, false},
      {"scalar_vector_mul", Bank::kVector, 2, Bank::kScalar, Bank::kVector, 0, false},
      {"vector_dot", Bank::kScalar, 2, Bank::kVector, Bank::kVector, 0, false},
      {"vector_max", Bank::kVector, 2, Bank::kVector, Bank::kVector, 0, false},
      {"vector_heaviside", Bank::kVector, 1, Bank::kVector, Bank::kVector, 0, false},
      {"matrix_vector_mul", Bank::kVector, 2, Bank::kMatrix, Bank::kVector, 0, false},
      {"vector_outer", Bank::kMatrix, 2, Bank::kVector, Bank::kVector, 0, false},
      {"matrix_add", Bank::kMatrix, 2, Bank::kMatrix, Bank::kMatrix, 0, false},
      {"gaussian_scalar", Bank::kScalar, 0, Bank::kScalar, Bank::kScalar, 2, true},
      {"gaussian_vector", Bank::kVector, 0, Bank::kScalar, Bank::kScalar, 2, true},
      {"gaussian_matrix", Bank::kMatrix, 0, Bank::kScalar, Bank::kScalar, 2, true},
  }};
  return kTable[static_cast<std::size_t>(op)];
}

struct Instruction {
  ProgramOp op = ProgramOp::kScalarConst;
  std::uint8_t a = 0;    // first input address (bank per signature)
  std::uint8_t b = 0;    // second input address
  std::uint8_t out = 0;  // output address
  double c1 = 0.0;       // const value / gaussian mean
  double c2 = 0.0;       // gaussian stddev

  bool operator==(const Instruction&) const = default;
};

enum class PassKind : std::uint8_t { kInitialize, kForward, kBackward };

struct ProgramCandidate {
  std::vector<Instruction> initialize;
  std::vector<Instruction> forward;
  std::vector<Instruction> backward;

  std::vector<Instruction>& pass(PassKind k) {
    switch (k) {
      case PassKind::kInitialize: return initialize;
      case PassKind::kForward: return forward;
      default: return backward;
    }
  }
  const std::vector<Instruction>& pass(PassKind k) const {
    return const_cast<ProgramCandidate*>(this)->pass(k);
  }
  std::size_t total_length() const {
    return initialize.size() + forward.size() + backward.size();
  }

  bool operator==(const ProgramCandidate&) const = default;
};

struct ProgramSpaceConfig {
  int num_scalars = 8;
  int num_vectors = 8;
  int num_matrices = 2;
  int dim = 4;       // vector dimension
  int max_len = 10;  // per pass
};

class ProgramSpace {
 public:
  using Candidate = ProgramCandidate;

  // Harness address conventions.
  static constexpr int kLabelAddr = 0;       // s0
  static constexpr int kPredictionAddr = 1;  // s1
  static constexpr int kFeaturesAddr = 0;    // v0

  explicit ProgramSpace(ProgramSpaceConfig cfg = {}) : cfg_(cfg) {}

  const ProgramSpaceConfig& config() const { return cfg_; }
  std::string name() const { return "program"; }

  int bank_size(Bank bank) const {
    switch (bank) {
      case Bank::kScalar: return cfg_.num_scalars;
      case Bank::kVector: return cfg_.num_vectors;
      default: return cfg_.num_matrices;
    }
  }

  bool valid_instruction(const Instruction& ins) const {
    const OpSignature& sig = op_signature(ins.op);
    if (ins.out >= bank_size(sig.out)) return false;
    if (sig.arity >= 1 && ins.a >= bank_size(sig.in0)) return false;
    if (sig.arity >= 2 && ins.b >= bank_size(sig.in1)) return false;
    return true;
  }

  bool valid(const Candidate& c) const {
    for (PassKind k : {PassKind::kInitialize, PassKind::kForward, PassKind::kBackward}) {
      const auto& seq = c.pass(k);
      if (seq.size() > static_cast<std::size_t>(cfg_.max_len)) return false;
      for (const Instruction& ins : seq) {
        if (!valid_instruction(ins)) return false;
      }
    }
    return true;
  }

  // --- execution -----------------------------------------------------------

  struct Exec {
    std::vector<double> s, v, m;
    SplitMix64 rng{0};
    const Candidate* prog = nullptr;
  };

  Exec begin_execution(const Candidate& c, std::uint64_t rng_seed,
                       PassCounters* counters = nullptr) const {
    Exec e;
    e.s.assign(static_cast<std::size_t>(cfg_.num_scalars), 0.0);
    e.v.assign(static_cast<std::size_t>(cfg_.num_vectors * cfg_.dim), 0.0);
    e.m.assign(static_cast<std::size_t>(cfg_.num_matrices * cfg_.dim * cfg_.dim), 0.0);
    e.rng = SplitMix64(rng_seed);
    e.prog = &c;
    run_pass(e, c.initialize);
    (void)counters;
    return e;
  }

  // Runs the forward pass on features x (length dim); returns the prediction.
  double run_forward(Exec& e, const double* x, PassCounters* counters = nullptr) const {
    double* v0 = &e.v[static_cast<std::size_t>(kFeaturesAddr * cfg_.dim)];
    for (int i = 0; i < cfg_.dim; ++i) v0[i] = x[i];
    run_pass(e, e.prog->forward);
    if (counters) ++counters->forward;
    return e.s[kPredictionAddr];
  }

  void run_backward(Exec& e, double label, PassCounters* counters = nullptr) const {
    e.s[kLabelAddr] = label;
    run_pass(e, e.prog->backward);
    if (counters) ++counters->backward;
  }

  // Standard evaluation: initialize, one forward+backward per train example in
  // the task's fixed shuffled order, then RMS error over validation examples.
  // Deterministic for noise_sigma == 0: the only experiment-stream randomness
  // consumed is the optional noise draw.
  FitnessRecord evaluate(const Candidate& c, const Task& task, const EvalConfig& ec,
                         SplitMix64& noise_rng, PassCounters* counters = nullptr) const {
    Exec e = begin_execution(c, task.eval_rng_seed(), counters);
    for (int idx : task.train_order(ec.num_train)) {
      Task::Example ex = task.train_example(idx);
      run_forward(e, ex.x.data(), counters);
      run_backward(e, ex.y, counters);
    }
    double sum_sq = 0.0;
    for (int i = 0; i < ec.num_validation; ++i) {
      Task::Example ex = task.validation_example(i);
      double pred = run_forward(e, ex.x.data(), counters);
      double err = ex.y - pred;
      sum_sq += err * err;
    }
    double rms = std::sqrt(sum_sq / ec.num_validation);
    if (ec.noise_sigma > 0.0) rms += ec.noise_sigma * noise_rng.gaussian();
    FitnessRecord rec;
    rec.fitness = fitness_from_error(rms);
    rec.eval_cost = ec.eval_cost_per_example * (ec.num_train + ec.num_validation);
    rec.evals = 1;
    return rec;
  }

  // --- hashing protocol ----------------------------------------------------
  // Canonical examples are the task's train/validation streams in index order
  // (never shuffled). The hashable output per example is the prediction error,
  // harvested from the forward output before that step's update.

  Exec hash_begin(const Candidate& c, const Task&, std::uint64_t seed,
                  PassCounters* counters = nullptr) const {
    return begin_execution(c, seed, counters);
  }

  double hash_train_step(Exec& e, const Task& task, const HashConfig&, int index,
                         PassCounters* counters = nullptr) const {
    Task::Example ex = task.train_example(index);
    double pred = run_forward(e, ex.x.data(), counters);
    double err = ex.y - pred;
    run_backward(e, ex.y, counters);
    return err;
  }

  double hash_validation_step(Exec& e, const Task& task, const HashConfig&, int index,
                              PassCounters* counters = nullptr) const {
    Task::Example ex = task.validation_example(index);
    double pred = run_forward(e, ex.x.data(), counters);
    return ex.y - pred;
  }

  // --- sampling and variation ----------------------------------------------

  Instruction random_instruction(SplitMix64& rng) const {
    Instruction ins;
    ins.op = static_cast<ProgramOp>(rng.uniform_int(0, kNumProgramOps - 1));
    const OpSignature& sig = op_signature(ins.op);
    if (sig.arity >= 1) ins.a = random_address(sig.in0, rng);
    if (sig.arity >= 2) ins.b = random_address(sig.in1, rng);
    ins.out = random_address(sig.out, rng);
    if (sig.num_consts >= 1) ins.c1 = rng.uniform_real(-1.0, 1.0);
    if (sig.num_consts >= 2) ins.c2 = rng.uniform_real(0.0, 1.0);
    return ins;
  }

  Candidate random_candidate(SplitMix64& rng) const {
    Candidate c;
    for (PassKind k : {PassKind::kInitialize, PassKind::kForward, PassKind::kBackward}) {
      int len = rng.uniform_int(0, cfg_.max_len);
      auto& seq = c.pass(k);
      seq.reserve(static_cast<std::size_t>(len));
      for (int i = 0; i < len; ++i) seq.push_back(random_instruction(rng));
    }
    return c;
  }

  // One atomic edit: insert a random instruction, delete an instruction, or
  // modify a single field of one instruction. The edit kind is uniform over
  // the kinds applicable to this candidate.
  Candidate mutate(const Candidate& parent, SplitMix64& rng) const {
    enum Kind { kInsert, kDelete, kModify };
    std::vector<Kind> applicable;
    bool has_room = false, has_instr = false;
    for (PassKind k : {PassKind::kInitialize, PassKind::kForward, PassKind::kBackward}) {
      if (parent.pass(k).size() < static_cast<std::size_t>(cfg_.max_len)) has_room = true;
      if (!parent.pass(k).empty()) has_instr = true;
    }
    if (has_room) applicable.push_back(kInsert);
    if (has_instr) {
      applicable.push_back(kDelete);
      applicable.push_back(kModify);
    }
    Candidate child = parent;
    if (applicable.empty()) return child;  // unreachable for max_len >= 1
    Kind kind = applicable[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(applicable.size()) - 1))];
    switch (kind) {
      case kInsert: {
        PassKind k = pick_pass(parent, rng, /*needs_room=*/true);
        auto& seq = child.pass(k);
        int pos = rng.uniform_int(0, static_cast<int>(seq.size()));
        seq.insert(seq.begin() + pos, random_instruction(rng));
        break;
      }
      case kDelete: {
        PassKind k = pick_pass(parent, rng, /*needs_room=*/false);
        auto& seq = child.pass(k);
        int pos = rng.uniform_int(0, static_cast<int>(seq.size()) - 1);
        seq.erase(seq.begin() + pos);
        break;
      }
      case kModify: {
        PassKind k = pick_pass(parent, rng, /*needs_room=*/false);
        auto& seq = child.pass(k);
        int pos = rng.uniform_int(0, static_cast<int>(seq.size()) - 1);
        modify_instruction(seq[static_cast<std::size_t>(pos)], rng);
        break;
      }
    }
    return child;
  }

  // Inserts one provably ineffective instruction: either its output is
  // overwritten later in the same pass before any read, or it writes an
  // address no instruction ever reads (and which the harness does not read).
  // Throws NoCapacity when no pass has room or no safe slot exists.
  Candidate equivalent_rewrite(const Candidate& parent, SplitMix64& rng) const {
    struct Option {
      PassKind pass;
      int pos;
      Bank bank;
      int addr;
    };
    std::vector<Option> options;
    collect_dead_insertions(parent, options);
    if (options.empty()) {
      throw NoCapacity("program has no room for an ineffective instruction");
    }
    const Option& opt = options[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(options.size()) - 1))];
    Candidate child = parent;
    auto& seq = child.pass(opt.pass);
    seq.insert(seq.begin() + opt.pos, random_pure_instruction(opt.bank, opt.addr, rng));
    return child;
  }

  // The classic stochastic-gradient affine regressor, expressible in this op
  // set: v1 holds the weights, s4 the bias, s2 the learning rate.
  Candidate affine_sgd_exemplar(double learning_rate = 0.01) const {
    auto ins = [](ProgramOp op, int a, int b, int out) {
      Instruction i;
      i.op = op;
      i.a = static_cast<std::uint8_t>(a);
      i.b = static_cast<std::uint8_t>(b);
      i.out = static_cast<std::uint8_t>(out);
      return i;
    };
    Candidate c;
    Instruction lr;
    lr.op = ProgramOp::kScalarConst;
    lr.out = 2;
    lr.c1 = learning_rate;
    c.initialize = {lr};
    c.forward = {
        ins(ProgramOp::kVectorDot, 1, 0, 5),   // s5 = v1 . v0
        ins(ProgramOp::kScalarAdd, 5, 4, 1),   // s1 = s5 + s4
    };
    c.backward = {
        ins(ProgramOp::kScalarSub, 0, 1, 3),        // s3 = s0 - s1
        ins(ProgramOp::kScalarMul, 2, 3, 3),        // s3 = s2 * s3
        ins(ProgramOp::kScalarAdd, 4, 3, 4),        // s4 = s4 + s3
        ins(ProgramOp::kScalarVectorMul, 3, 0, 2),  // v2 = s3 * v0
        ins(ProgramOp::kVectorAdd, 1, 2, 1),        // v1 = v1 + v2
    };
    return c;
  }

 private:
  std::uint8_t random_address(Bank bank, SplitMix64& rng) const {
    return static_cast<std::uint8_t>(rng.uniform_int(0, bank_size(bank) - 1));
  }

  PassKind pick_pass(const Candidate& c, SplitMix64& rng, bool needs_room) const {
    std::vector<PassKind> eligible;
    for (PassKind k : {PassKind::kInitialize, PassKind::kForward, PassKind::kBackward}) {
      std::size_t len = c.pass(k).size();
      if (needs_room ? len < static_cast<std::size_t>(cfg_.max_len) : len > 0) {
        eligible.push_back(k);
      }
    }
    return eligible[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(eligible.size()) - 1))];
  }

  void modify_instruction(Instruction& ins, SplitMix64& rng) const {
    const OpSignature& sig = op_signature(ins.op);
    // Fields: 0 = opcode (full resample), 1 = out, 2 = a, 3 = b, 4 = c1, 5 = c2.
    std::vector<int> fields = {0, 1};
    if (sig.arity >= 1) fields.push_back(2);
    if (sig.arity >= 2) fields.push_back(3);
    if (sig.num_consts >= 1) fields.push_back(4);
    if (sig.num_consts >= 2) fields.push_back(5);
    int field = fields[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(fields.size()) - 1))];
    switch (field) {
      case 0: ins = random_instruction(rng); break;
      case 1: ins.out = random_address(sig.out, rng); break;
      case 2: ins.a = random_address(sig.in0, rng); break;
      case 3: ins.b = random_address(sig.in1, rng); break;
      case 4:
        if (rng.uniform() < 0.5) ins.c1 *= std::exp(0.3 * rng.gaussian());
        else ins.c1 = rng.uniform_real(-1.0, 1.0);
        break;
      default:
        if (rng.uniform() < 0.5) ins.c2 *= std::exp(0.3 * rng.gaussian());
        else ins.c2 = rng.uniform_real(0.0, 1.0);
        break;
    }
  }

  struct AddrRef {
    Bank bank;
    int addr;
  };

  static void instruction_reads(const Instruction& ins, std::vector<AddrRef>& out) {
    const OpSignature& sig = op_signature(ins.op);
    if (sig.arity >= 1) out.push_back({sig.in0, ins.a});
    if (sig.arity >= 2) out.push_back({sig.in1, ins.b});
  }

  template <typename Option>
  void collect_dead_insertions(const Candidate& c, std::vector<Option>& options) const {
    // Addresses read by any instruction anywhere.
    std::vector<AddrRef> reads;
    for (PassKind k : {PassKind::kInitialize, PassKind::kForward, PassKind::kBackward}) {
      for (const Instruction& ins : c.pass(k)) instruction_reads(ins, reads);
    }
    auto is_read_anywhere = [&](Bank bank, int addr) {
      for (const AddrRef& r : reads) {
        if (r.bank == bank && r.addr == addr) return true;
      }
      return false;
    };
    for (PassKind k : {PassKind::kInitialize, PassKind::kForward, PassKind::kBackward}) {
      const auto& seq = c.pass(k);
      if (seq.size() >= static_cast<std::size_t>(cfg_.max_len)) continue;
      for (int pos = 0; pos <= static_cast<int>(seq.size()); ++pos) {
        for (Bank bank : {Bank::kScalar, Bank::kVector, Bank::kMatrix}) {
          for (int addr = 0; addr < bank_size(bank); ++addr) {
            if (insertion_is_dead(c, seq, k, pos, bank, addr, is_read_anywhere)) {
              options.push_back({k, pos, bank, addr});
            }
          }
        }
      }
    }
  }

  template <typename ReadPred>
  bool insertion_is_dead(const Candidate&, const std::vector<Instruction>& seq,
                         PassKind, int pos, Bank bank, int addr,
                         const ReadPred& is_read_anywhere) const {
    // Overwritten within this pass before any read?
    std::vector<AddrRef> reads;
    for (std::size_t i = static_cast<std::size_t>(pos); i < seq.size(); ++i) {
      const Instruction& ins = seq[i];
      reads.clear();
      instruction_reads(ins, reads);
      for (const AddrRef& r : reads) {
        if (r.bank == bank && r.addr == addr) return false;
      }
      const OpSignature& sig = op_signature(ins.op);
      if (sig.out == bank && ins.out == addr) return true;  // killed
    }
    // Not touched in the rest of the pass: dead only if never read by any
    // instruction and not the harness-read prediction register.
    if (bank == Bank::kScalar && addr == kPredictionAddr) return false;
    return !is_read_anywhere(bank, addr);
  }

  // A random RNG-free instruction writing the given address.
  Instruction random_pure_instruction(Bank bank, int addr, SplitMix64& rng) const {
    static const std::vector<ProgramOp> kScalarOps = {
        ProgramOp::kScalarConst, ProgramOp::kScalarAdd, ProgramOp::kScalarSub,
        ProgramOp::kScalarMul, ProgramOp::kScalarDiv, ProgramOp::kScalarMax,
        ProgramOp::kScalarHeaviside};
    static const std::vector<ProgramOp> kVectorOps = {
        ProgramOp::kVectorAdd, ProgramOp::kVectorSub, ProgramOp::kScalarVectorMul,
        ProgramOp::kVectorMax, ProgramOp::kVectorHeaviside, ProgramOp::kMatrixVectorMul};
    static const std::vector<ProgramOp> kMatrixOps = {ProgramOp::kVectorOuter,
                                                      ProgramOp::kMatrixAdd};
    const std::vector<ProgramOp>& pool = bank == Bank::kScalar   ? kScalarOps
                                         : bank == Bank::kVector ? kVectorOps
                                                                 : kMatrixOps;
    Instruction ins;
    ins.op = pool[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(pool.size()) - 1))];
    const OpSignature& sig = op_signature(ins.op);
    if (sig.arity >= 1) ins.a = random_address(sig.in0, rng);
    if (sig.arity >= 2) ins.b = random_address(sig.in1, rng);
    ins.out = static_cast<std::uint8_t>(addr);
    if (sig.num_consts >= 1) ins.c1 = rng.uniform_real(-1.0, 1.0);
    return ins;
  }

  void run_pass(Exec& e, const std::vector<Instruction>& seq) const {
    const int dim = cfg_.dim;
    for (const Instruction& ins : seq) {
      double* s = e.s.data();
      double* v = e.v.data();
      double* m = e.m.data();
      auto va = [&] { return v + ins.a * dim; };
      auto vb = [&] { return v + ins.b * dim; };
      auto vo = [&] { return v + ins.out * dim; };
      switch (ins.op) {
        case ProgramOp::kScalarConst: s[ins.out] = ins.c1; break;
        case ProgramOp::kScalarAdd: s[ins.out] = saturate(s[ins.a] + s[ins.b]); break;
        case ProgramOp::kScalarSub: s[ins.out] = saturate(s[ins.a] - s[ins.b]); break;
        case ProgramOp::kScalarMul: s[ins.out] = saturate(s[ins.a] * s[ins.b]); break;
        case ProgramOp::kScalarDiv:
          // Explicit zero-divisor rule keeps results platform-independent
          // (0/0 NaN payloads are not portable).
          if (s[ins.b] == 0.0) {
            s[ins.out] = s[ins.a] < 0 ? -1.0e6 : 1.0e6;
          } else {
            s[ins.out] = saturate(s[ins.a] / s[ins.b]);
          }
          break;
        case ProgramOp::kScalarMax:
          s[ins.out] = s[ins.a] > s[ins.b] ? s[ins.a] : s[ins.b];
          break;
        case ProgramOp::kScalarHeaviside: s[ins.out] = s[ins.a] > 0.0 ? 1.0 : 0.0; break;
        case ProgramOp::kVectorAdd: {
          double *pa = va(), *pb = vb(), *po = vo();
          for (int i = 0; i < dim; ++i) po[i] = saturate(pa[i] + pb[i]);
          break;
        }
        case ProgramOp::kVectorSub: {
          double *pa = va(), *pb = vb(), *po = vo();
          for (int i = 0; i < dim; ++i) po[i] = saturate(pa[i] - pb[i]);
          break;
        }
        case ProgramOp::kScalarVectorMul: {
          double *pb = vb(), *po = vo();
          for (int i = 0; i < dim; ++i) po[i] = saturate(s[ins.a] * pb[i]);
          break;
        }
        case ProgramOp::kVectorDot: {
          double *pa = va(), *pb = vb();
          double acc = 0.0;
          for (int i = 0; i < dim; ++i) acc += pa[i] * pb[i];
          s[ins.out] = saturate(acc);
          break;
        }
        case ProgramOp::kVectorMax: {
          double *pa = va(), *pb = vb(), *po = vo();
          for (int i = 0; i < dim; ++i) po[i] = pa[i] > pb[i] ? pa[i] : pb[i];
          break;
        }
        case ProgramOp::kVectorHeaviside: {
          double *pa = va(), *po = vo();
          for (int i = 0; i < dim; ++i) po[i] = pa[i] > 0.0 ? 1.0 : 0.0;
          break;
        }
        case ProgramOp::kMatrixVectorMul: {
          double* ma = m + ins.a * dim * dim;
          double *pb = vb(), *po = vo();
          std::array<double, 16> tmp;  // dim <= 16, enforced at config validation
          for (int i = 0; i < dim; ++i) {
            double acc = 0.0;
            for (int j = 0; j < dim; ++j) acc += ma[i * dim + j] * pb[j];
            tmp[static_cast<std::size_t>(i)] = saturate(acc);
          }
          for (int i = 0; i < dim; ++i) po[i] = tmp[static_cast<std::size_t>(i)];
          break;
        }
        case ProgramOp::kVectorOuter: {
          double* mo = m + ins.out * dim * dim;
          double *pa = va(), *pb = vb();
          for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) mo[i * dim + j] = saturate(pa[i] * pb[j]);
          }
          break;
        }
        case ProgramOp::kMatrixAdd: {
          double* ma = m + ins.a * dim * dim;
          double* mb = m + ins.b * dim * dim;
          double* mo = m + ins.out * dim * dim;
          for (int i = 0; i < dim * dim; ++i) mo[i] = saturate(ma[i] + mb[i]);
          break;
        }
        case ProgramOp::kGaussianScalar:
          s[ins.out] = saturate(e.rng.gaussian(ins.c1, ins.c2));
          break;
        case ProgramOp::kGaussianVector: {
          double* po = vo();
          for (int i = 0; i < dim; ++i) po[i] = saturate(e.rng.gaussian(ins.c1, ins.c2));
          break;
        }
        case ProgramOp::kGaussianMatrix: {
          double* mo = m + ins.out * dim * dim;
          for (int i = 0; i < dim * dim; ++i) mo[i] = saturate(e.rng.gaussian(ins.c1, ins.c2));
          break;
        }
      }
    }
  }

  ProgramSpaceConfig cfg_;
};

}  // namespace ufh
