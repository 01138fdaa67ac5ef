#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ufh/errors.hpp"
#include "ufh/hashing.hpp"
#include "ufh/rng.hpp"
#include "ufh/task.hpp"

namespace ufh {

// A fixed-size directed acyclic compute-graph space. Every candidate has
// max_vertices slots; slot i may only reference the two graph inputs (x1, x2)
// or slots before i, so the graph is acyclic by construction. One designated
// slot is the output. Candidates are parameter-free scalar expressions, scored
// by how well they fit the task's target function on sampled points; many
// structurally distinct graphs compute the same function, which is the
// property that matters here.

enum class GraphOp : std::uint8_t {
  kAdd,       // in0 + in1
  kSub,       // in0 - in1
  kMul,       // in0 * in1
  kNeg,       // -in0
  kRelu,      // max(in0, 0)
  kIdentity,  // in0
  kConst,     // c
  kMax,       // max(in0, in1)
};

inline constexpr int kNumGraphOps = 8;

inline int graph_op_arity(GraphOp op) {
  switch (op) {
    case GraphOp::kConst: return 0;
    case GraphOp::kNeg:
    case GraphOp::kRelu:
    case GraphOp::kIdentity: return 1;
    default: return 2;
  }
}

inline const char* graph_op_name(GraphOp op) {
  switch (op) {
    case GraphOp::kAdd: return "add";
    case GraphOp::kSub: return "sub";
    case GraphOp::kMul: return "mul";
    case GraphOp::kNeg: return "neg";
    case GraphOp::kRelu: return "relu";
    case GraphOp::kIdentity: return "identity";
    case GraphOp::kConst: return "const";
    default: return "max";
  }
}

// Input references: 0 -> x1, 1 -> x2, k+2 -> vertex slot k.
struct Vertex {
  GraphOp op = GraphOp::kConst;
  std::array<int, 2> in = {0, 0};
  double c = 0.0;

  bool operator==(const Vertex&) const = default;
};

struct GraphCandidate {
  std::vector<Vertex> vertices;
  int output = 0;  // slot index

  bool operator==(const GraphCandidate&) const = default;
};

struct GraphSpaceConfig {
  int max_vertices = 20;
  // Canonical hashing inputs are sampled uniformly from this range (fake
  // data); evaluation points come from the task and live in [-1, 1].
  double hash_input_lo = -100.0;
  double hash_input_hi = 100.0;
};

class GraphSpace {
 public:
  using Candidate = GraphCandidate;

  explicit GraphSpace(GraphSpaceConfig cfg = {}) : cfg_(cfg) {}

  const GraphSpaceConfig& config() const { return cfg_; }
  std::string name() const { return "graph"; }

  bool valid(const Candidate& c) const {
    if (static_cast<int>(c.vertices.size()) != cfg_.max_vertices) return false;
    if (c.output < 0 || c.output >= cfg_.max_vertices) return false;
    for (int i = 0; i < cfg_.max_vertices; ++i) {
      const Vertex& vx = c.vertices[static_cast<std::size_t>(i)];
      int arity = graph_op_arity(vx.op);
      for (int k = 0; k < arity; ++k) {
        int ref = vx.in[static_cast<std::size_t>(k)];
        if (ref < 0 || ref >= i + 2) return false;  // inputs or earlier slots only
      }
    }
    return true;
  }

  // --- execution -----------------------------------------------------------

  double output_on(const Candidate& c, double x1, double x2) const {
    std::vector<double> values(c.vertices.size());
    auto ref_value = [&](int ref) {
      if (ref == 0) return x1;
      if (ref == 1) return x2;
      return values[static_cast<std::size_t>(ref - 2)];
    };
    for (std::size_t i = 0; i < c.vertices.size(); ++i) {
      const Vertex& vx = c.vertices[i];
      double a = graph_op_arity(vx.op) >= 1 ? ref_value(vx.in[0]) : 0.0;
      double b = graph_op_arity(vx.op) >= 2 ? ref_value(vx.in[1]) : 0.0;
      double out = 0.0;
      switch (vx.op) {
        case GraphOp::kAdd: out = a + b; break;
        case GraphOp::kSub: out = a - b; break;
        case GraphOp::kMul: out = a * b; break;
        case GraphOp::kNeg: out = -a; break;
        case GraphOp::kRelu: out = a > 0.0 ? a : 0.0; break;
        case GraphOp::kIdentity: out = a; break;
        case GraphOp::kConst: out = vx.c; break;
        case GraphOp::kMax: out = a > b ? a : b; break;
      }
      values[i] = saturate(out);
    }
    return values[static_cast<std::size_t>(c.output)];
  }

  // Mirrors the standard evaluation protocol. The train loop carries no
  // learning for this parameter-free space but is executed (and charged) so
  // both spaces share one cost model.
  FitnessRecord evaluate(const Candidate& c, const Task& task, const EvalConfig& ec,
                         SplitMix64& noise_rng, PassCounters* counters = nullptr) const {
    for (int i = 0; i < ec.num_train; ++i) {
      Task::Point p = task.train_point(i);
      (void)output_on(c, p.x1, p.x2);
      if (counters) {
        ++counters->forward;
        ++counters->backward;
      }
    }
    double sum_sq = 0.0;
    for (int i = 0; i < ec.num_validation; ++i) {
      Task::Point p = task.validation_point(i);
      double err = p.target - output_on(c, p.x1, p.x2);
      if (counters) ++counters->forward;
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
  // Canonical inputs are fake data: points sampled once from the hash config's
  // fixed seed, uniform over the configured range, independent of the task.
  // The hashable output per canonical example is the graph's scalar output.

  struct Exec {
    const Candidate* cand = nullptr;
  };

  Exec hash_begin(const Candidate& c, const Task&, std::uint64_t,
                  PassCounters* = nullptr) const {
    return Exec{&c};
  }

  double hash_train_step(Exec& e, const Task&, const HashConfig& hc, int index,
                         PassCounters* counters = nullptr) const {
    double out = output_on(*e.cand, canonical_input(hc, 2 * index),
                           canonical_input(hc, 2 * index + 1));
    if (counters) {
      ++counters->forward;
      ++counters->backward;
    }
    return out;
  }

  double hash_validation_step(Exec& e, const Task&, const HashConfig& hc, int index,
                              PassCounters* counters = nullptr) const {
    double out = output_on(*e.cand, canonical_input(hc, 0x10000 + 2 * index),
                           canonical_input(hc, 0x10000 + 2 * index + 1));
    if (counters) ++counters->forward;
    return out;
  }

  // --- sampling and variation ----------------------------------------------

  Vertex random_vertex(int slot, SplitMix64& rng) const {
    Vertex vx;
    vx.op = static_cast<GraphOp>(rng.uniform_int(0, kNumGraphOps - 1));
    int arity = graph_op_arity(vx.op);
    for (int k = 0; k < arity; ++k) {
      vx.in[static_cast<std::size_t>(k)] = rng.uniform_int(0, slot + 1);
    }
    if (vx.op == GraphOp::kConst) vx.c = rng.uniform_real(-1.0, 1.0);
    return vx;
  }

  Candidate random_candidate(SplitMix64& rng) const {
    Candidate c;
    c.vertices.reserve(static_cast<std::size_t>(cfg_.max_vertices));
    for (int i = 0; i < cfg_.max_vertices; ++i) {
      c.vertices.push_back(random_vertex(i, rng));
    }
    c.output = rng.uniform_int(0, cfg_.max_vertices - 1);
    return c;
  }

  // One atomic edit on a single vertex: rewire (resample a vertex), reset a
  // vertex to identity, or modify one field (opcode, one input edge, constant,
  // or the output designation).
  Candidate mutate(const Candidate& parent, SplitMix64& rng) const {
    Candidate child = parent;
    int kind = rng.uniform_int(0, 2);
    int slot = rng.uniform_int(0, cfg_.max_vertices - 1);
    Vertex& vx = child.vertices[static_cast<std::size_t>(slot)];
    switch (kind) {
      case 0:  // rewire: fresh random vertex in this slot
        vx = random_vertex(slot, rng);
        break;
      case 1: {  // reset to identity of a random earlier reference
        Vertex id;
        id.op = GraphOp::kIdentity;
        id.in[0] = rng.uniform_int(0, slot + 1);
        id.in[1] = 0;
        id.c = 0.0;
        vx = id;
        break;
      }
      default: {  // modify one field
        std::vector<int> fields = {0, 1};  // 0 = opcode, 1 = output designation
        int arity = graph_op_arity(vx.op);
        for (int k = 0; k < arity; ++k) fields.push_back(2 + k);
        if (vx.op == GraphOp::kConst) fields.push_back(4);
        int f = fields[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(fields.size()) - 1))];
        if (f == 0) {
          GraphOp new_op = static_cast<GraphOp>(rng.uniform_int(0, kNumGraphOps - 1));
          int old_arity = graph_op_arity(vx.op);
          int new_arity = graph_op_arity(new_op);
          vx.op = new_op;
          for (int k = old_arity; k < new_arity; ++k) {
            vx.in[static_cast<std::size_t>(k)] = rng.uniform_int(0, slot + 1);
          }
          for (int k = new_arity; k < 2; ++k) vx.in[static_cast<std::size_t>(k)] = 0;
          vx.c = new_op == GraphOp::kConst ? rng.uniform_real(-1.0, 1.0) : 0.0;
        } else if (f == 1) {
          child.output = rng.uniform_int(0, cfg_.max_vertices - 1);
        } else if (f == 2 || f == 3) {
          vx.in[static_cast<std::size_t>(f - 2)] = rng.uniform_int(0, slot + 1);
        } else {
          if (rng.uniform() < 0.5) vx.c *= std::exp(0.3 * rng.gaussian());
          else vx.c = rng.uniform_real(-1.0, 1.0);
        }
        break;
      }
    }
    return child;
  }

  // Slots on the path from the output to the inputs.
  std::vector<bool> reachable_slots(const Candidate& c) const {
    std::vector<bool> seen(c.vertices.size(), false);
    std::vector<int> stack = {c.output};
    while (!stack.empty()) {
      int slot = stack.back();
      stack.pop_back();
      if (seen[static_cast<std::size_t>(slot)]) continue;
      seen[static_cast<std::size_t>(slot)] = true;
      const Vertex& vx = c.vertices[static_cast<std::size_t>(slot)];
      int arity = graph_op_arity(vx.op);
      for (int k = 0; k < arity; ++k) {
        int ref = vx.in[static_cast<std::size_t>(k)];
        if (ref >= 2) stack.push_back(ref - 2);
      }
    }
    return seen;
  }

  // A structurally different candidate with identical function: either an
  // unreachable slot is resampled, or an identity vertex is interposed on a
  // used edge (repurposing an unreachable slot). Throws NoCapacity when every
  // slot is on the output path.
  Candidate equivalent_rewrite(const Candidate& parent, SplitMix64& rng) const {
    std::vector<bool> reachable = reachable_slots(parent);
    std::vector<int> spare;
    for (int i = 0; i < cfg_.max_vertices; ++i) {
      if (!reachable[static_cast<std::size_t>(i)]) spare.push_back(i);
    }
    if (spare.empty()) throw NoCapacity("all graph slots are on the output path");

    // Interposition targets: (consumer slot, input index) whose reference can
    // also be made from some spare slot u (ref valid at u, and u < consumer).
    struct Edge {
      int consumer;  // slot index, or -1 for the output designation
      int input;     // 0/1 (unused for output)
      int via;       // spare slot to repurpose
    };
    std::vector<Edge> edges;
    for (int u : spare) {
      for (int ci = 0; ci < cfg_.max_vertices; ++ci) {
        if (!reachable[static_cast<std::size_t>(ci)] || ci <= u) continue;
        const Vertex& vx = parent.vertices[static_cast<std::size_t>(ci)];
        int arity = graph_op_arity(vx.op);
        for (int k = 0; k < arity; ++k) {
          if (vx.in[static_cast<std::size_t>(k)] < u + 2) edges.push_back({ci, k, u});
        }
      }
      if (u > parent.output) edges.push_back({-1, 0, u});
    }

    Candidate child = parent;
    bool interpose = !edges.empty() && rng.uniform() < 0.5;
    if (interpose) {
      const Edge& e = edges[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(edges.size()) - 1))];
      Vertex id;
      id.op = GraphOp::kIdentity;
      id.in[1] = 0;
      id.c = 0.0;
      if (e.consumer < 0) {
        id.in[0] = parent.output + 2;
        child.vertices[static_cast<std::size_t>(e.via)] = id;
        child.output = e.via;
      } else {
        id.in[0] = parent.vertices[static_cast<std::size_t>(e.consumer)]
                       .in[static_cast<std::size_t>(e.input)];
        child.vertices[static_cast<std::size_t>(e.via)] = id;
        child.vertices[static_cast<std::size_t>(e.consumer)]
            .in[static_cast<std::size_t>(e.input)] = e.via + 2;
      }
    } else {
      int slot = spare[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(spare.size()) - 1))];
      Vertex& vx = child.vertices[static_cast<std::size_t>(slot)];
      Vertex fresh = random_vertex(slot, rng);
      for (int tries = 0; fresh == vx && tries < 8; ++tries) {
        fresh = random_vertex(slot, rng);
      }
      vx = fresh;
    }
    return child;
  }

 private:
  double canonical_input(const HashConfig& hc, int index) const {
    FunctionalHash h = hash_mix(kFnvBasis, hc.fixed_seed);
    h = hash_mix(h, 0x66616B65ULL);  // fake-data stream tag
    h = hash_mix(h, static_cast<std::uint64_t>(index));
    SplitMix64 rng(h);
    return rng.uniform_real(cfg_.hash_input_lo, cfg_.hash_input_hi);
  }

  GraphSpaceConfig cfg_;
};

}  // namespace ufh
