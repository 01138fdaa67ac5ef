#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ufh/errors.hpp"
#include "ufh/evolution.hpp"
#include "ufh/graph_space.hpp"
#include "ufh/metrics.hpp"
#include "ufh/program_space.hpp"

namespace ufh {

using nlohmann::json;

// Shortest round-trip text for a double; used everywhere a float enters a CSV
// so that identical runs produce byte-identical files.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Rejects keys outside the allowed set; the config format is fail-closed so a
// typo cannot silently fall back to a default.
inline void reject_unknown_keys(const json& obj, const std::string& where,
                                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError(where + ": unknown field \"" + key + "\"");
  }
}

// --- candidate serialization -------------------------------------------------

inline ProgramOp program_op_from_name(const std::string& name) {
  for (int i = 0; i < kNumProgramOps; ++i) {
    ProgramOp op = static_cast<ProgramOp>(i);
    if (name == op_signature(op).name) return op;
  }
  throw ConfigError("unknown program opcode \"" + name + "\"");
}

inline json instruction_to_json(const Instruction& ins) {
  const OpSignature& sig = op_signature(ins.op);
  json j;
  j["op"] = sig.name;
  if (sig.arity >= 1) j["a"] = ins.a;
  if (sig.arity >= 2) j["b"] = ins.b;
  j["out"] = ins.out;
  if (sig.num_consts == 1) j["value"] = ins.c1;
  if (sig.num_consts == 2) {
    j["mean"] = ins.c1;
    j["stddev"] = ins.c2;
  }
  return j;
}

inline Instruction instruction_from_json(const json& j, const ProgramSpace& space) {
  if (!j.is_object() || !j.contains("op")) throw ConfigError("instruction: missing op");
  Instruction ins;
  ins.op = program_op_from_name(j.at("op").get<std::string>());
  const OpSignature& sig = op_signature(ins.op);
  std::vector<const char*> allowed = {"op", "out"};
  if (sig.arity >= 1) allowed.push_back("a");
  if (sig.arity >= 2) allowed.push_back("b");
  if (sig.num_consts == 1) allowed.push_back("value");
  if (sig.num_consts == 2) {
    allowed.push_back("mean");
    allowed.push_back("stddev");
  }
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) ok = true;
    }
    if (!ok) throw ConfigError(std::string("instruction ") + sig.name + ": unknown field \"" + key + "\"");
  }
  if (sig.arity >= 1) ins.a = static_cast<std::uint8_t>(j.at("a").get<int>());
  if (sig.arity >= 2) ins.b = static_cast<std::uint8_t>(j.at("b").get<int>());
  ins.out = static_cast<std::uint8_t>(j.at("out").get<int>());
  if (sig.num_consts == 1) ins.c1 = j.at("value").get<double>();
  if (sig.num_consts == 2) {
    ins.c1 = j.at("mean").get<double>();
    ins.c2 = j.at("stddev").get<double>();
  }
  if (!space.valid_instruction(ins)) {
    throw ConfigError(std::string("instruction ") + sig.name + ": address out of range");
  }
  return ins;
}

inline json candidate_to_json(const ProgramCandidate& c) {
  json j;
  j["kind"] = "program";
  for (auto [name, pass] : {std::pair<const char*, const std::vector<Instruction>*>{
                                "initialize", &c.initialize},
                            {"forward", &c.forward},
                            {"backward", &c.backward}}) {
    json seq = json::array();
    for (const Instruction& ins : *pass) seq.push_back(instruction_to_json(ins));
    j[name] = seq;
  }
  return j;
}

inline ProgramCandidate program_candidate_from_json(const json& j, const ProgramSpace& space) {
  reject_unknown_keys(j, "candidate", {"kind", "initialize", "forward", "backward"});
  if (j.value("kind", "") != std::string("program")) {
    throw ConfigError("candidate: kind must be \"program\"");
  }
  ProgramCandidate c;
  for (auto [name, pass] : {std::pair<const char*, std::vector<Instruction>*>{
                                "initialize", &c.initialize},
                            {"forward", &c.forward},
                            {"backward", &c.backward}}) {
    if (!j.contains(name)) continue;
    for (const json& ins : j.at(name)) pass->push_back(instruction_from_json(ins, space));
  }
  if (!space.valid(c)) throw ConfigError("candidate: exceeds the space's length bounds");
  return c;
}

inline GraphOp graph_op_from_name(const std::string& name) {
  for (int i = 0; i < kNumGraphOps; ++i) {
    GraphOp op = static_cast<GraphOp>(i);
    if (name == graph_op_name(op)) return op;
  }
  throw ConfigError("unknown graph opcode \"" + name + "\"");
}

inline json candidate_to_json(const GraphCandidate& c) {
  json j;
  j["kind"] = "graph";
  json verts = json::array();
  for (const Vertex& v : c.vertices) {
    json vj;
    vj["op"] = graph_op_name(v.op);
    int arity = graph_op_arity(v.op);
    if (arity > 0) {
      json in = json::array();
      for (int k = 0; k < arity; ++k) in.push_back(v.in[static_cast<std::size_t>(k)]);
      vj["inputs"] = in;
    }
    if (v.op == GraphOp::kConst) vj["value"] = v.c;
    verts.push_back(vj);
  }
  j["vertices"] = verts;
  j["output"] = c.output;
  return j;
}

inline GraphCandidate graph_candidate_from_json(const json& j, const GraphSpace& space) {
  reject_unknown_keys(j, "candidate", {"kind", "vertices", "output"});
  if (j.value("kind", "") != std::string("graph")) {
    throw ConfigError("candidate: kind must be \"graph\"");
  }
  GraphCandidate c;
  if (!j.contains("vertices") || !j.contains("output")) {
    throw ConfigError("candidate: graph needs vertices and output");
  }
  for (const json& vj : j.at("vertices")) {
    reject_unknown_keys(vj, "vertex", {"op", "inputs", "value"});
    Vertex v;
    v.op = graph_op_from_name(vj.at("op").get<std::string>());
    int arity = graph_op_arity(v.op);
    if (arity > 0) {
      const json& in = vj.at("inputs");
      if (static_cast<int>(in.size()) != arity) throw ConfigError("vertex: wrong arity");
      for (int k = 0; k < arity; ++k) v.in[static_cast<std::size_t>(k)] = in[static_cast<std::size_t>(k)].get<int>();
    }
    if (v.op == GraphOp::kConst) v.c = vj.at("value").get<double>();
    c.vertices.push_back(v);
  }
  c.output = j.at("output").get<int>();
  if (!space.valid(c)) throw ConfigError("candidate: invalid graph (slot count, refs, or output)");
  return c;
}

// --- experiment configuration -------------------------------------------------

struct SweepSpec {
  std::vector<int> population_size;
  std::vector<int> tournament_size;
  std::vector<std::string> technique;
  std::vector<int> m_bits;
  std::vector<double> forget_probability;
  int max_runs = 4096;
};

struct ExperimentConfig {
  int schema_version = 1;
  std::string space_kind = "program";
  ProgramSpaceConfig program;
  GraphSpaceConfig graph;
  TaskKind task_kind = TaskKind::kAffineRegression;
  std::uint64_t task_seed = 1;
  EvalConfig eval;
  EvolutionConfig evolution;  // seed field is overridden per run
  HashConfig hash;
  CostModel cost;
  SchedulerSpec scheduler;
  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir;
  std::optional<SweepSpec> sweep;
  double counterfactual_tolerance = 1e-9;

  RunSpec run_spec(std::uint64_t seed) const {
    RunSpec spec;
    spec.evolution = evolution;
    spec.evolution.seed = seed;
    spec.hash = hash;
    spec.eval = eval;
    spec.cost = cost;
    spec.scheduler = scheduler;
    return spec;
  }
};

inline Technique technique_from_name(const std::string& name) {
  for (Technique t : {Technique::kNone, Technique::kFec, Technique::kFecForgetful,
                      Technique::kFea, Technique::kFcm, Technique::kTabulist}) {
    if (name == technique_name(t)) return t;
  }
  throw ConfigError("evolution.technique: unknown value \"" + name + "\"");
}

inline TaskKind task_kind_from_name(const std::string& name) {
  if (name == "affine_regression") return TaskKind::kAffineRegression;
  if (name == "nonlinear_regression") return TaskKind::kNonlinearRegression;
  throw ConfigError("task.kind: unknown value \"" + name + "\"");
}

namespace detail {

template <typename T>
T require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing required field \"" + key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": field \"" + key + "\" has the wrong type");
  }
}

template <typename T>
void assign_if(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": field \"" + key + "\" has the wrong type");
  }
}

}  // namespace detail

inline ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  reject_unknown_keys(j, "config",
                      {"schema_version", "space", "task", "evolution", "hash", "cost",
                       "scheduler", "seeds", "output_dir", "sweep", "counterfactual"});
  cfg.schema_version = detail::require<int>(j, "config", "schema_version");
  if (cfg.schema_version != 1) throw ConfigError("config: schema_version must be 1");

  if (j.contains("space")) {
    const json& s = j.at("space");
    reject_unknown_keys(s, "space",
                        {"kind", "max_len", "num_scalars", "num_vectors", "num_matrices",
                         "vector_dim", "max_vertices", "hash_input_lo", "hash_input_hi"});
    cfg.space_kind = detail::require<std::string>(s, "space", "kind");
    if (cfg.space_kind == "program") {
      detail::assign_if(s, "space", "max_len", cfg.program.max_len);
      detail::assign_if(s, "space", "num_scalars", cfg.program.num_scalars);
      detail::assign_if(s, "space", "num_vectors", cfg.program.num_vectors);
      detail::assign_if(s, "space", "num_matrices", cfg.program.num_matrices);
      detail::assign_if(s, "space", "vector_dim", cfg.program.dim);
      if (cfg.program.max_len < 0) throw ConfigError("space.max_len: must be >= 0");
      if (cfg.program.dim < 1 || cfg.program.dim > 16)
        throw ConfigError("space.vector_dim: must be in [1, 16]");
      if (cfg.program.num_scalars < 2 || cfg.program.num_scalars > 256 ||
          cfg.program.num_vectors < 1 || cfg.program.num_vectors > 256 ||
          cfg.program.num_matrices < 1 || cfg.program.num_matrices > 256) {
        throw ConfigError("space: memory bank sizes out of range");
      }
    } else if (cfg.space_kind == "graph") {
      detail::assign_if(s, "space", "max_vertices", cfg.graph.max_vertices);
      detail::assign_if(s, "space", "hash_input_lo", cfg.graph.hash_input_lo);
      detail::assign_if(s, "space", "hash_input_hi", cfg.graph.hash_input_hi);
      if (cfg.graph.max_vertices < 1 || cfg.graph.max_vertices > 1024)
        throw ConfigError("space.max_vertices: must be in [1, 1024]");
      if (!(cfg.graph.hash_input_lo < cfg.graph.hash_input_hi))
        throw ConfigError("space: hash_input_lo must be below hash_input_hi");
    } else {
      throw ConfigError("space.kind: must be \"program\" or \"graph\"");
    }
  }

  if (j.contains("task")) {
    const json& t = j.at("task");
    reject_unknown_keys(t, "task", {"kind", "seed", "num_train", "num_validation", "noise_sigma"});
    if (t.contains("kind")) cfg.task_kind = task_kind_from_name(t.at("kind").get<std::string>());
    detail::assign_if(t, "task", "seed", cfg.task_seed);
    detail::assign_if(t, "task", "num_train", cfg.eval.num_train);
    detail::assign_if(t, "task", "num_validation", cfg.eval.num_validation);
    detail::assign_if(t, "task", "noise_sigma", cfg.eval.noise_sigma);
    if (cfg.eval.num_train < 1) throw ConfigError("task.num_train: must be >= 1");
    if (cfg.eval.num_validation < 1) throw ConfigError("task.num_validation: must be >= 1");
    if (cfg.eval.noise_sigma < 0) throw ConfigError("task.noise_sigma: must be >= 0");
  }

  if (j.contains("evolution")) {
    const json& e = j.at("evolution");
    reject_unknown_keys(e, "evolution",
                        {"controller", "population_size", "tournament_size", "num_candidates",
                         "technique", "forget_probability", "max_evals", "tabu_max_count",
                         "max_retry", "cache_capacity"});
    if (e.contains("controller")) {
      std::string c = e.at("controller").get<std::string>();
      if (c == "regularized") cfg.evolution.controller = ControllerKind::kRegularized;
      else if (c == "classic") cfg.evolution.controller = ControllerKind::kClassic;
      else throw ConfigError("evolution.controller: must be \"regularized\" or \"classic\"");
    }
    detail::assign_if(e, "evolution", "population_size", cfg.evolution.population_size);
    detail::assign_if(e, "evolution", "tournament_size", cfg.evolution.tournament_size);
    detail::assign_if(e, "evolution", "num_candidates", cfg.evolution.num_candidates);
    if (e.contains("technique")) {
      cfg.evolution.technique = technique_from_name(e.at("technique").get<std::string>());
    }
    detail::assign_if(e, "evolution", "forget_probability", cfg.evolution.forget_probability);
    detail::assign_if(e, "evolution", "max_evals", cfg.evolution.max_evals);
    detail::assign_if(e, "evolution", "tabu_max_count", cfg.evolution.tabu_max_count);
    detail::assign_if(e, "evolution", "max_retry", cfg.evolution.max_retry);
    detail::assign_if(e, "evolution", "cache_capacity", cfg.evolution.cache_capacity);
  }

  if (j.contains("hash")) {
    const json& h = j.at("hash");
    reject_unknown_keys(h, "hash", {"m_bits", "n_examples", "n_seeds", "fixed_seed"});
    detail::assign_if(h, "hash", "m_bits", cfg.hash.m_bits);
    detail::assign_if(h, "hash", "n_examples", cfg.hash.n_examples);
    detail::assign_if(h, "hash", "n_seeds", cfg.hash.n_seeds);
    detail::assign_if(h, "hash", "fixed_seed", cfg.hash.fixed_seed);
    if (cfg.hash.m_bits < 0 || cfg.hash.m_bits > 52)
      throw ConfigError("hash.m_bits: must be in [0, 52]");
    if (cfg.hash.n_examples < 1) throw ConfigError("hash.n_examples: must be >= 1");
    if (cfg.hash.n_seeds < 1) throw ConfigError("hash.n_seeds: must be >= 1");
  }

  if (j.contains("cost")) {
    const json& c = j.at("cost");
    reject_unknown_keys(c, "cost", {"hash_cost", "eval_cost_per_example"});
    detail::assign_if(c, "cost", "hash_cost", cfg.cost.hash_cost);
    detail::assign_if(c, "cost", "eval_cost_per_example", cfg.eval.eval_cost_per_example);
    if (cfg.cost.hash_cost < 0) throw ConfigError("cost.hash_cost: must be >= 0");
    if (cfg.eval.eval_cost_per_example <= 0)
      throw ConfigError("cost.eval_cost_per_example: must be > 0");
  }

  if (j.contains("scheduler")) {
    const json& s = j.at("scheduler");
    reject_unknown_keys(s, "scheduler", {"mode", "workers", "budget"});
    if (s.contains("mode")) {
      std::string m = s.at("mode").get<std::string>();
      if (m == "serial") cfg.scheduler.mode = SchedulerSpec::Mode::kSerial;
      else if (m == "distributed") cfg.scheduler.mode = SchedulerSpec::Mode::kDistributed;
      else throw ConfigError("scheduler.mode: must be \"serial\" or \"distributed\"");
    }
    detail::assign_if(s, "scheduler", "workers", cfg.scheduler.workers);
    detail::assign_if(s, "scheduler", "budget", cfg.scheduler.budget);
    if (cfg.scheduler.workers < 1) throw ConfigError("scheduler.workers: must be >= 1");
    if (!(cfg.scheduler.budget > 0)) throw ConfigError("scheduler.budget: must be > 0");
  }

  if (j.contains("seeds")) {
    cfg.seeds = detail::require<std::vector<std::uint64_t>>(j, "config", "seeds");
    if (cfg.seeds.empty()) throw ConfigError("seeds: must not be empty");
  }
  detail::assign_if(j, "config", "output_dir", cfg.output_dir);

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown_keys(s, "sweep",
                        {"population_size", "tournament_size", "technique", "m_bits",
                         "forget_probability", "max_runs"});
    for (const char* axis : {"population_size", "tournament_size", "technique", "m_bits",
                             "forget_probability"}) {
      if (s.contains(axis) && s.at(axis).is_array() && s.at(axis).empty()) {
        throw ConfigError(std::string("sweep.") + axis + ": axis list must not be empty");
      }
    }
    SweepSpec sweep;
    detail::assign_if(s, "sweep", "population_size", sweep.population_size);
    detail::assign_if(s, "sweep", "tournament_size", sweep.tournament_size);
    detail::assign_if(s, "sweep", "technique", sweep.technique);
    detail::assign_if(s, "sweep", "m_bits", sweep.m_bits);
    detail::assign_if(s, "sweep", "forget_probability", sweep.forget_probability);
    detail::assign_if(s, "sweep", "max_runs", sweep.max_runs);
    if (sweep.max_runs < 1) throw ConfigError("sweep.max_runs: must be >= 1");
    for (const std::string& t : sweep.technique) (void)technique_from_name(t);
    for (int m : sweep.m_bits) {
      if (m < 0 || m > 52) throw ConfigError("sweep.m_bits: values must be in [0, 52]");
    }
    cfg.sweep = sweep;
  }

  if (j.contains("counterfactual")) {
    const json& c = j.at("counterfactual");
    reject_unknown_keys(c, "counterfactual", {"tolerance"});
    detail::assign_if(c, "counterfactual", "tolerance", cfg.counterfactual_tolerance);
    if (cfg.counterfactual_tolerance < 0)
      throw ConfigError("counterfactual.tolerance: must be >= 0");
  }

  // Structural constraints shared by every subcommand.
  cfg.evolution.validate();
  return cfg;
}

inline json experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  json s;
  s["kind"] = cfg.space_kind;
  if (cfg.space_kind == "program") {
    s["max_len"] = cfg.program.max_len;
    s["num_scalars"] = cfg.program.num_scalars;
    s["num_vectors"] = cfg.program.num_vectors;
    s["num_matrices"] = cfg.program.num_matrices;
    s["vector_dim"] = cfg.program.dim;
  } else {
    s["max_vertices"] = cfg.graph.max_vertices;
    s["hash_input_lo"] = cfg.graph.hash_input_lo;
    s["hash_input_hi"] = cfg.graph.hash_input_hi;
  }
  j["space"] = s;
  j["task"] = {{"kind", task_kind_name(cfg.task_kind)},
               {"seed", cfg.task_seed},
               {"num_train", cfg.eval.num_train},
               {"num_validation", cfg.eval.num_validation},
               {"noise_sigma", cfg.eval.noise_sigma}};
  j["evolution"] = {
      {"controller",
       cfg.evolution.controller == ControllerKind::kRegularized ? "regularized" : "classic"},
      {"population_size", cfg.evolution.population_size},
      {"tournament_size", cfg.evolution.tournament_size},
      {"num_candidates", cfg.evolution.num_candidates},
      {"technique", technique_name(cfg.evolution.technique)},
      {"forget_probability", cfg.evolution.forget_probability},
      {"max_evals", cfg.evolution.max_evals},
      {"tabu_max_count", cfg.evolution.tabu_max_count},
      {"max_retry", cfg.evolution.max_retry},
      {"cache_capacity", cfg.evolution.cache_capacity}};
  j["hash"] = {{"m_bits", cfg.hash.m_bits},
               {"n_examples", cfg.hash.n_examples},
               {"n_seeds", cfg.hash.n_seeds},
               {"fixed_seed", cfg.hash.fixed_seed}};
  j["cost"] = {{"hash_cost", cfg.cost.hash_cost},
               {"eval_cost_per_example", cfg.eval.eval_cost_per_example}};
  j["scheduler"] = {
      {"mode", cfg.scheduler.mode == SchedulerSpec::Mode::kSerial ? "serial" : "distributed"},
      {"workers", cfg.scheduler.workers},
      {"budget", cfg.scheduler.budget}};
  j["seeds"] = cfg.seeds;
  if (!cfg.output_dir.empty()) j["output_dir"] = cfg.output_dir;
  j["counterfactual"] = {{"tolerance", cfg.counterfactual_tolerance}};
  return j;
}

// --- result writers -----------------------------------------------------------

inline std::string timecourse_csv(const TimeCourse& tc) {
  std::ostringstream out;
  out << "virtual_time_s,step,best_fitness,population_best,event\n";
  for (const TimeCourse::Sample& s : tc.samples) {
    out << format_double(s.t) << ',' << s.step << ',' << format_double(s.best_fitness) << ','
        << format_double(s.population_best) << ',' << cache_event_name(s.event) << '\n';
  }
  return out.str();
}

inline std::string events_jsonl(const std::vector<EventRow>& events) {
  std::ostringstream out;
  for (const EventRow& e : events) {
    json j;
    j["step"] = e.step;
    j["virtual_time_s"] = e.t;
    if (e.hash) j["hash"] = to_hex16(*e.hash);
    else j["hash"] = nullptr;
    j["fitness"] = e.fitness;
    j["cache_event"] = cache_event_name(e.event);
    j["eval_calls"] = e.eval_calls;
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace ufh
