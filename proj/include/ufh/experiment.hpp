#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ufh/serialization.hpp"

namespace ufh {

namespace fs = std::filesystem;

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json_file(const fs::path& path) {
  std::string text = read_file(path);
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
  return j;
}

// Everything one seeded run produces, before any file is written.
template <typename Space>
struct SeedArtifacts {
  ExperimentSummary summary;
  RunResult<Space> result;
  json best_candidate;
};

template <typename Space>
SeedArtifacts<Space> run_seed(const Space& space, const Task& task, const ExperimentConfig& cfg,
                              std::uint64_t seed, const std::string& config_id,
                              bool counterfactual, bool collect_events = true) {
  RunSpec spec = cfg.run_spec(seed);
  spec.collect_events = collect_events;
  if (counterfactual) spec.counterfactual_tolerance = cfg.counterfactual_tolerance;

  SeedArtifacts<Space> art;
  art.result = run_evolution(space, task, spec);

  ExperimentSummary& s = art.summary;
  s.config_id = config_id;
  s.seed = seed;
  s.auc = art.result.timecourse.samples.empty() ? 0.0 : auc(art.result.timecourse);
  s.hit_fraction = art.result.hit_fraction();
  s.collision_rate = art.result.collision_rate();
  s.eval_calls = art.result.counters.eval_calls;
  s.hash_calls = art.result.counters.hash_calls;
  s.best_fitness = art.result.best_ever;
  s.final_fitness =
      art.result.final_best ? art.result.final_best->record.fitness : 0.0;
  if (art.result.final_best) {
    art.best_candidate = candidate_to_json(art.result.final_best->candidate);
  }
  return art;
}

template <typename Space>
json summary_to_json(const ExperimentConfig& cfg, const SeedArtifacts<Space>& art,
                     std::optional<FunctionalHash> best_hash) {
  const RunCounters& c = art.result.counters;
  json j;
  j["schema_version"] = cfg.schema_version;
  j["config_id"] = art.summary.config_id;
  j["seed"] = art.summary.seed;
  j["space"] = cfg.space_kind;
  j["technique"] = technique_name(cfg.evolution.technique);
  j["auc"] = art.summary.auc;
  j["hit_fraction"] = art.summary.hit_fraction;
  j["collision_rate"] = art.summary.collision_rate;
  j["eval_calls"] = c.eval_calls;
  j["hash_calls"] = c.hash_calls;
  j["hits"] = c.hits;
  j["misses"] = c.misses;
  j["forgets"] = c.forgets;
  j["collision_checks"] = c.collision_checks;
  j["counterfactual_evals"] = c.counterfactual_evals;
  j["admissions"] = c.admissions;
  j["forward_passes"] = c.passes.forward;
  j["backward_passes"] = c.passes.backward;
  j["best_fitness"] = art.summary.best_fitness;
  j["final_fitness"] = art.summary.final_fitness;
  j["final_clock_s"] = art.result.final_clock;
  j["horizon_s"] = art.result.timecourse.horizon;
  if (!art.best_candidate.is_null()) {
    j["best_candidate"] = art.best_candidate;
    j["best_candidate_hash"] = best_hash ? json(to_hex16(*best_hash)) : json();
  }
  return j;
}

// Runs one seed and writes the four per-run files (resolved config, time
// course, events, summary) into out_dir.
template <typename Space>
ExperimentSummary run_seed_to_dir(const Space& space, const Task& task,
                                  const ExperimentConfig& cfg, std::uint64_t seed,
                                  const std::string& config_id, const fs::path& out_dir,
                                  bool counterfactual) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string());

  SeedArtifacts<Space> art = run_seed(space, task, cfg, seed, config_id, counterfactual);
  std::optional<FunctionalHash> best_hash;
  if (art.result.final_best) {
    best_hash = unified_functional_hash(space, art.result.final_best->candidate, task, cfg.hash);
  }

  write_file(out_dir / "config.json", experiment_config_to_json(cfg).dump(2) + "\n");
  write_file(out_dir / "timecourse.csv", timecourse_csv(art.result.timecourse));
  write_file(out_dir / "events.jsonl", events_jsonl(art.result.events));
  write_file(out_dir / "summary.json",
             summary_to_json(cfg, art, best_hash).dump(2) + "\n");
  if (counterfactual) {
    const RunCounters& c = art.result.counters;
    json report;
    report["seed"] = seed;
    report["tolerance"] = cfg.counterfactual_tolerance;
    report["hits"] = c.hits;
    report["collision_checks"] = c.collision_checks;
    report["collisions"] = c.collisions;
    report["collision_rate"] = art.summary.collision_rate;
    write_file(out_dir / "collision_report.json", report.dump(2) + "\n");
  }
  return art.summary;
}

// Dispatches on the configured space kind. Every subcommand funnels through
// here so the two spaces stay behaviorally interchangeable.
inline ExperimentSummary run_seed_dispatch(const ExperimentConfig& cfg, std::uint64_t seed,
                                           const std::string& config_id, const fs::path& out_dir,
                                           bool counterfactual) {
  if (cfg.space_kind == "program") {
    ProgramSpace space(cfg.program);
    Task task = Task::make(cfg.task_kind, cfg.task_seed, cfg.program.dim);
    return run_seed_to_dir(space, task, cfg, seed, config_id, out_dir, counterfactual);
  }
  GraphSpace space(cfg.graph);
  Task task = Task::make(cfg.task_kind, cfg.task_seed, 2);
  return run_seed_to_dir(space, task, cfg, seed, config_id, out_dir, counterfactual);
}

inline int command_run(const ExperimentConfig& cfg, const fs::path& out_root) {
  for (std::uint64_t seed : cfg.seeds) {
    run_seed_dispatch(cfg, seed, "run", out_root / ("seed_" + std::to_string(seed)), false);
  }
  return 0;
}

inline int command_counterfactual(const ExperimentConfig& cfg, const fs::path& out_root) {
  if (cfg.evolution.technique != Technique::kFec) {
    throw ConfigError("counterfactual: evolution.technique must be \"fec\"");
  }
  std::vector<ExperimentSummary> summaries;
  for (std::uint64_t seed : cfg.seeds) {
    summaries.push_back(run_seed_dispatch(
        cfg, seed, "counterfactual", out_root / ("seed_" + std::to_string(seed)), true));
  }
  json agg;
  agg["tolerance"] = cfg.counterfactual_tolerance;
  agg["num_seeds"] = summaries.size();
  double rate = 0.0;
  for (const ExperimentSummary& s : summaries) rate += s.collision_rate;
  agg["mean_collision_rate"] = rate / static_cast<double>(summaries.size());
  std::error_code ec;
  fs::create_directories(out_root, ec);
  write_file(out_root / "collision_report.json", agg.dump(2) + "\n");
  return 0;
}

// --- sweep --------------------------------------------------------------------

struct SweepCell {
  ExperimentConfig cfg;       // base config with the cell's values applied
  std::string config_id;      // full cell label, includes the technique
  std::string point_id;       // hyperparameter point label, excludes technique
  std::string technique;
};

// Expands the sweep axes into the full cartesian product of cells; checks the
// total run count (cells x seeds) against the configured cap.
inline std::vector<SweepCell> expand_sweep(const ExperimentConfig& base) {
  if (!base.sweep) throw ConfigError("sweep: config has no sweep section");
  const SweepSpec& sw = *base.sweep;
  auto nonempty = [](auto v, auto fallback) {
    if (v.empty()) v.push_back(fallback);
    return v;
  };
  std::vector<int> ps = nonempty(sw.population_size, base.evolution.population_size);
  std::vector<int> ts = nonempty(sw.tournament_size, base.evolution.tournament_size);
  std::vector<int> ms = nonempty(sw.m_bits, base.hash.m_bits);
  std::vector<double> fs_ = nonempty(sw.forget_probability, base.evolution.forget_probability);
  std::vector<std::string> techs =
      nonempty(sw.technique, std::string(technique_name(base.evolution.technique)));

  std::vector<SweepCell> cells;
  for (int p : ps) {
    for (int t : ts) {
      for (int m : ms) {
        for (double f : fs_) {
          std::ostringstream point;
          point << "P=" << p << ",T=" << t << ",m_bits=" << m << ",F=" << format_double(f);
          for (const std::string& tech : techs) {
            SweepCell cell;
            cell.cfg = base;
            cell.cfg.evolution.population_size = p;
            cell.cfg.evolution.tournament_size = t;
            cell.cfg.hash.m_bits = m;
            cell.cfg.evolution.forget_probability = f;
            cell.cfg.evolution.technique = technique_from_name(tech);
            cell.cfg.evolution.validate();
            cell.point_id = point.str();
            cell.config_id = "technique=" + tech + "," + cell.point_id;
            cell.technique = tech;
            cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  std::size_t total_runs = cells.size() * base.seeds.size();
  if (total_runs > static_cast<std::size_t>(sw.max_runs)) {
    throw ConfigError("sweep: " + std::to_string(total_runs) + " runs exceed max_runs=" +
                      std::to_string(sw.max_runs));
  }
  return cells;
}

inline int command_sweep(const ExperimentConfig& base, const fs::path& out_root) {
  std::vector<SweepCell> cells = expand_sweep(base);
  std::vector<ExperimentSummary> all;
  std::ostringstream runs_jsonl;
  for (const SweepCell& cell : cells) {
    for (std::uint64_t seed : base.seeds) {
      ExperimentSummary s = run_seed_dispatch(
          cell.cfg, seed, cell.config_id,
          out_root / cell.config_id / ("seed_" + std::to_string(seed)), false);
      json row;
      row["config_id"] = s.config_id;
      row["seed"] = s.seed;
      row["auc"] = s.auc;
      row["hit_fraction"] = s.hit_fraction;
      row["collision_rate"] = s.collision_rate;
      runs_jsonl << row.dump() << '\n';
      all.push_back(std::move(s));
    }
  }

  std::vector<GroupStats> groups = sweep_aggregate(all);
  std::ostringstream summary_csv;
  summary_csv << "config_id,runs,auc_mean,auc_sem,hit_fraction_mean,final_fitness_mean,"
                 "final_fitness_sem\n";
  for (const GroupStats& g : groups) {
    summary_csv << g.config_id << ',' << g.auc.count << ',' << format_double(g.auc.mean) << ','
                << format_double(g.auc.sem) << ',' << format_double(g.hit_fraction.mean) << ','
                << format_double(g.final_fitness.mean) << ','
                << format_double(g.final_fitness.sem) << '\n';
  }

  // Paired scatter rows: one row per (hyperparameter point, technique) with
  // the matching baseline group alongside.
  std::map<std::string, const GroupStats*> by_id;
  for (const GroupStats& g : groups) by_id[g.config_id] = &g;
  std::ostringstream paired_csv;
  paired_csv << "point_id,technique,baseline_auc_mean,baseline_auc_sem,technique_auc_mean,"
                "technique_auc_sem,runs\n";
  for (const SweepCell& cell : cells) {
    if (cell.technique == "none") continue;
    auto tech_it = by_id.find(cell.config_id);
    auto base_it = by_id.find("technique=none," + cell.point_id);
    if (tech_it == by_id.end() || base_it == by_id.end()) continue;
    paired_csv << cell.point_id << ',' << cell.technique << ','
               << format_double(base_it->second->auc.mean) << ','
               << format_double(base_it->second->auc.sem) << ','
               << format_double(tech_it->second->auc.mean) << ','
               << format_double(tech_it->second->auc.sem) << ',' << tech_it->second->auc.count
               << '\n';
  }

  std::error_code ec;
  fs::create_directories(out_root, ec);
  if (ec) throw IoError("cannot create " + out_root.string());
  write_file(out_root / "runs.jsonl", runs_jsonl.str());
  write_file(out_root / "sweep_summary.csv", summary_csv.str());
  write_file(out_root / "paired_auc.csv", paired_csv.str());
  return 0;
}

// --- replay ---------------------------------------------------------------------

// Re-evaluates a serialized candidate, by default on a freshly seeded task
// (unseen data, the meta-validation value). Returns (fitness, hash).
inline std::pair<double, FunctionalHash> replay_candidate(
    const ExperimentConfig& cfg, const json& candidate_json,
    std::optional<std::uint64_t> task_seed_override) {
  json cj = candidate_json;
  if (cj.is_object() && cj.contains("best_candidate")) cj = cj.at("best_candidate");
  std::uint64_t task_seed = task_seed_override.value_or(cfg.task_seed);
  EvalConfig eval = cfg.eval;
  eval.noise_sigma = 0.0;
  SplitMix64 noise_rng(0);
  if (cfg.space_kind == "program") {
    ProgramSpace space(cfg.program);
    Task task = Task::make(cfg.task_kind, task_seed, cfg.program.dim);
    ProgramCandidate cand = program_candidate_from_json(cj, space);
    FitnessRecord rec = space.evaluate(cand, task, eval, noise_rng);
    return {rec.fitness, unified_functional_hash(space, cand, task, cfg.hash)};
  }
  GraphSpace space(cfg.graph);
  Task task = Task::make(cfg.task_kind, task_seed, 2);
  GraphCandidate cand = graph_candidate_from_json(cj, space);
  FitnessRecord rec = space.evaluate(cand, task, eval, noise_rng);
  return {rec.fitness, unified_functional_hash(space, cand, task, cfg.hash)};
}

}  // namespace ufh
