#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinbench/oracle.hpp"
#include "spinbench/solver.hpp"

namespace spinbench {

// Common shape of an exhaustive or heuristic ground-state search result.
// `exhaustive` marks counts as exact rather than visited lower bounds.
struct SolveResult {
  bool exhaustive = false;
  bool exact = false;
  double e0 = 0;
  long long e0_int = 0;
  std::vector<PackedConfig> gs_configs;
  bool gs_overflow = false;
  long long degeneracy = 0;
  bool has_e1 = false;
  double e1 = 0;
  long long e1_int = 0;
  std::vector<PackedConfig> e1_configs;
  bool e1_overflow = false;
  long long n1 = 0;
  bool agreement = true;
  bool thermalized = false;
  std::uint64_t sweeps = 0;
  std::vector<double> levels;
  std::vector<long long> level_counts;
  bool levels_truncated = false;
  double walk_defect = 0;
};

inline SolveResult to_result(SpectrumReport r) {
  SolveResult s;
  s.exhaustive = true;
  s.exact = r.exact;
  s.e0 = r.e0;
  s.e0_int = r.e0_int;
  s.gs_configs = std::move(r.gs_configs);
  s.gs_overflow = r.gs_overflow;
  s.degeneracy = r.degeneracy;
  s.has_e1 = r.has_e1;
  s.e1 = r.e1;
  s.e1_int = r.e1_int;
  s.e1_configs = std::move(r.e1_configs);
  s.e1_overflow = r.e1_overflow;
  s.n1 = r.n1;
  s.levels = std::move(r.levels);
  s.level_counts = std::move(r.level_counts);
  s.levels_truncated = r.levels_truncated;
  s.walk_defect = r.walk_defect;
  return s;
}

inline SolveResult to_result(GroundStateReport r) {
  SolveResult s;
  s.exhaustive = false;
  s.exact = r.exact;
  s.e0 = r.e0;
  s.e0_int = r.e0_int;
  s.gs_configs = std::move(r.gs_configs);
  s.gs_overflow = r.gs_overflow;
  s.degeneracy = r.degeneracy;
  s.has_e1 = r.has_e1;
  s.e1 = r.e1;
  s.e1_int = r.e1_int;
  s.e1_configs = std::move(r.e1_configs);
  s.e1_overflow = r.e1_overflow;
  s.n1 = r.n1;
  s.agreement = r.agreement;
  s.thermalized = r.thermalized;
  s.sweeps = r.sweeps;
  // visited levels: ground energy, plus the censused gap level when seen
  s.levels.push_back(r.e0);
  s.level_counts.push_back(r.degeneracy);
  if (r.has_e1) {
    s.levels.push_back(r.e1);
    s.level_counts.push_back(r.n1);
  }
  s.levels_truncated = true;  // a sampler never certifies the ladder
  return s;
}

struct EngineConfig {
  enum class Kind { Oracle, PtIcm };
  Kind kind = Kind::Oracle;
  OracleOptions oracle;
  SolverParams solver;
  bool auto_ladder = true;  // t_max / n_icm track the class defaults

  SolverParams params_for(const InstanceClass& cls, std::uint64_t seed) const {
    SolverParams p = solver;
    if (auto_ladder) {
      const SolverParams d = SolverParams::defaults_for(cls);
      p.t_max = d.t_max;
      p.n_icm = d.n_icm;
    }
    p.seed = seed;
    return p;
  }

  static EngineConfig parse_kind(const std::string& name) {
    EngineConfig c;
    if (name == "oracle") c.kind = Kind::Oracle;
    else if (name == "pt-icm") c.kind = Kind::PtIcm;
    else throw std::invalid_argument("unknown engine: " + name);
    return c;
  }

  const char* name() const { return kind == Kind::Oracle ? "oracle" : "pt-icm"; }
};

template <typename Scalar>
SolveResult engine_solve(const EngineConfig& cfg,
                         const BasicInstance<Scalar>& inst,
                         std::uint64_t seed) {
  if (cfg.kind == EngineConfig::Kind::Oracle)
    return to_result(exact_solve(inst, cfg.oracle));
  return to_result(
      find_ground_state(inst, cfg.params_for(inst.instance_class(), seed)));
}

// Batched solve; with the oracle engine, same-graph instances share
// vectorized enumeration walks.
template <typename Scalar>
std::vector<SolveResult> engine_solve_batch(
    const EngineConfig& cfg,
    const std::vector<const BasicInstance<Scalar>*>& batch,
    const std::vector<std::uint64_t>& seeds) {
  if (!seeds.empty() && seeds.size() != batch.size())
    throw std::invalid_argument("seed count mismatch");
  std::vector<SolveResult> out;
  out.reserve(batch.size());
  if (cfg.kind == EngineConfig::Kind::Oracle) {
    for (auto rep : exact_solve_batch(batch, cfg.oracle))
      out.push_back(to_result(std::move(rep)));
  } else {
    for (std::size_t i = 0; i < batch.size(); ++i)
      out.push_back(to_result(find_ground_state(
          *batch[i],
          cfg.params_for(batch[i]->instance_class(),
                         seeds.empty() ? cfg.solver.seed : seeds[i]))));
  }
  return out;
}

} // namespace spinbench
