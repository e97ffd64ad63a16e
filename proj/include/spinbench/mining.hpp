#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinbench/resilience.hpp"

namespace spinbench {

struct HammingProfile {
  bool defined = false;  // false when no first-excited configs are known
  int min = 0;
  double mean = 0;
};

inline int packed_distance(const PackedConfig& a, const PackedConfig& b) {
  int d = 0;
  for (std::size_t w = 0; w < a.words.size(); ++w)
    d += std::popcount(a.words[w] ^ b.words[w]);
  return d;
}

// Distance statistics of the first excited configs from the ground set;
// distances are taken modulo a global flip when fields vanish.
inline HammingProfile hamming_profile(const SolveResult& res, int n,
                                      bool zero_fields) {
  HammingProfile p;
  if (res.gs_configs.empty() || res.e1_configs.empty()) return p;
  p.defined = true;
  p.min = n;
  double acc = 0;
  for (const auto& e : res.e1_configs) {
    int best = n;
    for (const auto& g : res.gs_configs) {
      int d = packed_distance(e, g);
      if (zero_fields) d = std::min(d, n - d);
      best = std::min(best, d);
    }
    p.min = std::min(p.min, best);
    acc += best;
  }
  p.mean = acc / double(res.e1_configs.size());
  return p;
}

struct InstanceSummary {
  std::string id;
  std::uint64_t seed = 0;
  double e0 = 0;
  long long e0_int = 0;
  long long degeneracy = 0;
  bool gs_overflow = false;
  long long n1 = 0;
  bool e1_overflow = false;
  bool unique_gs = false;
  bool exhaustive = false;
  bool agreement = true;
  HammingProfile hamming;
  std::optional<double> r;  // filled once resilience has run
};

struct YieldReport {
  std::string class_name;
  int rows = 0, cols = 0;
  int n_total = 0;
  int n_unique = 0;
  double yield = 0;
  double yield_err = 0;
  std::vector<InstanceSummary> instances;
};

inline InstanceSummary summarize(const Instance& inst, const SolveResult& res,
                                 int rows, int cols, bool with_hamming) {
  InstanceSummary s;
  s.id = instance_id(inst.instance_class(), rows, cols, inst.seed);
  s.seed = inst.seed;
  s.e0 = res.e0;
  s.e0_int = res.e0_int;
  s.degeneracy = res.degeneracy;
  s.gs_overflow = res.gs_overflow;
  s.n1 = res.n1;
  s.e1_overflow = res.e1_overflow;
  s.unique_gs = unique_ground_state(res, inst.n(), !inst.has_fields());
  s.exhaustive = res.exhaustive;
  s.agreement = res.agreement;
  if (with_hamming) s.hamming = hamming_profile(res, inst.n(), !inst.has_fields());
  return s;
}

// Instance seeds derive from (master, index); the same master always names
// the same instance family.
inline std::uint64_t instance_stream_seed(std::uint64_t master, int index) {
  return derive_seed(master, std::uint64_t(index));
}

// Yield = unique-ground-state fraction among `count` sampled instances.
inline YieldReport compute_yield(const InstanceClass& cls,
                                 const ChimeraGraph& graph, int count,
                                 std::uint64_t master_seed,
                                 const EngineConfig& engine,
                                 bool with_hamming = false) {
  if (count < 1) throw std::invalid_argument("need at least one instance");
  YieldReport rep;
  rep.class_name = cls.name;
  rep.rows = graph.rows;
  rep.cols = graph.cols;
  rep.n_total = count;

  std::vector<Instance> insts;
  insts.reserve(std::size_t(count));
  for (int k = 0; k < count; ++k)
    insts.push_back(normalize(
        sample_instance(cls, graph, instance_stream_seed(master_seed, k))));

  std::vector<const Instance*> batch;
  std::vector<std::uint64_t> seeds;
  for (const auto& inst : insts) {
    batch.push_back(&inst);
    seeds.push_back(derive_seed(inst.seed, 0x50e0ull));
  }
  const auto results = engine_solve_batch(engine, batch, seeds);

  for (int k = 0; k < count; ++k) {
    rep.instances.push_back(
        summarize(insts[std::size_t(k)], results[std::size_t(k)], graph.rows,
                  graph.cols, with_hamming));
    rep.n_unique += rep.instances.back().unique_gs;
  }
  rep.yield = double(rep.n_unique) / double(rep.n_total);
  rep.yield_err = binomial_error(rep.yield, std::uint64_t(rep.n_total));
  return rep;
}

// Benchmark selection: unique ground state (optional) and a low first
// excited census.  Input order is preserved.
inline std::vector<InstanceSummary> filter_benchmark_set(
    const std::vector<InstanceSummary>& all, long long max_n1,
    bool require_unique = true) {
  if (max_n1 < 0) throw std::invalid_argument("max_n1 must be nonnegative");
  std::vector<InstanceSummary> out;
  for (const auto& s : all) {
    if (require_unique && !s.unique_gs) continue;
    if (s.n1 > max_n1) continue;
    out.push_back(s);
  }
  return out;
}

// (n1, r) pairs for rows where resilience is known, ordered by n1 then id.
inline std::vector<std::pair<long long, double>> n1_resilience_profile(
    const std::vector<InstanceSummary>& all) {
  std::vector<const InstanceSummary*> rows;
  for (const auto& s : all)
    if (s.r) rows.push_back(&s);
  std::sort(rows.begin(), rows.end(),
            [](const InstanceSummary* a, const InstanceSummary* b) {
              return a->n1 != b->n1 ? a->n1 < b->n1 : a->id < b->id;
            });
  std::vector<std::pair<long long, double>> out;
  out.reserve(rows.size());
  for (const auto* s : rows) out.emplace_back(s->n1, *s->r);
  return out;
}

// (mean hamming distance, r) pairs, ordered by distance then id.
inline std::vector<std::pair<double, double>> hamming_resilience_profile(
    const std::vector<InstanceSummary>& all) {
  std::vector<const InstanceSummary*> rows;
  for (const auto& s : all)
    if (s.r && s.hamming.defined) rows.push_back(&s);
  std::sort(rows.begin(), rows.end(),
            [](const InstanceSummary* a, const InstanceSummary* b) {
              return a->hamming.mean != b->hamming.mean
                         ? a->hamming.mean < b->hamming.mean
                         : a->id < b->id;
            });
  std::vector<std::pair<double, double>> out;
  out.reserve(rows.size());
  for (const auto* s : rows) out.emplace_back(s->hamming.mean, *s->r);
  return out;
}

} // namespace spinbench
