#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "spinbench/instance.hpp"

namespace spinbench {

// Spins are +-1; int8_t keeps replica arrays compact.
using SpinConfig = std::vector<std::int8_t>;

// Energy in the instance's own payload units: exact integers for integer
// instances (raw couplings), doubles for real ones.
template <typename Scalar>
Scalar raw_energy(const BasicInstance<Scalar>& inst, const SpinConfig& s) {
  Scalar e = 0;
  const auto& edges = inst.graph->edges;
  for (std::size_t k = 0; k < edges.size(); ++k)
    e -= inst.couplers[k] * Scalar(s[edges[k].first] * s[edges[k].second]);
  for (int i = 0; i < inst.graph->n; ++i) e -= inst.fields[i] * Scalar(s[i]);
  return e;
}

template <typename Scalar>
double energy_scale(const BasicInstance<Scalar>& inst) {
  if constexpr (std::is_same_v<Scalar, long long>)
    return inst.normalized ? 1.0 / inst.instance_class().i_max : 1.0;
  else
    return 1.0;
}

// Energy on the instance's declared scale (normalization applied).
template <typename Scalar>
double energy(const BasicInstance<Scalar>& inst, const SpinConfig& s) {
  return double(raw_energy(inst, s)) * energy_scale(inst);
}

// F_i = sum_j J_ij s_j + h_i in payload units; flipping spin i changes the
// energy by 2 s_i F_i.
template <typename Scalar>
Scalar raw_local_field(const BasicInstance<Scalar>& inst, const SpinConfig& s,
                       int site) {
  Scalar f = inst.fields[site];
  const Graph& g = *inst.graph;
  for (int k = g.adj_offset[site]; k < g.adj_offset[site + 1]; ++k)
    f += inst.couplers[g.adj_edge[k]] * Scalar(s[g.adj_vertex[k]]);
  return f;
}

template <typename Scalar>
double local_field(const BasicInstance<Scalar>& inst, const SpinConfig& s,
                   int site) {
  return double(raw_local_field(inst, s, site)) * energy_scale(inst);
}

inline int hamming_distance(const SpinConfig& a, const SpinConfig& b) {
  if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

inline SpinConfig flipped(SpinConfig s) {
  for (auto& v : s) v = -v;
  return s;
}

inline bool configs_equal(const SpinConfig& a, const SpinConfig& b,
                          bool modulo_global_flip) {
  if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
  bool eq = true, eq_flip = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    eq = eq && a[i] == b[i];
    eq_flip = eq_flip && a[i] == -b[i];
  }
  return eq || (modulo_global_flip && eq_flip);
}

// Bit-packed config: bit i set means spin i is -1.  Word-lexicographic
// order gives a canonical order on sets of configs.
struct PackedConfig {
  std::vector<std::uint64_t> words;

  friend bool operator==(const PackedConfig&, const PackedConfig&) = default;
  friend auto operator<=>(const PackedConfig&, const PackedConfig&) = default;
};

struct PackedConfigHash {
  std::size_t operator()(const PackedConfig& p) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (const std::uint64_t w : p.words) h = splitmix64(h ^ w);
    return std::size_t(h);
  }
};

inline PackedConfig pack(const SpinConfig& s) {
  PackedConfig p;
  p.words.assign((s.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] < 0) p.words[i >> 6] |= std::uint64_t(1) << (i & 63);
  return p;
}

inline SpinConfig unpack(const PackedConfig& p, int n) {
  SpinConfig s(n);
  for (int i = 0; i < n; ++i)
    s[i] = (p.words[i >> 6] >> (i & 63)) & 1 ? -1 : 1;
  return s;
}

inline PackedConfig flipped(const PackedConfig& p, int n) {
  PackedConfig q;
  q.words.reserve(p.words.size());
  for (const std::uint64_t w : p.words) q.words.push_back(~w);
  const int rem = n & 63;
  if (rem && !q.words.empty()) q.words.back() &= (std::uint64_t(1) << rem) - 1;
  return q;
}

// Representative of {p, -p} used when comparing modulo a global flip.
inline PackedConfig canonical_flip(const PackedConfig& p, int n) {
  PackedConfig q = flipped(p, n);
  return q < p ? q : p;
}

} // namespace spinbench
