#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "spinbench/model.hpp"

#if defined(__BMI2__)
#include <immintrin.h>
#endif

namespace spinbench {

struct OracleOptions {
  int max_n = 32;                        // refuse larger problems
  std::size_t config_cap = std::size_t(1) << 16;  // stored configs per level
  int level_cap = 2;                     // distinct energies tracked, >= 1
  double tie_tol = 1e-9;                 // energy tie width for real payloads
  bool allow_halving = true;             // fold the global flip when fields vanish
};

// Exhaustive low-energy census.  Config sets are kept for the two lowest
// levels; counts are exact for every tracked level even past config_cap.
struct SpectrumReport {
  bool exact = false;
  double e0 = 0;
  long long e0_int = 0;
  long long degeneracy = 0;
  std::vector<PackedConfig> gs_configs;
  bool gs_overflow = false;
  bool has_e1 = false;
  double e1 = 0;
  long long e1_int = 0;
  long long n1 = 0;
  std::vector<PackedConfig> e1_configs;
  bool e1_overflow = false;
  std::vector<double> levels;            // ascending, instance scale
  std::vector<long long> level_counts;
  bool levels_truncated = false;         // spectrum continues past level_cap
  double walk_defect = 0;                // closed-walk energy self-check residue
  bool halved = false;
};

namespace detail {

constexpr int max_tracked_levels = 9;

template <typename P>
struct LaneCensus {
  std::array<P, max_tracked_levels> value{};
  std::array<long long, max_tracked_levels> count{};
  int n_levels = 0;
  int level_cap = 2;
  std::size_t cap = 0;
  P tol = P(0);
  std::vector<std::uint32_t> set0, set1;
  bool overflow0 = false, overflow1 = false;
  bool truncated = false;

  P threshold() const {
    return n_levels == level_cap ? value[n_levels - 1] + tol
                                 : std::numeric_limits<P>::max();
  }

  void offer(P e, std::uint32_t cfg) {
    int p = 0;
    while (p < n_levels && value[p] < e - tol) ++p;
    if (p < n_levels && value[p] <= e + tol) {
      ++count[p];
      if (e < value[p]) value[p] = e;  // cluster representative: minimum
      if (p == 0) {
        if (set0.size() < cap) set0.push_back(cfg); else overflow0 = true;
      } else if (p == 1) {
        if (set1.size() < cap) set1.push_back(cfg); else overflow1 = true;
      }
      return;
    }
    if (p >= level_cap) return;  // unreachable while threshold() is respected
    if (n_levels == level_cap) truncated = true;
    const int last = std::min(n_levels, level_cap - 1);
    for (int q = last; q > p; --q) {
      value[q] = value[q - 1];
      count[q] = count[q - 1];
    }
    value[p] = e;
    count[p] = 1;
    if (n_levels < level_cap) ++n_levels;
    if (p == 0) {
      if (level_cap >= 2) {
        set1 = std::move(set0);
        overflow1 = overflow0;
      }
      set0.clear();
      set0.push_back(cfg);
      overflow0 = false;
    } else if (p == 1) {
      set1.clear();
      set1.push_back(cfg);
      overflow1 = false;
    }
  }
};

inline std::uint64_t extract_pattern(std::uint64_t cfg, std::uint64_t mask,
                                     const std::uint8_t* nbrs, int deg) {
#if defined(__BMI2__)
  (void)nbrs;
  (void)deg;
  return _pext_u64(cfg, mask);
#else
  (void)mask;
  std::uint64_t p = 0;
  for (int t = 0; t < deg; ++t) p |= ((cfg >> nbrs[t]) & 1) << t;
  return p;
#endif
}

// One Gray-code walk over all configs of `n` free sites, evaluating L
// instances per step.  Energies update incrementally; the walk is closed
// with one extra flip so the return-to-start energy validates the whole
// accumulation.
template <typename P, int L, typename Scalar>
void enumerate_walk(const std::array<const BasicInstance<Scalar>*, L>& insts,
                    bool halve, std::array<LaneCensus<P>, L>& census,
                    double& max_defect) {
  const Graph& g = *insts[0]->graph;
  const int n = g.n;
  const int m = n - (halve ? 1 : 0);

  std::vector<std::uint64_t> mask(std::size_t(m), 0);
  std::vector<std::array<std::uint8_t, 8>> nbrs(static_cast<std::size_t>(m));
  std::vector<int> deg(std::size_t(m), 0);
  std::vector<std::size_t> site_off(std::size_t(m) + 1, 0);
  for (int b = 0; b < m; ++b) {
    int d = 0;
    for (int k = g.adj_offset[b]; k < g.adj_offset[b + 1]; ++k) {
      const int v = g.adj_vertex[k];
      if (v < m) {
        mask[b] |= std::uint64_t(1) << v;
        nbrs[b][d++] = std::uint8_t(v);
      }
    }
    deg[b] = d;
    site_off[b + 1] = site_off[b] + ((std::size_t(2) << d)) * L;
  }

  // 64-byte aligned LUT; row layout [site][pattern*2 + current_bit][lane],
  // entries hold the full energy change 2 * s_b * F_b(pattern).
  std::vector<P> lut_storage(site_off[m] + 64 / sizeof(P));
  P* lut = lut_storage.data();
  {
    const std::uintptr_t a = reinterpret_cast<std::uintptr_t>(lut);
    lut += (64 - a % 64) % 64 / sizeof(P);
  }
  for (int l = 0; l < L; ++l) {
    const auto& inst = *insts[l];
    for (int b = 0; b < m; ++b) {
      double cst = double(inst.fields[b]);
      std::array<double, 8> jval{};
      int d = 0;
      for (int k = g.adj_offset[b]; k < g.adj_offset[b + 1]; ++k) {
        const int v = g.adj_vertex[k];
        if (v < m)
          jval[d++] = double(inst.couplers[g.adj_edge[k]]);
        else
          cst += double(inst.couplers[g.adj_edge[k]]);
      }
      for (std::uint64_t pat = 0; pat < (std::uint64_t(1) << deg[b]); ++pat) {
        double f = cst;
        for (int t = 0; t < deg[b]; ++t)
          f += jval[t] * ((pat >> t) & 1 ? -1.0 : 1.0);
        for (int bit = 0; bit < 2; ++bit) {
          const double de = 2.0 * (bit ? -1.0 : 1.0) * f;
          lut[site_off[b] + (pat * 2 + bit) * L + l] = P(de);
        }
      }
    }
  }

  alignas(64) std::array<P, L> E;
  alignas(64) std::array<P, L> thresh;
  for (int l = 0; l < L; ++l) {
    SpinConfig up(std::size_t(n), 1);
    const auto e0 = raw_energy(*insts[l], up);
    E[l] = P(e0);
    census[l].offer(E[l], 0);
    thresh[l] = census[l].threshold();
  }
  const std::array<P, L> E_init = E;

  // exact energy of the current config, for drift refresh of real lanes
  auto recompute = [&](std::uint64_t c, int l) -> double {
    const auto& inst = *insts[l];
    double e = 0;
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      const auto [i, j] = g.edges[k];
      const int si = i < m ? 1 - 2 * int((c >> i) & 1) : 1;
      const int sj = j < m ? 1 - 2 * int((c >> j) & 1) : 1;
      e -= double(inst.couplers[k]) * si * sj;
    }
    for (int i = 0; i < n; ++i) {
      const int si = i < m ? 1 - 2 * int((c >> i) & 1) : 1;
      e -= double(inst.fields[i]) * si;
    }
    return e;
  };
  (void)recompute;

  // Real lanes refresh their accumulators from exact recomputation every
  // 2^22 steps, holding rounding drift far below the tie tolerance.
  std::uint64_t cfg = 0;
  const std::uint64_t steps = m > 0 ? (std::uint64_t(1) << m) : 1;
  constexpr std::uint64_t refresh_interval = std::uint64_t(1) << 22;
  std::uint64_t next_refresh = refresh_interval;
  std::uint64_t k = 1;

  if constexpr (L == 1) {
    P e = E[0];
    P th = thresh[0];
    for (; k < steps; ++k) {
      const int b = std::countr_zero(k);
      const std::uint64_t bit = (cfg >> b) & 1;
      const std::uint64_t pat = extract_pattern(cfg, mask[b], nbrs[b].data(), deg[b]);
      e += lut[site_off[b] + pat * 2 + bit];
      cfg ^= std::uint64_t(1) << b;
      if (e <= th) [[unlikely]] {
        census[0].offer(e, std::uint32_t(cfg));
        th = census[0].threshold();
      }
      if constexpr (!std::is_integral_v<P>) {
        if (k == next_refresh) {
          e = P(recompute(cfg, 0));
          next_refresh += refresh_interval;
        }
      }
    }
    E[0] = e;
    thresh[0] = th;
  } else {
    // Vector lanes run in blocks of 8 steps with one stale-threshold check
    // per block; thresholds only decrease, so a clean block cannot hide a
    // hit.  Flagged blocks replay step by step against live thresholds,
    // repeating the identical per-lane additions.
    static_assert(sizeof(P) * L == 64);
    typedef P VP __attribute__((vector_size(64)));
    constexpr std::uint64_t BLK = 8;
    VP vE, vT;
    std::memcpy(&vE, E.data(), 64);
    std::memcpy(&vT, thresh.data(), 64);
    while (k < steps) {
      const std::uint64_t blk_end = std::min(steps, (k + BLK) & ~(BLK - 1));
      const VP vE_save = vE;
      const std::uint64_t cfg_save = cfg;
      const std::uint64_t k0 = k;
      decltype(vE <= vT) acc{};
      for (; k < blk_end; ++k) {
        const int b = std::countr_zero(k);
        const std::uint64_t bit = (cfg >> b) & 1;
        const std::uint64_t pat = extract_pattern(cfg, mask[b], nbrs[b].data(), deg[b]);
        const VP* row =
            reinterpret_cast<const VP*>(lut + site_off[b] + (pat * 2 + bit) * L);
        cfg ^= std::uint64_t(1) << b;
        vE += *row;
        acc |= (vE <= vT);
      }
      std::uint64_t any = 0;
      std::uint64_t acc_words[8];
      std::memcpy(acc_words, &acc, 64);
      for (int w = 0; w < 8; ++w) any |= acc_words[w];
      if (any) [[unlikely]] {
        std::memcpy(E.data(), &vE_save, 64);
        cfg = cfg_save;
        for (std::uint64_t kr = k0; kr < blk_end; ++kr) {
          const int b = std::countr_zero(kr);
          const std::uint64_t bit = (cfg >> b) & 1;
          const std::uint64_t pat =
              extract_pattern(cfg, mask[b], nbrs[b].data(), deg[b]);
          const P* row = lut + site_off[b] + (pat * 2 + bit) * L;
          cfg ^= std::uint64_t(1) << b;
          for (int l = 0; l < L; ++l) {
            E[l] += row[l];
            if (E[l] <= thresh[l]) {
              census[l].offer(E[l], std::uint32_t(cfg));
              thresh[l] = census[l].threshold();
            }
          }
        }
        std::memcpy(&vE, E.data(), 64);
        std::memcpy(&vT, thresh.data(), 64);
      }
      if constexpr (!std::is_integral_v<P>) {
        if (k >= next_refresh) {
          alignas(64) std::array<P, L> fresh;
          for (int l = 0; l < L; ++l) fresh[l] = P(recompute(cfg, l));
          std::memcpy(&vE, fresh.data(), 64);
          next_refresh += refresh_interval;
        }
      }
    }
    std::memcpy(E.data(), &vE, 64);
    std::memcpy(thresh.data(), &vT, 64);
  }

  max_defect = 0;
  if (m > 0) {
    // closing flip of the top free bit returns the walk to config 0
    const int b = m - 1;
    const std::uint64_t bit = (cfg >> b) & 1;
    const std::uint64_t pat = extract_pattern(cfg, mask[b], nbrs[b].data(), deg[b]);
    const P* row = lut + site_off[b] + (pat * 2 + bit) * L;
    cfg ^= std::uint64_t(1) << b;
    if (cfg != 0) throw std::logic_error("gray walk did not close");
    for (int l = 0; l < L; ++l) {
      const double defect = std::abs(double(E[l] + row[l]) - double(E_init[l]));
      max_defect = std::max(max_defect, defect);
      if (std::is_integral_v<P> && defect != 0)
        throw std::logic_error("exact enumeration self-check failed");
    }
  }
}

template <typename P, typename Scalar>
SpectrumReport finish_report(const BasicInstance<Scalar>& inst,
                             LaneCensus<P>& c, bool halved, double defect,
                             std::size_t cap) {
  SpectrumReport r;
  r.exact = std::is_integral_v<P>;
  r.halved = halved;
  r.walk_defect = defect;
  const double scale = energy_scale(inst);
  const int n = inst.graph->n;
  const std::uint32_t flip_mask =
      n == 32 ? ~std::uint32_t(0) : (std::uint32_t(1) << n) - 1;

  auto materialize = [&](std::vector<std::uint32_t>& raw, bool& overflow_flag,
                         std::vector<PackedConfig>& out) {
    if (halved) {
      const std::size_t base = raw.size();
      raw.reserve(base * 2);
      for (std::size_t i = 0; i < base; ++i) raw.push_back(raw[i] ^ flip_mask);
    }
    std::sort(raw.begin(), raw.end());
    if (raw.size() > cap) {
      raw.resize(cap);
      overflow_flag = true;
    }
    out.reserve(raw.size());
    for (const std::uint32_t cfg : raw)
      out.push_back(PackedConfig{{std::uint64_t(cfg)}});
  };

  const long long mult = halved ? 2 : 1;
  r.levels.reserve(std::size_t(c.n_levels));
  long long tracked_configs = 0;
  for (int p = 0; p < c.n_levels; ++p) {
    r.levels.push_back(double(c.value[p]) * scale);
    r.level_counts.push_back(c.count[p] * mult);
    tracked_configs += c.count[p];
  }
  // every walked config either lands in a tracked level or lies above the
  // window, so the ladder is complete exactly when the counts cover the walk
  const int m = n - (halved ? 1 : 0);
  r.levels_truncated =
      c.truncated || tracked_configs != (long long)(std::uint64_t(1) << m);

  r.e0 = r.levels[0];
  r.e0_int = (long long)(c.value[0]);
  r.degeneracy = r.level_counts[0];
  r.gs_overflow = c.overflow0;
  materialize(c.set0, r.gs_overflow, r.gs_configs);

  if (c.n_levels >= 2) {
    r.has_e1 = true;
    r.e1 = r.levels[1];
    r.e1_int = (long long)(c.value[1]);
    r.n1 = r.level_counts[1];
    r.e1_overflow = c.overflow1;
    materialize(c.set1, r.e1_overflow, r.e1_configs);
  }
  return r;
}

template <typename Scalar>
struct lane_traits {
  using payload = std::conditional_t<std::is_same_v<Scalar, long long>,
                                     std::int32_t, double>;
  static constexpr int width = std::is_same_v<Scalar, long long> ? 16 : 8;
};

template <typename P, int L, typename Scalar>
void solve_group(const std::vector<const BasicInstance<Scalar>*>& group,
                 bool halve, const OracleOptions& opt,
                 std::vector<SpectrumReport>& out) {
  std::array<const BasicInstance<Scalar>*, L> lanes;
  for (int l = 0; l < L; ++l)
    lanes[l] = group[std::min(std::size_t(l), group.size() - 1)];
  std::array<LaneCensus<P>, L> census;
  for (int l = 0; l < L; ++l) {
    census[l].level_cap = std::clamp(opt.level_cap, 1, max_tracked_levels - 1);
    census[l].cap = opt.config_cap;
    census[l].tol = std::is_integral_v<P> ? P(0) : P(opt.tie_tol);
  }
  double defect = 0;
  enumerate_walk<P, L, Scalar>(lanes, halve, census, defect);
  for (std::size_t i = 0; i < group.size(); ++i)
    out.push_back(
        finish_report(*group[i], census[i], halve, defect, opt.config_cap));
}

} // namespace detail

// Exhaustive enumeration over all 2^n configs (2^(n-1) when the global
// flip symmetry applies).  Instances in one batch must share a graph;
// batches vectorize across lanes, so same-topology batches are far cheaper
// than repeated single solves.
template <typename Scalar>
std::vector<SpectrumReport> exact_solve_batch(
    const std::vector<const BasicInstance<Scalar>*>& batch,
    const OracleOptions& opt = {}) {
  if (batch.empty()) return {};
  if (opt.max_n > 32) throw std::invalid_argument("max_n cannot exceed 32");
  if (opt.level_cap < 1 || opt.level_cap >= detail::max_tracked_levels)
    throw std::invalid_argument("level_cap out of range");
  const Graph* g = batch[0]->graph;
  for (const auto* inst : batch) {
    if (inst->graph != g)
      throw std::invalid_argument("batch instances must share one graph");
    if (inst->graph->n > opt.max_n)
      throw std::invalid_argument(
          "instance too large for exhaustive enumeration");
  }

  using P = typename detail::lane_traits<Scalar>::payload;
  constexpr int W = detail::lane_traits<Scalar>::width;

  // group by flip symmetry so halving applies per group
  std::vector<const BasicInstance<Scalar>*> plain, fielded;
  for (const auto* inst : batch)
    (opt.allow_halving && !inst->has_fields() ? plain : fielded).push_back(inst);

  std::vector<SpectrumReport> plain_r, fielded_r;
  auto run = [&](std::vector<const BasicInstance<Scalar>*>& grp, bool halve,
                 std::vector<SpectrumReport>& out) {
    std::size_t i = 0;
    while (i < grp.size()) {
      const std::size_t left = grp.size() - i;
      std::vector<const BasicInstance<Scalar>*> chunk(
          grp.begin() + i, grp.begin() + i + std::min<std::size_t>(left, W));
      if (chunk.size() == 1)
        detail::solve_group<P, 1, Scalar>(chunk, halve, opt, out);
      else
        detail::solve_group<P, W, Scalar>(chunk, halve, opt, out);
      i += chunk.size();
    }
  };
  run(plain, true, plain_r);
  run(fielded, false, fielded_r);

  // restore caller order
  std::vector<SpectrumReport> out;
  out.reserve(batch.size());
  std::size_t ip = 0, iff = 0;
  for (const auto* inst : batch)
    if (opt.allow_halving && !inst->has_fields())
      out.push_back(std::move(plain_r[ip++]));
    else
      out.push_back(std::move(fielded_r[iff++]));
  return out;
}

template <typename Scalar>
SpectrumReport exact_solve(const BasicInstance<Scalar>& inst,
                           const OracleOptions& opt = {}) {
  std::vector<const BasicInstance<Scalar>*> batch{&inst};
  return exact_solve_batch(batch, opt)[0];
}

} // namespace spinbench
