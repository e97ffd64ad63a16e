#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "spinbench/model.hpp"
#include "spinbench/rng.hpp"

namespace spinbench {

struct SolverParams {
  int n_copies = 4;
  int n_t = 30;
  double t_min = 0.15;
  double t_max = 3.0;
  int n_icm = 14;          // lowest temperatures eligible for cluster moves
  int b = 19;              // run length 2^b sweep units unless n_sweeps is set
  std::uint64_t n_sweeps = 0;
  std::uint64_t seed = 0;
  std::size_t config_cap = std::size_t(1) << 16;

  std::uint64_t sweeps() const {
    return n_sweeps ? n_sweeps : (std::uint64_t(1) << b);
  }

  static SolverParams defaults_for(const InstanceClass& cls) {
    SolverParams p;
    if (cls.id == InstanceClassId::U1) {
      p.t_max = 3.05;
      p.n_icm = 13;
    }
    return p;
  }

  void validate() const {
    if (n_copies < 1) throw std::invalid_argument("need at least one copy");
    if (n_t < 1) throw std::invalid_argument("need at least one temperature");
    if (!(t_min > 0)) throw std::invalid_argument("t_min must be positive");
    if (t_max < t_min) throw std::invalid_argument("t_max below t_min");
    if (n_icm < 0 || n_icm > n_t) throw std::invalid_argument("n_icm out of range");
    if (b < 0 || b > 40) throw std::invalid_argument("b out of range");
  }
};

// Geometric ladder from t_min to t_max inclusive, shared by all copies.
inline std::vector<double> make_temperature_grid(const SolverParams& p) {
  p.validate();
  std::vector<double> t(std::size_t(p.n_t));
  if (p.n_t == 1) {
    t[0] = p.t_min;
    return t;
  }
  const double ratio = std::pow(p.t_max / p.t_min, 1.0 / (p.n_t - 1));
  double cur = p.t_min;
  for (int k = 0; k < p.n_t; ++k, cur *= ratio) t[k] = cur;
  t.front() = p.t_min;
  t.back() = p.t_max;
  return t;
}

struct GroundStateReport {
  bool exact = false;
  double e0 = 0;
  long long e0_int = 0;
  std::vector<PackedConfig> gs_configs;
  bool gs_overflow = false;
  long long degeneracy = 0;          // distinct configs visited at e0
  bool has_e1 = false;
  double e1 = 0;
  long long e1_int = 0;
  std::vector<PackedConfig> e1_configs;
  bool e1_overflow = false;
  long long n1 = 0;                  // distinct configs visited at e0 + gap
  bool agreement = false;            // all copies reached one energy in phase 1
  bool thermalized = false;
  std::uint64_t sweeps = 0;
};

// Energy trace binned on [2^k, 2^(k+1)); the last three complete bins must
// agree pairwise within one combined standard error.  A diagnostic, not a
// stopping rule.
inline bool check_thermalization(const std::vector<double>& history) {
  const std::size_t n = history.size();
  if (n < 8) return false;
  struct Bin { double mean, se; };
  std::vector<Bin> bins;
  for (int k = 0;; ++k) {
    const std::uint64_t lo = std::uint64_t(1) << k;
    const std::uint64_t hi = (std::uint64_t(2) << k) - 1;
    if (hi > n) break;
    double sum = 0, sq = 0;
    const double cnt = double(hi - lo + 1);
    for (std::uint64_t s = lo; s <= hi; ++s) {
      sum += history[s - 1];
      sq += history[s - 1] * history[s - 1];
    }
    const double mean = sum / cnt;
    const double var = cnt > 1 ? std::max(0.0, (sq - cnt * mean * mean) / (cnt - 1)) : 0.0;
    bins.push_back({mean, std::sqrt(var / cnt)});
  }
  if (bins.size() < 3) return false;
  for (std::size_t i = bins.size() - 3; i < bins.size(); ++i)
    for (std::size_t j = i + 1; j < bins.size(); ++j) {
      const double tol = std::sqrt(bins[i].se * bins[i].se + bins[j].se * bins[j].se);
      if (std::abs(bins[i].mean - bins[j].mean) > tol) return false;
    }
  return true;
}

// Parallel tempering with isoenergetic cluster moves.  n_copies independent
// ensembles each hold one replica per ladder temperature; exchanges happen
// inside a copy, cluster moves pair distinct copies at one temperature.
template <typename Scalar>
class PtIcmSolver {
 public:
  PtIcmSolver(const BasicInstance<Scalar>& inst, const SolverParams& params)
      : inst_(inst), p_(params), temps_(make_temperature_grid(params)),
        rng_(derive_seed(params.seed, 0xb01ca55ull)) {
    const Graph& g = *inst.graph;
    n_ = g.n;
    // flattened adjacency with coupler values for the hot loop
    site_off_.assign(g.adj_offset.begin(), g.adj_offset.end());
    site_nbr_.resize(g.adj_vertex.size());
    site_j_.resize(g.adj_vertex.size());
    for (std::size_t k = 0; k < g.adj_vertex.size(); ++k) {
      site_nbr_[k] = g.adj_vertex[k];
      site_j_[k] = inst.couplers[g.adj_edge[k]];
    }

    const double scale = energy_scale(inst);
    betas_payload_.resize(temps_.size());
    for (std::size_t t = 0; t < temps_.size(); ++t)
      betas_payload_[t] = scale / temps_[t];

    if constexpr (std::is_same_v<Scalar, long long>) {
      long long dmax = 0;
      for (int i = 0; i < n_; ++i) {
        long long acc = std::abs(inst.fields[i]);
        for (int k = site_off_[i]; k < site_off_[i + 1]; ++k)
          acc += std::abs(site_j_[k]);
        dmax = std::max(dmax, acc);
      }
      accept_.assign(temps_.size() * std::size_t(dmax + 1), 0.0);
      for (std::size_t t = 0; t < temps_.size(); ++t)
        for (long long d = 1; d <= dmax; ++d)
          accept_[t * (dmax + 1) + d] = std::exp(-2.0 * d * betas_payload_[t]);
      dmax_ = dmax;
    }

    // replicas start from independent random configs
    replicas_.resize(std::size_t(p_.n_copies) * temps_.size());
    energies_.resize(replicas_.size());
    for (auto& r : replicas_) {
      r.resize(std::size_t(n_));
      for (auto& s : r) s = std::int8_t(rng_.sign());
    }
    for (std::size_t i = 0; i < replicas_.size(); ++i)
      energies_[i] = raw_energy(inst_, replicas_[i]);
    in_cluster_.assign(std::size_t(n_), 0);
  }

  int n_sites() const { return n_; }
  const std::vector<double>& temperatures() const { return temps_; }
  const SpinConfig& config(int copy, int t) const { return replicas_[slot(copy, t)]; }
  Scalar cached_energy(int copy, int t) const { return energies_[slot(copy, t)]; }
  const std::vector<double>& history() const { return history_; }
  std::uint64_t pt_accepted() const { return pt_accepted_; }
  std::uint64_t icm_flipped_pairs() const { return icm_pairs_; }

  // one Metropolis pass over sites 0..n-1 of a single replica; a uniform
  // draw is consumed for every site so the stream is independent of the
  // accept pattern
  void metropolis_sweep(int copy, int t) {
    SpinConfig& s = replicas_[slot(copy, t)];
    Scalar& e = energies_[slot(copy, t)];
    for (int i = 0; i < n_; ++i) {
      Scalar f = inst_.fields[i];
      for (int k = site_off_[i]; k < site_off_[i + 1]; ++k)
        f += site_j_[k] * Scalar(s[site_nbr_[k]]);
      const Scalar de = Scalar(2) * Scalar(s[i]) * f;
      const double u = rng_.uniform();
      bool accept;
      if (de <= Scalar(0)) {
        accept = true;
      } else if constexpr (std::is_same_v<Scalar, long long>) {
        accept = u < accept_[std::size_t(t) * (dmax_ + 1) + std::size_t(de / 2)];
      } else {
        accept = u < std::exp(-betas_payload_[std::size_t(t)] * double(de));
      }
      if (accept) {
        s[i] = std::int8_t(-s[i]);
        e += de;
      }
    }
  }

  void metropolis_all() {
    for (int c = 0; c < p_.n_copies; ++c)
      for (int t = 0; t < p_.n_t; ++t) metropolis_sweep(c, t);
  }

  // adjacent-pair swaps, alternating pair parity per call, within each copy
  void pt_exchange() {
    const int parity = int(pt_calls_++ & 1);
    for (int c = 0; c < p_.n_copies; ++c)
      for (int t = parity; t + 1 < p_.n_t; t += 2) {
        const std::size_t a = slot(c, t), b = slot(c, t + 1);
        const double arg = (betas_payload_[std::size_t(t)] -
                            betas_payload_[std::size_t(t) + 1]) *
                           double(energies_[a] - energies_[b]);
        const double u = rng_.uniform();
        if (arg >= 0 || u < std::exp(arg)) {
          std::swap(replicas_[a], replicas_[b]);
          std::swap(energies_[a], energies_[b]);
          ++pt_accepted_;
        }
      }
  }

  // Houdayer moves at the n_icm lowest temperatures: random disjoint copy
  // pairs, one cluster grown from a random anti-aligned seed site, flipped
  // in both replicas.  E_a + E_b is conserved exactly.
  void icm_step() {
    if (p_.n_copies < 2) return;
    perm_.resize(std::size_t(p_.n_copies));
    for (int t = 0; t < p_.n_icm; ++t) {
      for (int c = 0; c < p_.n_copies; ++c) perm_[std::size_t(c)] = c;
      for (int c = p_.n_copies - 1; c > 0; --c)
        std::swap(perm_[std::size_t(c)], perm_[rng_.below(std::uint64_t(c) + 1)]);
      for (int q = 0; q + 1 < p_.n_copies; q += 2)
        icm_pair(perm_[std::size_t(q)], perm_[std::size_t(q) + 1], t);
    }
  }

  void sweep_unit() {
    metropolis_all();
    pt_exchange();
    icm_step();
    record_history();
  }

  GroundStateReport run() {
    const std::uint64_t total = p_.sweeps();
    const std::uint64_t phase1 = std::max<std::uint64_t>(1, total / 8);
    const double tol = tie_tol();

    std::vector<double> best(std::size_t(p_.n_copies),
                             std::numeric_limits<double>::max());
    std::vector<SpinConfig> best_cfg(std::size_t(p_.n_copies));
    for (std::uint64_t sw = 0; sw < std::min(phase1, total); ++sw) {
      sweep_unit();
      for (int c = 0; c < p_.n_copies; ++c) {
        const double e = double(energies_[slot(c, 0)]);
        if (e < best[std::size_t(c)]) {
          best[std::size_t(c)] = e;
          best_cfg[std::size_t(c)] = replicas_[slot(c, 0)];
        }
      }
    }

    GroundStateReport rep;
    rep.exact = std::is_same_v<Scalar, long long>;
    rep.sweeps = total;
    double e0 = *std::min_element(best.begin(), best.end());
    rep.agreement = true;
    for (const double e : best) rep.agreement = rep.agreement && e - e0 <= tol;

    const double gap = gap_payload();
    std::unordered_set<PackedConfig, PackedConfigHash> gs, e1;
    bool gs_over = false, e1_over = false;
    auto offer = [&](std::unordered_set<PackedConfig, PackedConfigHash>& set,
                     bool& over, const SpinConfig& cfg) {
      if (set.size() >= p_.config_cap) {
        if (!set.count(pack(cfg))) over = true;
        return;
      }
      set.insert(pack(cfg));
    };
    for (int c = 0; c < p_.n_copies; ++c)
      if (best[std::size_t(c)] - e0 <= tol) offer(gs, gs_over, best_cfg[std::size_t(c)]);

    for (std::uint64_t sw = phase1; sw < total; ++sw) {
      sweep_unit();
      for (int c = 0; c < p_.n_copies; ++c) {
        const double e = double(energies_[slot(c, 0)]);
        if (e < e0 - tol) {
          e0 = e;
          gs.clear();
          e1.clear();
          gs_over = e1_over = false;
          offer(gs, gs_over, replicas_[slot(c, 0)]);
        } else if (e - e0 <= tol) {
          offer(gs, gs_over, replicas_[slot(c, 0)]);
        }
      }
      // the excited census scans every replica: the lowest temperature
      // almost never visits the first excited level, higher ones do
      for (std::size_t s = 0; s < replicas_.size(); ++s)
        if (std::abs(double(energies_[s]) - (e0 + gap)) <= tol)
          offer(e1, e1_over, replicas_[s]);
    }

    const double scale = energy_scale(inst_);
    rep.e0 = e0 * scale;
    rep.e0_int = (long long)(e0);
    rep.gs_configs.assign(gs.begin(), gs.end());
    std::sort(rep.gs_configs.begin(), rep.gs_configs.end());
    rep.gs_overflow = gs_over;
    rep.degeneracy = (long long)(gs.size());
    rep.has_e1 = !e1.empty();
    rep.e1 = (e0 + gap) * scale;
    rep.e1_int = (long long)(e0 + gap);
    rep.e1_configs.assign(e1.begin(), e1.end());
    std::sort(rep.e1_configs.begin(), rep.e1_configs.end());
    rep.e1_overflow = e1_over;
    rep.n1 = (long long)(e1.size());
    rep.thermalized = check_thermalization(history_);
    return rep;
  }

 private:
  std::size_t slot(int copy, int t) const {
    return std::size_t(copy) * temps_.size() + std::size_t(t);
  }

  double tie_tol() const {
    return std::is_same_v<Scalar, long long> ? 0.0 : 1e-9;
  }

  // energy quantum between adjacent levels, payload units
  double gap_payload() const {
    if constexpr (std::is_same_v<Scalar, long long>)
      return 2.0;
    else
      return inst_.instance_class().classical_gap();
  }

  void record_history() {
    history_.push_back(double(energies_[slot(0, 0)]) * energy_scale(inst_));
  }

  void icm_pair(int ca, int cb, int t) {
    SpinConfig& a = replicas_[slot(ca, t)];
    SpinConfig& b = replicas_[slot(cb, t)];
    sites_.clear();
    for (int i = 0; i < n_; ++i)
      if (a[i] != b[i]) sites_.push_back(i);
    if (sites_.empty()) return;
    const int seed_site = sites_[rng_.below(sites_.size())];

    ++stamp_;
    cluster_.clear();
    cluster_.push_back(seed_site);
    in_cluster_[std::size_t(seed_site)] = stamp_;
    for (std::size_t head = 0; head < cluster_.size(); ++head) {
      const int i = cluster_[head];
      for (int k = site_off_[i]; k < site_off_[i + 1]; ++k) {
        const int j = site_nbr_[k];
        if (a[j] != b[j] && in_cluster_[std::size_t(j)] != stamp_) {
          in_cluster_[std::size_t(j)] = stamp_;
          cluster_.push_back(j);
        }
      }
    }

    Scalar de_a = 0, de_b = 0;
    for (const int i : cluster_) {
      de_a += Scalar(2) * inst_.fields[i] * Scalar(a[i]);
      de_b += Scalar(2) * inst_.fields[i] * Scalar(b[i]);
      for (int k = site_off_[i]; k < site_off_[i + 1]; ++k) {
        const int j = site_nbr_[k];
        if (in_cluster_[std::size_t(j)] == stamp_) continue;
        de_a += Scalar(2) * site_j_[k] * Scalar(a[i]) * Scalar(a[j]);
        de_b += Scalar(2) * site_j_[k] * Scalar(b[i]) * Scalar(b[j]);
      }
    }
    for (const int i : cluster_) {
      a[i] = std::int8_t(-a[i]);
      b[i] = std::int8_t(-b[i]);
    }
    energies_[slot(ca, t)] += de_a;
    energies_[slot(cb, t)] += de_b;
    ++icm_pairs_;
  }

  const BasicInstance<Scalar>& inst_;
  SolverParams p_;
  std::vector<double> temps_;
  Rng rng_;
  int n_ = 0;
  std::vector<int> site_off_, site_nbr_;
  std::vector<Scalar> site_j_;
  std::vector<double> betas_payload_;
  std::vector<double> accept_;
  long long dmax_ = 0;
  std::vector<SpinConfig> replicas_;
  std::vector<Scalar> energies_;
  std::vector<double> history_;
  std::vector<int> in_cluster_;
  std::vector<int> cluster_, sites_;
  std::vector<int> perm_;
  int stamp_ = 0;
  std::uint64_t pt_calls_ = 0, pt_accepted_ = 0, icm_pairs_ = 0;
};

template <typename Scalar>
GroundStateReport find_ground_state(const BasicInstance<Scalar>& inst,
                                    const SolverParams& params) {
  PtIcmSolver<Scalar> solver(inst, params);
  return solver.run();
}

} // namespace spinbench
