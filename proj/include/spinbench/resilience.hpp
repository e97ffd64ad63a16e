#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spinbench/engine.hpp"
#include "spinbench/stats.hpp"

namespace spinbench {

// Quenched gaussian control-error widths, in units of the normalized
// coupler scale.  Both zero means the identity perturbation.
struct NoiseSpec {
  double delta_j = 0;
  double delta_h = 0;
  int n_trials = 10;

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

inline NoiseSpec preset_dw2() { return {0.035, 0.05, 10}; }
inline NoiseSpec preset_dw2x() { return {0.025, 0.03, 10}; }

inline NoiseSpec noise_preset(const std::string& name) {
  if (name == "dw2") return preset_dw2();
  if (name == "dw2x") return preset_dw2x();
  throw std::invalid_argument("unknown noise preset: " + name);
}

// One perturbed copy: J' = J + dJ*g per coupler, h' = h + dh*g per site,
// draws in canonical edge order then site order.
inline RealInstance perturb(const Instance& inst, const NoiseSpec& spec,
                            std::uint64_t stream_seed) {
  if (!inst.normalized)
    throw std::logic_error("perturbation is defined on the normalized scale");
  if (spec.delta_j < 0 || spec.delta_h < 0)
    throw std::invalid_argument("noise widths must be nonnegative");
  RealInstance r = to_real(inst);
  Rng rng(derive_seed(stream_seed, 0x9035e5ull));
  if (spec.delta_j > 0)
    for (auto& j : r.couplers) j += spec.delta_j * rng.gaussian();
  if (spec.delta_h > 0)
    for (auto& h : r.fields) h += spec.delta_h * rng.gaussian();
  return r;
}

struct TrialOutcome {
  int trial = 0;
  std::uint64_t seed = 0;
  bool success = false;          // perturbed minimizer is still an original one
  double original_energy = 0;    // unperturbed energy of the returned config
  long long original_energy_int = 0;
  double perturbed_e0 = 0;

  friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

struct ResilienceRecord {
  NoiseSpec noise;
  std::vector<TrialOutcome> trials;
  double r = 0;

  friend bool operator==(const ResilienceRecord&, const ResilienceRecord&) = default;
};

struct ResilienceOptions {
  EngineConfig engine;
  std::uint64_t seed = 0;          // master stream for perturbations and solves
  bool allow_degenerate = false;   // compare against the full ground set
  double tol = 1e-9;
};

// True when the ground set is a single state (one flip pair under zero
// fields counts as one state).
inline bool unique_ground_state(const SolveResult& res, int n, bool zero_fields) {
  if (res.gs_overflow) return false;
  if (!zero_fields) return res.degeneracy == 1;
  if (res.degeneracy != 2 || res.gs_configs.size() != 2) return false;
  return res.gs_configs[1] == flipped(res.gs_configs[0], n);
}

namespace detail {

inline bool member(const std::vector<PackedConfig>& sorted_set,
                   const PackedConfig& c) {
  return std::binary_search(sorted_set.begin(), sorted_set.end(), c);
}

} // namespace detail

// Success predicate for one trial: the representative minimizer of the
// perturbed problem must lie in the original ground set, modulo a global
// flip when no fields are in play.
inline bool trial_success(const SolveResult& original, const PackedConfig& rep,
                          int n, bool modulo_flip) {
  if (detail::member(original.gs_configs, rep)) return true;
  return modulo_flip && detail::member(original.gs_configs, flipped(rep, n));
}

inline ResilienceRecord instance_resilience(const Instance& inst,
                                            const SolveResult& original,
                                            const NoiseSpec& noise,
                                            const ResilienceOptions& opt) {
  if (!inst.normalized)
    throw std::logic_error("resilience is defined on the normalized scale");
  if (noise.n_trials < 1) throw std::invalid_argument("need at least one trial");
  if (original.gs_configs.empty())
    throw std::invalid_argument("original solve carries no ground configs");
  if (original.gs_overflow)
    throw std::invalid_argument("original ground set was truncated");
  const bool zero_fields = !inst.has_fields();
  if (!opt.allow_degenerate &&
      !unique_ground_state(original, inst.n(), zero_fields))
    throw std::invalid_argument("instance has a degenerate ground state");

  ResilienceRecord rec;
  rec.noise = noise;
  rec.trials.reserve(std::size_t(noise.n_trials));

  for (int t = 0; t < noise.n_trials; ++t) {
    TrialOutcome out;
    out.trial = t;
    out.seed = derive_seed(opt.seed, inst.seed, std::uint64_t(t));
    const RealInstance pert = perturb(inst, noise, out.seed);
    const SolveResult res =
        engine_solve(opt.engine, pert, derive_seed(out.seed, 1));
    if (res.gs_configs.empty())
      throw std::runtime_error("trial solve returned no configs");
    const PackedConfig& rep = res.gs_configs.front();
    const bool modulo_flip = zero_fields && !pert.has_fields();
    out.success = trial_success(original, rep, inst.n(), modulo_flip);
    const SpinConfig s = unpack(rep, inst.n());
    out.original_energy_int = raw_energy(inst, s);
    out.original_energy = double(out.original_energy_int) * energy_scale(inst);
    out.perturbed_e0 = res.e0;
    rec.trials.push_back(out);
    if (out.success) rec.r += 1.0;
  }
  rec.r /= double(noise.n_trials);
  return rec;
}

enum class Ladder { Candidate, Populated };

// R_k: fraction of trials whose returned config stays within k gap quanta
// of the original ground energy.  The candidate ladder spaces levels by the
// class gap whether or not they are populated; the populated ladder walks
// the instance's actual spectrum and needs enough tracked levels.
inline double relaxed_resilience(const ResilienceRecord& rec,
                                 const Instance& inst,
                                 const SolveResult& original, int k,
                                 Ladder ladder = Ladder::Candidate,
                                 double tol = 1e-9) {
  if (k < 0) throw std::invalid_argument("level index must be nonnegative");
  if (rec.trials.empty()) throw std::invalid_argument("record has no trials");
  double threshold;
  bool exact_threshold = false;
  long long threshold_int = 0;
  if (ladder == Ladder::Candidate) {
    threshold = original.e0 + k * inst.instance_class().classical_gap();
    exact_threshold = true;
    threshold_int = original.e0_int + 2 * k;
  } else {
    if (std::size_t(k) >= original.levels.size()) {
      if (original.levels_truncated)
        throw std::invalid_argument("not enough tracked levels for this k");
      return 1.0;  // the whole spectrum sits within k levels
    }
    threshold = original.levels[std::size_t(k)];
  }
  int hits = 0;
  for (const auto& t : rec.trials) {
    if (exact_threshold)
      hits += t.original_energy_int <= threshold_int;
    else
      hits += t.original_energy <= threshold + tol;
  }
  return double(hits) / double(rec.trials.size());
}

// Class-level resilience: bootstrap the per-instance means.
inline BootstrapResult class_resilience(const std::vector<ResilienceRecord>& records,
                                        int n_resamples = 10000,
                                        std::uint64_t seed = 0) {
  if (records.empty()) throw std::invalid_argument("no records");
  for (const auto& rec : records)
    if (!(rec.noise == records.front().noise))
      throw std::invalid_argument("records mix noise settings");
  std::vector<double> values;
  values.reserve(records.size());
  for (const auto& rec : records) values.push_back(rec.r);
  return bootstrap_mean(values, n_resamples, seed);
}

struct ProductRuleReport {
  double predicted = 0;
  double predicted_err = 0;
  double observed = 0;
  double observed_err = 0;
  double deviation_sigma = 0;
  bool within_2sigma = false;
};

// Independent bond and field noise should compose multiplicatively:
// R(dJ, dh) ~ R(dJ, 0) * R(0, dh).
inline ProductRuleReport product_rule_check(const BootstrapResult& bond,
                                            const BootstrapResult& field,
                                            const BootstrapResult& both) {
  ProductRuleReport rep;
  rep.predicted = bond.mean * field.mean;
  rep.predicted_err = std::sqrt(bond.err * field.mean * bond.err * field.mean +
                                bond.mean * field.err * bond.mean * field.err);
  rep.observed = both.mean;
  rep.observed_err = both.err;
  const double denom = std::sqrt(rep.predicted_err * rep.predicted_err +
                                 rep.observed_err * rep.observed_err);
  const double diff = std::abs(rep.predicted - rep.observed);
  rep.deviation_sigma = denom > 0 ? diff / denom : (diff > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  rep.within_2sigma = rep.deviation_sigma <= 2.0;
  return rep;
}

} // namespace spinbench
