#pragma once

// Command-line driver behind tools/spinbench.cpp.  Subcommands cover the
// whole workflow: generate instance files, solve them, run noise
// resilience, measure class yields, mine benchmark sets, and fold result
// shards into CSV reports.  Records are written in input order with sorted
// keys, so equal runs produce byte-identical files at any worker count.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spinbench/engine.hpp"
#include "spinbench/instance.hpp"
#include "spinbench/mining.hpp"
#include "spinbench/resilience.hpp"
#include "spinbench/results_io.hpp"
#include "spinbench/stats.hpp"
#include "spinbench/version.hpp"

namespace spinbench::cli {

namespace fs = std::filesystem;

inline bool env_flag(const char* name) {
  const char* v = std::getenv(name);
  return v && *v && std::string_view(v) != "0";
}

inline std::string env_or(const char* name, const char* fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::string(fallback);
}

struct CommonOpts {
  std::string out_dir = env_or("SPINBENCH_OUT", ".");
  bool stable = env_flag("SPINBENCH_STABLE_OUTPUT");
  unsigned workers = 1;

  fs::path resolve(const std::string& name) const {
    fs::path p(name);
    return p.is_absolute() ? p : fs::path(out_dir) / p;
  }
};

inline void add_common(CLI::App& cmd, CommonOpts& o, bool with_workers = true) {
  cmd.add_option("--out-dir", o.out_dir,
                 "output directory (env SPINBENCH_OUT)")
      ->capture_default_str();
  cmd.add_flag("--stable-output", o.stable,
               "zero wall-clock fields so repeated runs compare "
               "byte-identical (env SPINBENCH_STABLE_OUTPUT)");
  if (with_workers)
    cmd.add_option("--workers", o.workers, "worker threads")
        ->check(CLI::Range(1u, 256u))
        ->capture_default_str();
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms(bool stable) const {
    if (stable) return 0.0;
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }
};

// Runs fn(0..n-1) across up to `workers` threads; the first exception wins
// and is rethrown after all threads drain.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned k = unsigned(std::min<std::size_t>(workers, n));
  pool.reserve(k);
  for (unsigned t = 0; t < k; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------
// engine flags

struct EngineOpts {
  std::string engine = "pt-icm";
  int b = 19;
  std::uint64_t n_sweeps = 0;
  int copies = 4;
  int n_t = 30;
  double t_min = 0.15;
  double t_max = -1;  // negative: class ladder default
  int n_icm = -1;     // negative: class ladder default
  std::uint64_t config_cap = std::uint64_t(1) << 16;
  int max_n = 32;
  int levels = 2;
  double tie_tol = 1e-9;
};

inline void add_engine(CLI::App& cmd, EngineOpts& o) {
  cmd.add_option("--engine", o.engine,
                 "solver backend: oracle (exhaustive) or pt-icm")
      ->check(CLI::IsMember({"oracle", "pt-icm"}))
      ->capture_default_str();
  cmd.add_option("-b", o.b, "sampler run length exponent (2^b sweep units)")
      ->capture_default_str();
  cmd.add_option("--sweeps", o.n_sweeps, "sampler sweep units, overrides -b");
  cmd.add_option("--copies", o.copies, "independent replica sets")
      ->capture_default_str();
  cmd.add_option("--n-temps", o.n_t, "temperatures per replica set")
      ->capture_default_str();
  cmd.add_option("--t-min", o.t_min, "lowest temperature")
      ->capture_default_str();
  cmd.add_option("--t-max", o.t_max,
                 "highest temperature (default: class ladder)");
  cmd.add_option("--n-icm", o.n_icm,
                 "temperatures eligible for cluster moves "
                 "(default: class ladder)");
  cmd.add_option("--config-cap", o.config_cap,
                 "stored configs per energy level")
      ->capture_default_str();
  cmd.add_option("--max-n", o.max_n, "oracle size limit")
      ->capture_default_str();
  cmd.add_option("--levels", o.levels, "oracle tracked energy levels")
      ->check(CLI::Range(2, 64))
      ->capture_default_str();
  cmd.add_option("--tie-tol", o.tie_tol,
                 "oracle energy tie width for real payloads")
      ->capture_default_str();
}

inline EngineConfig engine_config(const EngineOpts& o) {
  EngineConfig cfg = EngineConfig::parse_kind(o.engine);
  cfg.solver.b = o.b;
  cfg.solver.n_sweeps = o.n_sweeps;
  cfg.solver.n_copies = o.copies;
  cfg.solver.n_t = o.n_t;
  cfg.solver.t_min = o.t_min;
  cfg.auto_ladder = o.t_max < 0 && o.n_icm < 0;
  if (o.t_max >= 0) cfg.solver.t_max = o.t_max;
  if (o.n_icm >= 0) cfg.solver.n_icm = o.n_icm;
  cfg.solver.config_cap = std::size_t(o.config_cap);
  cfg.oracle.config_cap = std::size_t(o.config_cap);
  cfg.oracle.max_n = o.max_n;
  cfg.oracle.level_cap = o.levels;
  cfg.oracle.tie_tol = o.tie_tol;
  return cfg;
}

inline json engine_json(const EngineOpts& o) {
  json j;
  j["engine"] = o.engine;
  if (o.engine == "oracle") {
    j["max_n"] = o.max_n;
    j["levels"] = o.levels;
    j["tie_tol"] = o.tie_tol;
  } else {
    j["b"] = o.b;
    if (o.n_sweeps) j["sweeps"] = o.n_sweeps;
    j["copies"] = o.copies;
    j["n_temps"] = o.n_t;
    j["t_min"] = o.t_min;
    j["t_max"] = o.t_max < 0 ? json("auto") : json(o.t_max);
    j["n_icm"] = o.n_icm < 0 ? json("auto") : json(o.n_icm);
  }
  j["config_cap"] = o.config_cap;
  return j;
}

// ---------------------------------------------------------------------------
// instance loading

struct NamedInstance {
  std::string path;
  std::string id;
  LoadedInstance loaded;
  Instance norm;  // exact payload on the normalized scale
  bool exact = false;

  int n() const { return loaded.graph->n; }
  std::string grid() const {
    return detail::grid_tag(loaded.graph->rows, loaded.graph->cols);
  }
};

struct InstanceSet {
  GraphCache cache;
  std::vector<NamedInstance> items;
};

inline std::vector<std::string> read_manifest(const fs::path& mpath) {
  std::ifstream is(mpath);
  if (!is) throw std::runtime_error("cannot open " + mpath.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    fs::path p(line);
    out.push_back(p.is_absolute() ? p.string()
                                  : (mpath.parent_path() / p).string());
  }
  return out;
}

inline InstanceSet load_instances(const std::vector<std::string>& files,
                                  const std::vector<std::string>& manifests) {
  std::vector<std::string> all = files;
  for (const auto& m : manifests) {
    auto more = read_manifest(m);
    all.insert(all.end(), more.begin(), more.end());
  }
  if (all.empty()) throw std::runtime_error("no instance files given");
  InstanceSet set;
  set.items.reserve(all.size());
  for (const auto& f : all) {
    std::ifstream is(f);
    if (!is) throw std::runtime_error("cannot open " + f);
    NamedInstance ni;
    ni.path = f;
    try {
      ni.loaded = read_instance(is, &set.cache);
    } catch (const std::exception& e) {
      throw std::runtime_error(f + ": " + e.what());
    }
    const auto& g = *ni.loaded.graph;
    ni.id = instance_id(ni.loaded.instance_class(), g.rows, g.cols,
                        ni.loaded.seed());
    ni.exact = ni.loaded.is_exact();
    if (ni.exact) ni.norm = normalize(*ni.loaded.exact);
    set.items.push_back(std::move(ni));
  }
  return set;
}

inline void parse_grid(const std::string& s, int& rows, int& cols) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) {
      rows = cols = std::stoi(s);
    } else {
      rows = std::stoi(s.substr(0, x));
      cols = std::stoi(s.substr(x + 1));
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("bad grid size: " + s);
  }
  if (rows < 1 || cols < 1) throw std::invalid_argument("bad grid size: " + s);
}

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    const std::string tok = s.substr(pos, next - pos);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number list: " + s);
    }
    pos = next + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// record codecs

inline json result_json(const SolveResult& r, int n, bool zero_fields,
                        std::size_t max_stored) {
  json j;
  j["exhaustive"] = r.exhaustive;
  j["exact"] = r.exact;
  j["e0"] = r.e0;
  if (r.exact) j["e0_int"] = r.e0_int;
  j["degeneracy"] = r.degeneracy;
  j["gs_overflow"] = r.gs_overflow;
  j["n1"] = r.n1;
  if (r.has_e1) {
    j["e1"] = r.e1;
    if (r.exact) j["e1_int"] = r.e1_int;
  }
  j["e1_overflow"] = r.e1_overflow;
  j["unique_gs"] = unique_ground_state(r, n, zero_fields);
  if (!r.exhaustive) {
    j["agreement"] = r.agreement;
    j["thermalized"] = r.thermalized;
    j["sweeps"] = r.sweeps;
  }
  j["levels"] = r.levels;
  j["level_counts"] = r.level_counts;
  j["levels_truncated"] = r.levels_truncated;
  json cfgs = json::array();
  const std::size_t keep = std::min(max_stored, r.gs_configs.size());
  for (std::size_t i = 0; i < keep; ++i) cfgs.push_back(to_hex(r.gs_configs[i]));
  j["gs_configs"] = std::move(cfgs);
  j["configs_complete"] = !r.gs_overflow && r.gs_configs.size() <= max_stored;
  return j;
}

// Partial inverse of result_json; recovers the fields resilience needs to
// reuse a stored original solve.
inline SolveResult result_from_json(const json& j) {
  SolveResult r;
  r.exhaustive = j.value("exhaustive", false);
  r.exact = j.value("exact", false);
  r.e0 = j.at("e0").get<double>();
  r.e0_int = j.value("e0_int", 0ll);
  r.degeneracy = j.at("degeneracy").get<long long>();
  r.gs_overflow = j.value("gs_overflow", false);
  r.n1 = j.value("n1", 0ll);
  if (j.contains("e1")) {
    r.has_e1 = true;
    r.e1 = j["e1"].get<double>();
    r.e1_int = j.value("e1_int", 0ll);
  }
  r.e1_overflow = j.value("e1_overflow", false);
  if (j.contains("levels")) r.levels = j["levels"].get<std::vector<double>>();
  if (j.contains("level_counts"))
    r.level_counts = j["level_counts"].get<std::vector<long long>>();
  r.levels_truncated = j.value("levels_truncated", true);
  for (const auto& h : j.at("gs_configs"))
    r.gs_configs.push_back(from_hex(h.get<std::string>()));
  return r;
}

inline json error_record(const std::string& id, const std::string& message) {
  json j;
  j["type"] = "error";
  j["id"] = id;
  j["message"] = message;
  return j;
}

inline std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".")
                                                    : path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOpts {
  std::string cls = "U1";
  std::string grid = "8";
  int count = 1;
  std::uint64_t seed = 0;
  std::string manifest_name;
};

inline int cmd_generate(const CommonOpts& c, const GenerateOpts& g) {
  const InstanceClass& cls = InstanceClass::by_name(g.cls);
  int rows = 0, cols = 0;
  parse_grid(g.grid, rows, cols);
  if (g.count < 1) throw std::invalid_argument("count must be positive");
  const ChimeraGraph graph = build_chimera_grid(rows, cols);
  fs::create_directories(c.out_dir);

  std::vector<std::string> names;
  names.reserve(std::size_t(g.count));
  for (int k = 0; k < g.count; ++k) {
    const Instance inst =
        sample_instance(cls, graph, instance_stream_seed(g.seed, k));
    const std::string fname =
        instance_id(cls, rows, cols, inst.seed) + ".inst";
    auto os = open_output(c.resolve(fname));
    write_instance_file(os, inst, rows, cols);
    names.push_back(fname);
  }

  const std::string mname =
      g.manifest_name.empty()
          ? "manifest-" + std::string(cls.name) + "-m" +
                detail::grid_tag(rows, cols) + "-s" + std::to_string(g.seed) +
                ".txt"
          : g.manifest_name;
  const fs::path mpath = c.resolve(mname);
  auto ms = open_output(mpath);
  for (const auto& name : names) ms << name << '\n';
  std::cout << "wrote " << g.count << " instances and " << mpath.string()
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// solve

struct SolveOpts {
  std::vector<std::string> files;
  std::vector<std::string> manifests;
  std::string results = "solve.jsonl";
  std::uint64_t seed = 0;
  std::uint64_t max_stored = 128;
};

// Solves every instance of one scalar type sharing one graph, honoring the
// worker count; oracle chunks share vectorized enumeration walks.
template <typename Scalar>
void solve_group(const EngineConfig& cfg, unsigned workers,
                 const std::vector<const BasicInstance<Scalar>*>& insts,
                 const std::vector<std::uint64_t>& seeds,
                 std::vector<SolveResult>& out) {
  const std::size_t n = insts.size();
  out.resize(n);
  const std::size_t chunk =
      cfg.kind == EngineConfig::Kind::Oracle ? 16 : 1;
  const std::size_t n_tasks = (n + chunk - 1) / chunk;
  parallel_for(n_tasks, workers, [&](std::size_t t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    const std::vector<const BasicInstance<Scalar>*> batch(
        insts.begin() + std::ptrdiff_t(lo), insts.begin() + std::ptrdiff_t(hi));
    const std::vector<std::uint64_t> bs(seeds.begin() + std::ptrdiff_t(lo),
                                        seeds.begin() + std::ptrdiff_t(hi));
    auto res = engine_solve_batch(cfg, batch, bs);
    for (std::size_t i = lo; i < hi; ++i) out[i] = std::move(res[i - lo]);
  });
}

inline int cmd_solve(const CommonOpts& c, const EngineOpts& eo,
                     const SolveOpts& so) {
  const Stopwatch sw;
  const EngineConfig cfg = engine_config(eo);
  InstanceSet set = load_instances(so.files, so.manifests);
  const std::size_t n_items = set.items.size();
  std::vector<json> records(n_items);

  // group by graph and payload type; oversize instances become error records
  std::map<const ChimeraGraph*, std::vector<std::size_t>> exact_groups;
  std::map<const ChimeraGraph*, std::vector<std::size_t>> real_groups;
  std::size_t n_errors = 0;
  for (std::size_t i = 0; i < n_items; ++i) {
    const auto& item = set.items[i];
    if (cfg.kind == EngineConfig::Kind::Oracle && item.n() > cfg.oracle.max_n) {
      records[i] =
          error_record(item.id, "instance larger than oracle size limit");
      ++n_errors;
      continue;
    }
    (item.exact ? exact_groups : real_groups)[item.loaded.graph.get()]
        .push_back(i);
  }

  auto record_for = [&](std::size_t i, const SolveResult& res) {
    const auto& item = set.items[i];
    const bool zero_fields = item.exact ? !item.norm.has_fields()
                                        : !item.loaded.real->has_fields();
    json j = result_json(res, item.n(), zero_fields, so.max_stored);
    j["type"] = "solve";
    j["id"] = item.id;
    j["class"] = std::string(item.loaded.instance_class().name);
    j["m"] = item.grid();
    j["seed"] = item.loaded.seed();
    j["n"] = item.n();
    j["engine"] = cfg.name();
    return j;
  };

  for (auto& [graph, idx] : exact_groups) {
    std::vector<const Instance*> insts;
    std::vector<std::uint64_t> seeds;
    for (auto i : idx) {
      insts.push_back(&set.items[i].norm);
      seeds.push_back(derive_seed(so.seed, set.items[i].norm.seed));
    }
    std::vector<SolveResult> res;
    solve_group(cfg, c.workers, insts, seeds, res);
    for (std::size_t k = 0; k < idx.size(); ++k)
      records[idx[k]] = record_for(idx[k], res[k]);
  }
  for (auto& [graph, idx] : real_groups) {
    std::vector<const RealInstance*> insts;
    std::vector<std::uint64_t> seeds;
    for (auto i : idx) {
      insts.push_back(&*set.items[i].loaded.real);
      seeds.push_back(derive_seed(so.seed, set.items[i].loaded.real->seed));
    }
    std::vector<SolveResult> res;
    solve_group(cfg, c.workers, insts, seeds, res);
    for (std::size_t k = 0; k < idx.size(); ++k)
      records[idx[k]] = record_for(idx[k], res[k]);
  }

  json cfg_json = engine_json(eo);
  cfg_json["seed"] = so.seed;
  cfg_json["max_stored"] = so.max_stored;
  const fs::path out_path = c.resolve(so.results);
  auto os = open_output(out_path);
  ResultsWriter w(os, {"solve", cfg_json});
  for (const auto& rec : records) w.write(rec);
  json summary;
  summary["type"] = "summary";
  summary["n_instances"] = n_items;
  summary["n_errors"] = n_errors;
  summary["wall_ms"] = sw.ms(c.stable);
  w.write(summary);
  std::cout << "wrote " << out_path.string() << " (" << n_items << " instances, "
            << n_errors << " errors)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// resilience

struct ResilienceCmdOpts {
  std::vector<std::string> files;
  std::vector<std::string> manifests;
  std::string solutions;
  std::string dj = "0";
  std::string dh = "0";
  std::string preset;
  int trials = 10;
  int k_max = 4;
  std::string ladder = "candidate";
  bool allow_degenerate = false;
  std::uint64_t seed = 0;
  int boot = 10000;
  std::string results = "resilience.jsonl";
};

inline std::vector<NoiseSpec> noise_grid(const ResilienceCmdOpts& o) {
  if (!o.preset.empty()) {
    NoiseSpec spec = noise_preset(o.preset);
    spec.n_trials = o.trials;
    return {spec};
  }
  std::vector<NoiseSpec> grid;
  for (const double dj : parse_double_list(o.dj))
    for (const double dh : parse_double_list(o.dh))
      grid.push_back({dj, dh, o.trials});
  return grid;
}

inline int cmd_resilience(const CommonOpts& c, const EngineOpts& eo,
                          const ResilienceCmdOpts& ro) {
  const Stopwatch sw;
  const EngineConfig cfg = engine_config(eo);
  const std::vector<NoiseSpec> grid = noise_grid(ro);
  const Ladder ladder =
      ro.ladder == "populated" ? Ladder::Populated : Ladder::Candidate;
  InstanceSet set = load_instances(ro.files, ro.manifests);
  const std::size_t n_items = set.items.size();

  // stored originals, reusable only when the ground set is complete
  std::map<std::string, SolveResult> stored;
  if (!ro.solutions.empty()) {
    const ResultsFile f = read_results_file(ro.solutions);
    for (const auto& rec : f.records) {
      if (rec.value("type", "") != "solve") continue;
      if (!rec.value("configs_complete", false)) continue;
      if (!rec.value("exact", false)) continue;
      stored[rec.at("id").get<std::string>()] = result_from_json(rec);
    }
  }

  std::vector<json> pre_errors;
  std::vector<std::size_t> live;     // items entering the trial stage
  std::vector<SolveResult> originals(n_items);
  {
    std::map<const ChimeraGraph*, std::vector<std::size_t>> to_solve;
    for (std::size_t i = 0; i < n_items; ++i) {
      const auto& item = set.items[i];
      if (!item.exact) {
        pre_errors.push_back(
            error_record(item.id, "resilience needs exact integer payloads"));
        continue;
      }
      if (cfg.kind == EngineConfig::Kind::Oracle &&
          item.n() > cfg.oracle.max_n) {
        pre_errors.push_back(
            error_record(item.id, "instance larger than oracle size limit"));
        continue;
      }
      live.push_back(i);
      const auto it = stored.find(item.id);
      if (it != stored.end()) {
        originals[i] = it->second;
      } else {
        to_solve[item.loaded.graph.get()].push_back(i);
      }
    }
    for (auto& [graph, idx] : to_solve) {
      std::vector<const Instance*> insts;
      std::vector<std::uint64_t> seeds;
      for (auto i : idx) {
        insts.push_back(&set.items[i].norm);
        seeds.push_back(derive_seed(set.items[i].norm.seed, 0x50e0ull));
      }
      std::vector<SolveResult> res;
      solve_group(cfg, c.workers, insts, seeds, res);
      for (std::size_t k = 0; k < idx.size(); ++k)
        originals[idx[k]] = std::move(res[k]);
    }
  }

  // one task per (instance, noise point)
  struct Cell {
    std::size_t item = 0;
    std::size_t point = 0;
  };
  std::vector<Cell> cells;
  cells.reserve(live.size() * grid.size());
  for (const auto i : live)
    for (std::size_t p = 0; p < grid.size(); ++p) cells.push_back({i, p});
  std::vector<json> cell_records(cells.size());

  ResilienceOptions base;
  base.engine = cfg;
  base.seed = ro.seed;
  base.allow_degenerate = ro.allow_degenerate;

  parallel_for(cells.size(), c.workers, [&](std::size_t ci) {
    const auto [i, p] = cells[ci];
    const auto& item = set.items[i];
    const NoiseSpec& spec = grid[p];
    json j;
    try {
      const ResilienceRecord rec =
          instance_resilience(item.norm, originals[i], spec, base);
      j["type"] = "resilience";
      j["id"] = item.id;
      j["class"] = std::string(item.loaded.instance_class().name);
      j["m"] = item.grid();
      j["seed"] = item.norm.seed;
      j["delta_j"] = spec.delta_j;
      j["delta_h"] = spec.delta_h;
      j["n_trials"] = spec.n_trials;
      j["r"] = rec.r;
      json ladder_vals = json::array();
      for (int k = 0; k <= ro.k_max; ++k) {
        try {
          ladder_vals.push_back(
              relaxed_resilience(rec, item.norm, originals[i], k, ladder));
        } catch (const std::exception&) {
          ladder_vals.push_back(nullptr);
        }
      }
      j["r_k"] = std::move(ladder_vals);
      json trials = json::array();
      for (const auto& t : rec.trials) {
        json tj;
        tj["trial"] = t.trial;
        tj["seed"] = t.seed;
        tj["success"] = t.success;
        tj["original_energy"] = t.original_energy;
        tj["original_energy_int"] = t.original_energy_int;
        tj["perturbed_e0"] = t.perturbed_e0;
        trials.push_back(std::move(tj));
      }
      j["trials"] = std::move(trials);
    } catch (const std::exception& e) {
      j = error_record(item.id, e.what());
      j["delta_j"] = spec.delta_j;
      j["delta_h"] = spec.delta_h;
    }
    cell_records[ci] = std::move(j);
  });

  // per (class, grid, point) aggregates over successful records
  std::map<std::tuple<std::string, std::string, double, double>,
           std::vector<double>>
      groups;
  std::size_t n_errors = pre_errors.size();
  for (const auto& rec : cell_records) {
    if (rec.value("type", "") != "resilience") {
      ++n_errors;
      continue;
    }
    groups[{rec["class"].get<std::string>(), rec["m"].get<std::string>(),
            rec["delta_j"].get<double>(), rec["delta_h"].get<double>()}]
        .push_back(rec["r"].get<double>());
  }

  json cfg_json = engine_json(eo);
  cfg_json["seed"] = ro.seed;
  cfg_json["trials"] = ro.trials;
  cfg_json["ladder"] = ro.ladder;
  cfg_json["k_max"] = ro.k_max;
  cfg_json["allow_degenerate"] = ro.allow_degenerate;
  if (!ro.preset.empty()) cfg_json["preset"] = ro.preset;

  const fs::path out_path = c.resolve(ro.results);
  auto os = open_output(out_path);
  ResultsWriter w(os, {"resilience", cfg_json});
  for (const auto& rec : pre_errors) w.write(rec);
  for (const auto& rec : cell_records) w.write(rec);
  for (const auto& [key, values] : groups) {
    const BootstrapResult boot =
        bootstrap_mean(values, std::size_t(ro.boot), ro.seed);
    json j;
    j["type"] = "resilience_summary";
    j["class"] = std::get<0>(key);
    j["m"] = std::get<1>(key);
    j["delta_j"] = std::get<2>(key);
    j["delta_h"] = std::get<3>(key);
    j["n_instances"] = values.size();
    j["mean_r"] = boot.mean;
    j["err"] = boot.err;
    w.write(j);
  }
  json summary;
  summary["type"] = "summary";
  summary["n_instances"] = n_items;
  summary["n_points"] = grid.size();
  summary["n_errors"] = n_errors;
  summary["wall_ms"] = sw.ms(c.stable);
  w.write(summary);
  std::cout << "wrote " << out_path.string() << " (" << cells.size()
            << " cells, " << n_errors << " errors)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// yield

struct YieldOpts {
  std::string cls = "U1";
  std::string grid = "8";
  int count = 100;
  std::uint64_t seed = 0;
  bool hamming = false;
  std::string results = "yield.jsonl";
};

inline json summary_json(const InstanceSummary& s) {
  json j;
  j["type"] = "yield_row";
  j["id"] = s.id;
  j["seed"] = s.seed;
  j["e0"] = s.e0;
  j["e0_int"] = s.e0_int;
  j["degeneracy"] = s.degeneracy;
  j["gs_overflow"] = s.gs_overflow;
  j["n1"] = s.n1;
  j["e1_overflow"] = s.e1_overflow;
  j["unique_gs"] = s.unique_gs;
  j["exhaustive"] = s.exhaustive;
  j["agreement"] = s.agreement;
  if (s.hamming.defined) {
    j["hamming_min"] = s.hamming.min;
    j["hamming_mean"] = s.hamming.mean;
  }
  if (s.r) j["r"] = *s.r;
  return j;
}

// Sampled instances plus their solves; shared by yield and mine.
struct SampledSet {
  std::vector<Instance> insts;
  std::vector<SolveResult> results;
  std::vector<InstanceSummary> summaries;
};

inline SampledSet sample_and_solve(const InstanceClass& cls,
                                   const ChimeraGraph& graph, int count,
                                   std::uint64_t master_seed,
                                   const EngineConfig& cfg, unsigned workers,
                                   bool with_hamming) {
  if (count < 1) throw std::invalid_argument("count must be positive");
  if (cfg.kind == EngineConfig::Kind::Oracle && graph.n > cfg.oracle.max_n)
    throw std::invalid_argument("instance larger than oracle size limit");
  SampledSet out;
  out.insts.reserve(std::size_t(count));
  for (int k = 0; k < count; ++k)
    out.insts.push_back(normalize(
        sample_instance(cls, graph, instance_stream_seed(master_seed, k))));
  std::vector<const Instance*> batch;
  std::vector<std::uint64_t> seeds;
  for (const auto& inst : out.insts) {
    batch.push_back(&inst);
    seeds.push_back(derive_seed(inst.seed, 0x50e0ull));
  }
  solve_group(cfg, workers, batch, seeds, out.results);
  out.summaries.reserve(std::size_t(count));
  for (int k = 0; k < count; ++k)
    out.summaries.push_back(summarize(out.insts[std::size_t(k)],
                                      out.results[std::size_t(k)], graph.rows,
                                      graph.cols, with_hamming));
  return out;
}

inline int cmd_yield(const CommonOpts& c, const EngineOpts& eo,
                     const YieldOpts& yo) {
  const Stopwatch sw;
  const EngineConfig cfg = engine_config(eo);
  const InstanceClass& cls = InstanceClass::by_name(yo.cls);
  int rows = 0, cols = 0;
  parse_grid(yo.grid, rows, cols);
  const ChimeraGraph graph = build_chimera_grid(rows, cols);
  const SampledSet s = sample_and_solve(cls, graph, yo.count, yo.seed, cfg,
                                        c.workers, yo.hamming);

  int n_unique = 0;
  for (const auto& row : s.summaries) n_unique += row.unique_gs;
  const double yield = double(n_unique) / double(yo.count);

  json cfg_json = engine_json(eo);
  cfg_json["class"] = std::string(cls.name);
  cfg_json["m"] = detail::grid_tag(rows, cols);
  cfg_json["count"] = yo.count;
  cfg_json["seed"] = yo.seed;
  const fs::path out_path = c.resolve(yo.results);
  auto os = open_output(out_path);
  ResultsWriter w(os, {"yield", cfg_json});
  for (const auto& row : s.summaries) w.write(summary_json(row));
  json j;
  j["type"] = "yield_summary";
  j["class"] = std::string(cls.name);
  j["m"] = detail::grid_tag(rows, cols);
  j["n"] = graph.n;
  j["n_total"] = yo.count;
  j["n_unique"] = n_unique;
  j["yield"] = yield;
  j["err"] = binomial_error(yield, std::uint64_t(yo.count));
  j["wall_ms"] = sw.ms(c.stable);
  w.write(j);
  std::cout << "wrote " << out_path.string() << " (yield " << n_unique << "/"
            << yo.count << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// mine

struct MineOpts {
  std::string cls = "U567";
  std::string grid = "2";
  int count = 100;
  std::uint64_t seed = 0;
  long long max_n1 = 4;
  bool allow_degenerate = false;
  std::string dj;
  std::string dh;
  std::string preset;
  int trials = 10;
  int k_max = 4;
  int boot = 10000;
  bool no_export = false;
  std::string results = "mine.jsonl";
};

inline int cmd_mine(const CommonOpts& c, const EngineOpts& eo,
                    const MineOpts& mo) {
  const Stopwatch sw;
  const EngineConfig cfg = engine_config(eo);
  const InstanceClass& cls = InstanceClass::by_name(mo.cls);
  int rows = 0, cols = 0;
  parse_grid(mo.grid, rows, cols);
  const ChimeraGraph graph = build_chimera_grid(rows, cols);

  NoiseSpec spec{};
  if (!mo.preset.empty()) {
    spec = noise_preset(mo.preset);
  } else if (!mo.dj.empty() || !mo.dh.empty()) {
    spec.delta_j = mo.dj.empty() ? 0.0 : std::stod(mo.dj);
    spec.delta_h = mo.dh.empty() ? 0.0 : std::stod(mo.dh);
  } else {
    spec = preset_dw2();
  }
  spec.n_trials = mo.trials;

  SampledSet s = sample_and_solve(cls, graph, mo.count, mo.seed, cfg,
                                  c.workers, /*with_hamming=*/true);
  const std::vector<InstanceSummary> selected =
      filter_benchmark_set(s.summaries, mo.max_n1, !mo.allow_degenerate);

  // index summaries by id for attaching resilience
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < s.summaries.size(); ++i)
    by_id[s.summaries[i].id] = i;

  // resilience over the selected set
  ResilienceOptions base;
  base.engine = cfg;
  base.seed = mo.seed;
  base.allow_degenerate = mo.allow_degenerate;
  std::vector<json> res_records(selected.size());
  std::vector<std::optional<ResilienceRecord>> recs(selected.size());
  parallel_for(selected.size(), c.workers, [&](std::size_t k) {
    const std::size_t i = by_id.at(selected[k].id);
    json j;
    try {
      const ResilienceRecord rec =
          instance_resilience(s.insts[i], s.results[i], spec, base);
      recs[k] = rec;
      j["type"] = "resilience";
      j["id"] = selected[k].id;
      j["class"] = std::string(cls.name);
      j["m"] = detail::grid_tag(rows, cols);
      j["seed"] = s.insts[i].seed;
      j["delta_j"] = spec.delta_j;
      j["delta_h"] = spec.delta_h;
      j["n_trials"] = spec.n_trials;
      j["r"] = rec.r;
      json ladder_vals = json::array();
      for (int kk = 0; kk <= mo.k_max; ++kk)
        ladder_vals.push_back(relaxed_resilience(rec, s.insts[i], s.results[i],
                                                 kk, Ladder::Candidate));
      j["r_k"] = std::move(ladder_vals);
    } catch (const std::exception& e) {
      j = error_record(selected[k].id, e.what());
    }
    res_records[k] = std::move(j);
  });
  for (std::size_t k = 0; k < selected.size(); ++k)
    if (recs[k]) s.summaries[by_id.at(selected[k].id)].r = recs[k]->r;

  // export selected instances for later reuse
  std::vector<std::string> exported;
  if (!mo.no_export && !selected.empty()) {
    const fs::path sel_dir = fs::path(c.out_dir) / "selected";
    fs::create_directories(sel_dir);
    for (const auto& row : selected) {
      const std::size_t i = by_id.at(row.id);
      const std::string fname = row.id + ".inst";
      auto os = open_output(sel_dir / fname);
      // the payload is integral either way; exporting the raw form keeps
      // the files exact, matching what generate writes
      Instance raw = s.insts[i];
      raw.normalized = false;
      write_instance_file(os, raw, rows, cols);
      exported.push_back(fname);
    }
    auto ms = open_output(sel_dir / "manifest.txt");
    for (const auto& name : exported) ms << name << '\n';
  }

  const auto n1_rows = n1_resilience_profile(s.summaries);
  const auto ham_rows = hamming_resilience_profile(s.summaries);

  json cfg_json = engine_json(eo);
  cfg_json["class"] = std::string(cls.name);
  cfg_json["m"] = detail::grid_tag(rows, cols);
  cfg_json["count"] = mo.count;
  cfg_json["seed"] = mo.seed;
  cfg_json["max_n1"] = mo.max_n1;
  cfg_json["allow_degenerate"] = mo.allow_degenerate;
  cfg_json["delta_j"] = spec.delta_j;
  cfg_json["delta_h"] = spec.delta_h;
  cfg_json["trials"] = spec.n_trials;

  const fs::path out_path = c.resolve(mo.results);
  auto os = open_output(out_path);
  ResultsWriter w(os, {"mine", cfg_json});
  for (const auto& row : s.summaries) w.write(summary_json(row));
  {
    json j;
    j["type"] = "selection";
    json ids = json::array();
    for (const auto& row : selected) ids.push_back(row.id);
    j["ids"] = std::move(ids);
    j["n_selected"] = selected.size();
    j["n_total"] = mo.count;
    w.write(j);
  }
  std::size_t n_errors = 0;
  for (const auto& rec : res_records) {
    n_errors += rec.value("type", "") == "error";
    w.write(rec);
  }
  {
    json j;
    j["type"] = "n1_profile";
    json rows_j = json::array();
    for (const auto& [n1, r] : n1_rows) rows_j.push_back(json::array({n1, r}));
    j["rows"] = std::move(rows_j);
    w.write(j);
    json h;
    h["type"] = "hamming_profile";
    json hrows = json::array();
    for (const auto& [d, r] : ham_rows) hrows.push_back(json::array({d, r}));
    h["rows"] = std::move(hrows);
    w.write(h);
  }
  {
    json j;
    j["type"] = "correlation";
    auto put = [&](const char* key, const std::vector<double>& x,
                   const std::vector<double>& y) {
      try {
        const SpearmanResult sr = spearman(x, y);
        json e;
        e["rho"] = sr.rho;
        e["p_neg"] = sr.p_neg;
        e["n"] = sr.n;
        j[key] = std::move(e);
      } catch (const std::exception&) {
        j[key] = nullptr;
      }
    };
    std::vector<double> xs, ys;
    for (const auto& [n1, r] : n1_rows) {
      xs.push_back(double(n1));
      ys.push_back(r);
    }
    put("n1_vs_r", xs, ys);
    xs.clear();
    ys.clear();
    for (const auto& [d, r] : ham_rows) {
      xs.push_back(d);
      ys.push_back(r);
    }
    put("hamming_vs_r", xs, ys);
    w.write(j);
  }
  {
    std::vector<double> rs;
    for (const auto& k : recs)
      if (k) rs.push_back(k->r);
    json j;
    j["type"] = "mine_summary";
    j["class"] = std::string(cls.name);
    j["m"] = detail::grid_tag(rows, cols);
    j["n_total"] = mo.count;
    j["n_selected"] = selected.size();
    j["n_errors"] = n_errors;
    if (!rs.empty()) {
      const BootstrapResult b = bootstrap_mean(rs, std::size_t(mo.boot), mo.seed);
      j["mean_r"] = b.mean;
      j["err"] = b.err;
    }
    j["wall_ms"] = sw.ms(c.stable);
    w.write(j);
  }
  std::cout << "wrote " << out_path.string() << " (" << selected.size() << "/"
            << mo.count << " selected)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportOpts {
  std::vector<std::string> files;
  int boot = 10000;
  std::uint64_t seed = 0;
};

namespace csvdetail {

inline void cell(std::string& out, double v) { detail::format_value(out, v); }
inline void cell(std::string& out, long long v) { detail::format_value(out, v); }
inline void cell(std::string& out, const std::string& v) { out += v; }
inline void cell(std::string& out, std::uint64_t v) {
  out += std::to_string(v);
}
inline void cell(std::string& out, int v) { out += std::to_string(v); }
inline void cell(std::string& out, bool v) { out += v ? '1' : '0'; }

template <typename... Ts>
void row(std::string& out, const Ts&... vs) {
  bool first = true;
  auto one = [&](const auto& v) {
    if (!first) out += ',';
    first = false;
    cell(out, v);
  };
  (one(vs), ...);
  out += '\n';
}

}  // namespace csvdetail

inline int cmd_report(const CommonOpts& c, const ReportOpts& ro) {
  if (ro.files.empty()) throw std::runtime_error("no results files given");
  std::map<std::string, std::vector<ResultsFile>> by_kind;
  for (const auto& f : ro.files) {
    ResultsFile rf = read_results_file(f);
    by_kind[rf.header.kind].push_back(std::move(rf));
  }
  for (auto& [kind, shards] : by_kind)
    for (std::size_t i = 1; i < shards.size(); ++i)
      if (shards[i].header.config != shards[0].header.config)
        std::cerr << "warning: merging " << kind
                  << " shards with different configs\n";

  fs::create_directories(c.out_dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& body) {
    const fs::path p = c.resolve(name);
    auto os = open_output(p);
    os << body;
    written.push_back(p.string());
  };

  // flatten records per type across kinds (mine files carry yield rows too);
  // mine's resilience rows cover a filtered subset, so only resilience runs
  // feed the curve and ladder tables
  std::vector<const json*> solve_rows, yield_rows, yield_sums, res_rows,
      profiles_n1, profiles_ham;
  for (const auto& [kind, shards] : by_kind)
    for (const auto& shard : shards)
      for (const auto& rec : shard.records) {
        const std::string type = rec.value("type", "");
        if (type == "solve") solve_rows.push_back(&rec);
        else if (type == "yield_row") yield_rows.push_back(&rec);
        else if (type == "yield_summary") yield_sums.push_back(&rec);
        else if (type == "resilience" && kind == "resilience")
          res_rows.push_back(&rec);
        else if (type == "n1_profile") profiles_n1.push_back(&rec);
        else if (type == "hamming_profile") profiles_ham.push_back(&rec);
      }

  if (!solve_rows.empty()) {
    std::string body = "id,class,m,seed,n,engine,e0,degeneracy,n1,unique_gs\n";
    for (const json* r : solve_rows)
      csvdetail::row(body, r->at("id").get<std::string>(),
                     r->at("class").get<std::string>(),
                     r->at("m").get<std::string>(),
                     r->at("seed").get<std::uint64_t>(), r->at("n").get<int>(),
                     r->at("engine").get<std::string>(),
                     r->at("e0").get<double>(),
                     r->at("degeneracy").get<long long>(),
                     r->at("n1").get<long long>(),
                     r->at("unique_gs").get<bool>());
    emit("solve.csv", body);
  }
  if (!yield_rows.empty()) {
    std::string body = "id,seed,e0,degeneracy,n1,unique_gs,hamming_mean,r\n";
    auto opt_cell = [](const json& r, const char* key) {
      std::string s;
      if (r.contains(key)) csvdetail::cell(s, r.at(key).get<double>());
      return s;
    };
    for (const json* r : yield_rows) {
      csvdetail::row(
          body, r->at("id").get<std::string>(),
          r->at("seed").get<std::uint64_t>(), r->at("e0").get<double>(),
          r->at("degeneracy").get<long long>(), r->at("n1").get<long long>(),
          r->at("unique_gs").get<bool>(), opt_cell(*r, "hamming_mean"),
          opt_cell(*r, "r"));
    }
    emit("yield_rows.csv", body);
  }
  if (!yield_sums.empty()) {
    std::string body = "class,m,n_total,n_unique,yield,err\n";
    for (const json* r : yield_sums)
      csvdetail::row(body, r->at("class").get<std::string>(),
                     r->at("m").get<std::string>(), r->at("n_total").get<int>(),
                     r->at("n_unique").get<int>(),
                     r->at("yield").get<double>(), r->at("err").get<double>());
    emit("yield.csv", body);
  }
  if (!res_rows.empty()) {
    // curve: one row per (class, m, noise point)
    std::map<std::tuple<std::string, std::string, double, double>,
             std::vector<double>>
        groups;
    std::map<std::tuple<std::string, std::string, double, double, int>,
             std::vector<double>>
        ladder_groups;
    for (const json* r : res_rows) {
      const std::tuple<std::string, std::string, double, double> key{
          r->at("class").get<std::string>(), r->at("m").get<std::string>(),
          r->at("delta_j").get<double>(), r->at("delta_h").get<double>()};
      groups[key].push_back(r->at("r").get<double>());
      if (r->contains("r_k")) {
        const auto& rk = r->at("r_k");
        for (std::size_t k = 0; k < rk.size(); ++k)
          if (!rk[k].is_null())
            ladder_groups[std::tuple_cat(key, std::tuple<int>(int(k)))]
                .push_back(rk[k].get<double>());
      }
    }
    std::string body = "class,m,delta_j,delta_h,n_instances,mean_r,err\n";
    for (const auto& [key, values] : groups) {
      const BootstrapResult b =
          bootstrap_mean(values, std::size_t(ro.boot), ro.seed);
      csvdetail::row(body, std::get<0>(key), std::get<1>(key),
                     std::get<2>(key), std::get<3>(key),
                     (long long)values.size(), b.mean, b.err);
    }
    emit("resilience_curve.csv", body);
    std::string lbody = "class,m,delta_j,delta_h,k,n_instances,mean_r_k,err\n";
    for (const auto& [key, values] : ladder_groups) {
      const BootstrapResult b =
          bootstrap_mean(values, std::size_t(ro.boot), ro.seed);
      csvdetail::row(lbody, std::get<0>(key), std::get<1>(key),
                     std::get<2>(key), std::get<3>(key), std::get<4>(key),
                     (long long)values.size(), b.mean, b.err);
    }
    emit("resilience_ladder.csv", lbody);
  }
  if (!profiles_n1.empty()) {
    std::string body = "n1,r\n";
    for (const json* r : profiles_n1)
      for (const auto& pair : r->at("rows"))
        csvdetail::row(body, pair.at(0).get<long long>(),
                       pair.at(1).get<double>());
    emit("n1_profile.csv", body);
  }
  if (!profiles_ham.empty()) {
    std::string body = "mean_hamming,r\n";
    for (const json* r : profiles_ham)
      for (const auto& pair : r->at("rows"))
        csvdetail::row(body, pair.at(0).get<double>(),
                       pair.at(1).get<double>());
    emit("hamming_profile.csv", body);
  }

  if (written.empty()) {
    std::cout << "no reportable records found\n";
  } else {
    for (const auto& p : written) std::cout << "wrote " << p << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// app wiring

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Chimera spin-glass benchmarking toolkit"};
  app.set_version_flag("--version", std::string(version));
  app.set_config("--config", "", "read options from an INI file");
  app.require_subcommand(1);

  int rc = 0;

  CommonOpts gen_common;
  GenerateOpts gen;
  {
    CLI::App* cmd =
        app.add_subcommand("generate", "sample disorder instances to files");
    add_common(*cmd, gen_common, /*with_workers=*/false);
    cmd->add_option("--class", gen.cls, "disorder class")
        ->check(CLI::IsMember({"U1", "U4", "U567", "S28"}))
        ->capture_default_str();
    cmd->add_option("--m", gen.grid, "cell grid: m or RxC")
        ->capture_default_str();
    cmd->add_option("--count", gen.count, "instances to sample")
        ->capture_default_str();
    cmd->add_option("--seed", gen.seed, "master stream seed")
        ->capture_default_str();
    cmd->add_option("--manifest-name", gen.manifest_name,
                    "manifest file name (default derives from the family)");
    cmd->callback([&] { rc = cmd_generate(gen_common, gen); });
  }

  CommonOpts solve_common;
  EngineOpts solve_engine;
  SolveOpts solve;
  {
    CLI::App* cmd = app.add_subcommand("solve", "ground states and low "
                                                "spectra of instance files");
    add_common(*cmd, solve_common);
    add_engine(*cmd, solve_engine);
    cmd->add_option("files", solve.files, "instance files");
    cmd->add_option("--manifest", solve.manifests,
                    "file listing instance files, one per line");
    cmd->add_option("--results", solve.results, "output records file")
        ->capture_default_str();
    cmd->add_option("--seed", solve.seed, "solver master seed")
        ->capture_default_str();
    cmd->add_option("--max-stored-configs", solve.max_stored,
                    "ground configs stored per record")
        ->capture_default_str();
    cmd->callback([&] { rc = cmd_solve(solve_common, solve_engine, solve); });
  }

  CommonOpts res_common;
  EngineOpts res_engine;
  ResilienceCmdOpts res;
  {
    CLI::App* cmd = app.add_subcommand(
        "resilience", "ground-state survival under control noise");
    add_common(*cmd, res_common);
    add_engine(*cmd, res_engine);
    cmd->add_option("files", res.files, "instance files");
    cmd->add_option("--manifest", res.manifests,
                    "file listing instance files, one per line");
    cmd->add_option("--solutions", res.solutions,
                    "solve records with complete ground sets to reuse");
    auto* dj = cmd->add_option("--dj", res.dj, "coupler noise widths, "
                                               "comma separated")
                   ->capture_default_str();
    auto* dh = cmd->add_option("--dh", res.dh, "field noise widths, "
                                               "comma separated")
                   ->capture_default_str();
    cmd->add_option("--preset", res.preset, "named noise point")
        ->check(CLI::IsMember({"dw2", "dw2x"}))
        ->excludes(dj)
        ->excludes(dh);
    cmd->add_option("--trials", res.trials, "perturbations per noise point")
        ->capture_default_str();
    cmd->add_option("--k-max", res.k_max, "relaxed survival levels to report")
        ->capture_default_str();
    cmd->add_option("--ladder", res.ladder, "relaxed threshold ladder")
        ->check(CLI::IsMember({"candidate", "populated"}))
        ->capture_default_str();
    cmd->add_flag("--allow-degenerate", res.allow_degenerate,
                  "score degenerate instances against their full ground set");
    cmd->add_option("--seed", res.seed, "noise and solver master seed")
        ->capture_default_str();
    cmd->add_option("--boot", res.boot, "bootstrap resamples")
        ->capture_default_str();
    cmd->add_option("--results", res.results, "output records file")
        ->capture_default_str();
    cmd->callback([&] { rc = cmd_resilience(res_common, res_engine, res); });
  }

  CommonOpts yield_common;
  EngineOpts yield_engine;
  YieldOpts yld;
  {
    CLI::App* cmd = app.add_subcommand(
        "yield", "unique-ground-state fraction of a sampled family");
    add_common(*cmd, yield_common);
    add_engine(*cmd, yield_engine);
    cmd->add_option("--class", yld.cls, "disorder class")
        ->check(CLI::IsMember({"U1", "U4", "U567", "S28"}))
        ->capture_default_str();
    cmd->add_option("--m", yld.grid, "cell grid: m or RxC")
        ->capture_default_str();
    cmd->add_option("--count", yld.count, "instances to sample")
        ->capture_default_str();
    cmd->add_option("--seed", yld.seed, "master stream seed")
        ->capture_default_str();
    cmd->add_flag("--hamming", yld.hamming,
                  "record excited-state distance profiles");
    cmd->add_option("--results", yld.results, "output records file")
        ->capture_default_str();
    cmd->callback([&] { rc = cmd_yield(yield_common, yield_engine, yld); });
  }

  CommonOpts mine_common;
  EngineOpts mine_engine;
  MineOpts mine;
  {
    CLI::App* cmd = app.add_subcommand(
        "mine", "select benchmark instances and score their resilience");
    add_common(*cmd, mine_common);
    add_engine(*cmd, mine_engine);
    cmd->add_option("--class", mine.cls, "disorder class")
        ->check(CLI::IsMember({"U1", "U4", "U567", "S28"}))
        ->capture_default_str();
    cmd->add_option("--m", mine.grid, "cell grid: m or RxC")
        ->capture_default_str();
    cmd->add_option("--count", mine.count, "instances to sample")
        ->capture_default_str();
    cmd->add_option("--seed", mine.seed, "master stream seed")
        ->capture_default_str();
    cmd->add_option("--max-n1", mine.max_n1,
                    "largest first-excited census kept")
        ->capture_default_str();
    cmd->add_flag("--allow-degenerate", mine.allow_degenerate,
                  "keep degenerate instances and score their full ground set");
    auto* dj = cmd->add_option("--dj", mine.dj, "coupler noise width");
    auto* dh = cmd->add_option("--dh", mine.dh, "field noise width");
    cmd->add_option("--preset", mine.preset,
                    "named noise point (default dw2)")
        ->check(CLI::IsMember({"dw2", "dw2x"}))
        ->excludes(dj)
        ->excludes(dh);
    cmd->add_option("--trials", mine.trials, "perturbations per instance")
        ->capture_default_str();
    cmd->add_option("--k-max", mine.k_max,
                    "relaxed survival levels to report")
        ->capture_default_str();
    cmd->add_option("--boot", mine.boot, "bootstrap resamples")
        ->capture_default_str();
    cmd->add_flag("--no-export", mine.no_export,
                  "skip writing selected instance files");
    cmd->add_option("--results", mine.results, "output records file")
        ->capture_default_str();
    cmd->callback([&] { rc = cmd_mine(mine_common, mine_engine, mine); });
  }

  CommonOpts report_common;
  ReportOpts report;
  {
    CLI::App* cmd =
        app.add_subcommand("report", "fold result records into CSV tables");
    add_common(*cmd, report_common, /*with_workers=*/false);
    cmd->add_option("files", report.files, "results files to merge")
        ->required();
    cmd->add_option("--boot", report.boot, "bootstrap resamples")
        ->capture_default_str();
    cmd->add_option("--seed", report.seed, "bootstrap seed")
        ->capture_default_str();
    cmd->callback([&] { rc = cmd_report(report_common, report); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}

inline int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("spinbench");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(int(argv.size()), argv.data());
}

}  // namespace spinbench::cli
