#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spinbench/rng.hpp"
#include "spinbench/topology.hpp"
#include "spinbench/version.hpp"

namespace spinbench {

enum class InstanceClassId { U1, U4, U567, S28 };

// Coupler magnitude sets.  Energies of integer instances live on a lattice
// of spacing 2 in raw units, so the gap after rescaling by 1/i_max is
// 2/i_max regardless of the set.
struct InstanceClass {
  InstanceClassId id;
  const char* name;
  std::vector<int> values;
  int i_max;

  double classical_gap() const { return 2.0 / i_max; }

  static const std::array<InstanceClass, 4>& all() {
    static const std::array<InstanceClass, 4> table = {{
        {InstanceClassId::U1, "U1", {1}, 1},
        {InstanceClassId::U4, "U4", {1, 2, 3, 4}, 4},
        {InstanceClassId::U567, "U567", {5, 6, 7}, 7},
        {InstanceClassId::S28, "S28", {8, 13, 19, 28}, 28},
    }};
    return table;
  }

  static const InstanceClass& get(InstanceClassId id) {
    return all()[static_cast<int>(id)];
  }

  static const InstanceClass& by_name(std::string_view name) {
    for (const auto& c : all())
      if (name == c.name) return c;
    throw std::invalid_argument("unknown instance class: " + std::string(name));
  }
};

inline double classical_gap(const InstanceClass& cls) { return cls.classical_gap(); }

// Couplers indexed by canonical edge order, fields by vertex.  Integer
// instances keep raw values after normalization; the flag folds the 1/i_max
// factor into energy evaluation, so integer arithmetic stays exact.
template <typename Scalar>
struct BasicInstance {
  const Graph* graph = nullptr;
  InstanceClassId cls = InstanceClassId::U1;
  std::uint64_t seed = 0;
  bool normalized = false;
  std::vector<Scalar> couplers;
  std::vector<Scalar> fields;

  const InstanceClass& instance_class() const { return InstanceClass::get(cls); }
  int n() const { return graph->n; }

  bool has_fields() const {
    for (const Scalar h : fields)
      if (h != Scalar(0)) return true;
    return false;
  }
};

using Instance = BasicInstance<long long>;
using RealInstance = BasicInstance<double>;

inline Instance sample_instance(const InstanceClass& cls, const Graph& graph,
                                std::uint64_t seed) {
  Instance inst;
  inst.graph = &graph;
  inst.cls = cls.id;
  inst.seed = seed;
  inst.couplers.resize(graph.edges.size());
  inst.fields.assign(graph.n, 0);
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls.id)));
  const std::uint64_t options = 2 * cls.values.size();
  for (auto& j : inst.couplers) {
    const std::uint64_t u = rng.below(options);
    j = (u & 1 ? -1 : 1) * (long long)cls.values[u >> 1];
  }
  return inst;
}

template <typename Scalar>
BasicInstance<Scalar> normalize(BasicInstance<Scalar> inst) {
  if (inst.normalized) throw std::logic_error("instance already normalized");
  inst.normalized = true;
  return inst;
}

// Real-valued view in normalized units (couplers in [-1, 1]).
inline RealInstance to_real(const Instance& inst) {
  RealInstance r;
  r.graph = inst.graph;
  r.cls = inst.cls;
  r.seed = inst.seed;
  r.normalized = true;
  const double scale = 1.0 / inst.instance_class().i_max;
  r.couplers.reserve(inst.couplers.size());
  for (const long long j : inst.couplers) r.couplers.push_back(j * scale);
  r.fields.reserve(inst.fields.size());
  for (const long long h : inst.fields) r.fields.push_back(h * scale);
  return r;
}

// P(sum of `degree` draws from {+-v : v in values} equals 0), computed by
// exact integer convolution.
inline double zero_field_prob(const InstanceClass& cls, int degree) {
  if (degree < 1) throw std::invalid_argument("degree must be positive");
  if (degree > 20) throw std::invalid_argument("degree too large for exact counts");
  const int vmax = cls.i_max;
  const int span = degree * vmax;
  std::vector<std::uint64_t> counts(2 * span + 1, 0);
  counts[span] = 1;
  for (int d = 0; d < degree; ++d) {
    std::vector<std::uint64_t> next(2 * span + 1, 0);
    for (int s = 0; s <= 2 * span; ++s) {
      if (!counts[s]) continue;
      for (const int v : cls.values) {
        next[s + v] += counts[s];
        next[s - v] += counts[s];
      }
    }
    counts.swap(next);
  }
  double total = 1.0;
  for (int d = 0; d < degree; ++d) total *= double(2 * cls.values.size());
  return double(counts[span]) / total;
}

// Fraction of sites with vanishing local field, averaged over the degree
// distribution of the graph.
inline double zero_field_class_average(const InstanceClass& cls, const Graph& graph) {
  if (graph.n == 0) throw std::invalid_argument("empty graph");
  double acc = 0.0;
  for (const auto& [deg, count] : graph.degree_histogram())
    acc += count * zero_field_prob(cls, deg);
  return acc / graph.n;
}

// ---- instance files ----
//
// Line 1:  # spinbench v1 class=<name> m=<m> seed=<u64> normalized=<0|1>
// Then one line per coupler in canonical edge order ("e i j value") and one
// line per nonzero field ("f i value").  normalized=0 files carry integers,
// normalized=1 files carry shortest round-trip decimals; parsing is strict
// so serialize(parse(f)) == f.

namespace detail {

inline void format_value(std::string& out, long long v) {
  out += std::to_string(v);
}

inline void format_value(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

inline bool parse_value(std::string_view s, long long& v) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline bool parse_value(std::string_view s, double& v) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::string grid_tag(int rows, int cols) {
  if (rows == cols) return std::to_string(rows);
  return std::to_string(rows) + "x" + std::to_string(cols);
}

} // namespace detail

template <typename Scalar>
void write_instance(std::ostream& os, const BasicInstance<Scalar>& inst,
                    int rows, int cols) {
  std::string out;
  out += "# ";
  out += format_version;
  out += " class=";
  out += inst.instance_class().name;
  out += " m=" + detail::grid_tag(rows, cols);
  out += " seed=" + std::to_string(inst.seed);
  out += " normalized=";
  out += inst.normalized ? '1' : '0';
  out += '\n';
  for (std::size_t e = 0; e < inst.graph->edges.size(); ++e) {
    const auto [i, j] = inst.graph->edges[e];
    out += "e " + std::to_string(i) + ' ' + std::to_string(j) + ' ';
    detail::format_value(out, inst.couplers[e]);
    out += '\n';
  }
  for (int i = 0; i < inst.graph->n; ++i) {
    if (inst.fields[i] == Scalar(0)) continue;
    out += "f " + std::to_string(i) + ' ';
    detail::format_value(out, inst.fields[i]);
    out += '\n';
  }
  os << out;
}

// Writing a normalized integer instance emits its real-valued payload so
// the flag round-trips; unnormalized integer instances stay integral.
inline void write_instance_file(std::ostream& os, const Instance& inst,
                                int rows, int cols) {
  if (!inst.normalized) {
    write_instance(os, inst, rows, cols);
    return;
  }
  RealInstance r = to_real(inst);
  r.seed = inst.seed;
  write_instance(os, r, rows, cols);
}

inline void write_instance_file(std::ostream& os, const RealInstance& inst,
                                int rows, int cols) {
  if (!inst.normalized)
    throw std::logic_error("real instances are always in normalized units");
  write_instance(os, inst, rows, cols);
}

struct GraphCache {
  std::map<std::pair<int, int>, std::shared_ptr<const ChimeraGraph>> grids;

  std::shared_ptr<const ChimeraGraph> get(int rows, int cols) {
    auto& slot = grids[{rows, cols}];
    if (!slot) slot = std::make_shared<const ChimeraGraph>(build_chimera_grid(rows, cols));
    return slot;
  }
};

struct LoadedInstance {
  std::shared_ptr<const ChimeraGraph> graph;
  std::optional<Instance> exact;
  std::optional<RealInstance> real;

  bool is_exact() const { return exact.has_value(); }
  const InstanceClass& instance_class() const {
    return exact ? exact->instance_class() : real->instance_class();
  }
  std::uint64_t seed() const { return exact ? exact->seed : real->seed; }
};

namespace detail {

[[noreturn]] inline void parse_fail(int line, const std::string& what) {
  throw std::runtime_error("instance parse error at line " +
                           std::to_string(line) + ": " + what);
}

inline std::vector<std::string_view> split_fields(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find(' ', pos);
    if (next == std::string_view::npos) next = s.size();
    if (next > pos) out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

template <typename Scalar>
BasicInstance<Scalar> parse_body(std::istream& is, const ChimeraGraph& graph,
                                 const InstanceClass& cls, std::uint64_t seed,
                                 bool normalized, int& line_no) {
  BasicInstance<Scalar> inst;
  inst.graph = &graph;
  inst.cls = cls.id;
  inst.seed = seed;
  inst.normalized = normalized;
  inst.couplers.resize(graph.edges.size());
  inst.fields.assign(graph.n, Scalar(0));

  std::size_t edge_cursor = 0;
  int last_field = -1;
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) parse_fail(line_no, "empty line");
    auto f = split_fields(line);
    if (f[0] == "e") {
      if (f.size() != 4) parse_fail(line_no, "expected 'e i j value'");
      if (edge_cursor >= graph.edges.size()) parse_fail(line_no, "too many couplers");
      long long i = -1, j = -1;
      if (!parse_value(f[1], i) || !parse_value(f[2], j))
        parse_fail(line_no, "bad edge endpoints");
      const auto want = graph.edges[edge_cursor];
      if (i != want.first || j != want.second)
        parse_fail(line_no, "couplers must follow canonical edge order");
      if (!parse_value(f[3], inst.couplers[edge_cursor]))
        parse_fail(line_no, "bad coupler value");
      ++edge_cursor;
    } else if (f[0] == "f") {
      if (edge_cursor != graph.edges.size())
        parse_fail(line_no, "fields must follow all couplers");
      if (f.size() != 3) parse_fail(line_no, "expected 'f i value'");
      long long i = -1;
      if (!parse_value(f[1], i) || i < 0 || i >= graph.n)
        parse_fail(line_no, "bad field site");
      if (int(i) <= last_field) parse_fail(line_no, "fields must be ascending");
      last_field = int(i);
      if (!parse_value(f[2], inst.fields[i])) parse_fail(line_no, "bad field value");
      if (inst.fields[i] == Scalar(0)) parse_fail(line_no, "zero field entry");
    } else {
      parse_fail(line_no, "unknown record type");
    }
  }
  if (edge_cursor != graph.edges.size()) parse_fail(line_no, "missing couplers");
  return inst;
}

} // namespace detail

inline LoadedInstance read_instance(std::istream& is, GraphCache* cache = nullptr) {
  int line_no = 0;
  std::string header;
  if (!std::getline(is, header)) detail::parse_fail(1, "missing header");
  ++line_no;
  const std::string prefix = std::string("# ") + format_version + " ";
  if (header.rfind(prefix, 0) != 0) detail::parse_fail(1, "bad header magic");

  std::map<std::string, std::string> kv;
  for (auto field : detail::split_fields(std::string_view(header).substr(prefix.size()))) {
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) detail::parse_fail(1, "bad header field");
    kv[std::string(field.substr(0, eq))] = std::string(field.substr(eq + 1));
  }
  for (const char* key : {"class", "m", "seed", "normalized"})
    if (!kv.count(key)) detail::parse_fail(1, std::string("missing header key ") + key);

  const InstanceClass& cls = InstanceClass::by_name(kv["class"]);
  int rows = 0, cols = 0;
  {
    const std::string& m = kv["m"];
    const auto x = m.find('x');
    try {
      if (x == std::string::npos) {
        rows = cols = std::stoi(m);
      } else {
        rows = std::stoi(m.substr(0, x));
        cols = std::stoi(m.substr(x + 1));
      }
    } catch (const std::exception&) {
      detail::parse_fail(1, "bad grid size");
    }
    if (rows < 1 || cols < 1) detail::parse_fail(1, "bad grid size");
  }
  std::uint64_t seed = 0;
  {
    const std::string& s = kv["seed"];
    auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      detail::parse_fail(1, "bad seed");
  }
  const std::string& norm = kv["normalized"];
  if (norm != "0" && norm != "1") detail::parse_fail(1, "bad normalized flag");

  LoadedInstance out;
  if (cache) {
    out.graph = cache->get(rows, cols);
  } else {
    out.graph = std::make_shared<const ChimeraGraph>(build_chimera_grid(rows, cols));
  }
  if (norm == "0") {
    out.exact = detail::parse_body<long long>(is, *out.graph, cls, seed, false, line_no);
    for (std::size_t e = 0; e < out.exact->couplers.size(); ++e) {
      long long mag = out.exact->couplers[e];
      if (mag < 0) mag = -mag;
      bool ok = false;
      for (const int v : cls.values) ok = ok || mag == v;
      if (!ok)
        detail::parse_fail(int(e) + 2, "coupler magnitude not in class");
    }
  } else {
    out.real = detail::parse_body<double>(is, *out.graph, cls, seed, true, line_no);
  }
  return out;
}

inline std::string instance_id(const InstanceClass& cls, int rows, int cols,
                               std::uint64_t seed) {
  return std::string(cls.name) + "-m" + detail::grid_tag(rows, cols) + "-s" +
         std::to_string(seed);
}

} // namespace spinbench
