#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace spinbench {

// Undirected graph with a canonical edge order: every edge is stored as
// (i, j) with i < j and the list is sorted lexicographically, so equal
// graphs serialize byte-identically.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  // CSR adjacency; adj_edge maps each slot back to its edge index.
  std::vector<int> adj_offset;
  std::vector<int> adj_vertex;
  std::vector<int> adj_edge;

  static Graph from_edges(int n_vertices, std::vector<std::pair<int, int>> e) {
    if (n_vertices < 0) throw std::invalid_argument("negative vertex count");
    Graph g;
    g.n = n_vertices;
    for (auto& [a, b] : e) {
      if (a == b) throw std::invalid_argument("self loop");
      if (a < 0 || b < 0 || a >= n_vertices || b >= n_vertices)
        throw std::invalid_argument("edge endpoint out of range");
      if (a > b) std::swap(a, b);
    }
    std::sort(e.begin(), e.end());
    if (std::adjacent_find(e.begin(), e.end()) != e.end())
      throw std::invalid_argument("duplicate edge");
    g.edges = std::move(e);
    g.build_adjacency();
    return g;
  }

  int degree(int v) const { return adj_offset[v + 1] - adj_offset[v]; }

  std::map<int, int> degree_histogram() const {
    std::map<int, int> h;
    for (int v = 0; v < n; ++v) ++h[degree(v)];
    return h;
  }

  void write_edge_list(std::ostream& os) const {
    for (const auto& [i, j] : edges) os << i << ' ' << j << '\n';
  }

 private:
  void build_adjacency() {
    adj_offset.assign(n + 1, 0);
    for (const auto& [i, j] : edges) {
      ++adj_offset[i + 1];
      ++adj_offset[j + 1];
    }
    for (int v = 0; v < n; ++v) adj_offset[v + 1] += adj_offset[v];
    adj_vertex.assign(adj_offset[n], 0);
    adj_edge.assign(adj_offset[n], 0);
    std::vector<int> cursor(adj_offset.begin(), adj_offset.end() - 1);
    for (int e = 0; e < int(edges.size()); ++e) {
      const auto [i, j] = edges[e];
      adj_vertex[cursor[i]] = j;
      adj_edge[cursor[i]++] = e;
      adj_vertex[cursor[j]] = i;
      adj_edge[cursor[j]++] = e;
    }
  }
};

// Grid of rows x cols bipartite K_{4,4} cells.  Within a cell, slots 0..3
// form one side and 4..7 the other; slots 0..3 couple to the cell below,
// slots 4..7 to the cell on the right.
struct ChimeraGraph : Graph {
  int rows = 0;
  int cols = 0;
  static constexpr int shore = 4;

  int cell_index(int r, int c, int t) const { return 8 * (r * cols + c) + t; }
};

inline ChimeraGraph build_chimera_grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid must be at least 1x1");
  if (std::int64_t(rows) * cols > (1 << 24))
    throw std::invalid_argument("grid too large");
  ChimeraGraph g;
  g.rows = rows;
  g.cols = cols;
  g.n = 8 * rows * cols;
  auto idx = [&](int r, int c, int t) { return 8 * (r * cols + c) + t; };
  std::vector<std::pair<int, int>> e;
  e.reserve(std::size_t(16) * rows * cols + std::size_t(4) * (2 * rows * cols - rows - cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      for (int a = 0; a < 4; ++a)
        for (int b = 4; b < 8; ++b) e.emplace_back(idx(r, c, a), idx(r, c, b));
      if (r + 1 < rows)
        for (int t = 0; t < 4; ++t) e.emplace_back(idx(r, c, t), idx(r + 1, c, t));
      if (c + 1 < cols)
        for (int t = 4; t < 8; ++t) e.emplace_back(idx(r, c, t), idx(r, c + 1, t));
    }
  static_cast<Graph&>(g) = Graph::from_edges(g.n, std::move(e));
  return g;
}

inline ChimeraGraph build_chimera(int m) {
  if (m < 1) throw std::invalid_argument("chimera size must be at least 1");
  return build_chimera_grid(m, m);
}

inline std::map<int, int> degree_histogram(const Graph& g) {
  return g.degree_histogram();
}

} // namespace spinbench
