// Shared test utilities: hand-built graphs, independent oracles, and small
// random-instance generators. Everything here is deliberately naive; these
// are the yardsticks the library is measured against.
#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "rcm/connection_model.hpp"
#include "rcm/geom_graph.hpp"
#include "rcm/point_process.hpp"
#include "rcm/rng.hpp"

namespace testutil {

using namespace rcm;

// Graph with explicitly given vertices and edges (bypasses the sampler).
inline GeomGraph make_graph(const Region& region, std::vector<MarkedPoint> points,
                            const std::vector<std::pair<int, int>>& edges,
                            double range_bound = 1e9) {
  GeomGraph g{std::move(points), {}, ConnectionModel::boolean(), region, 0,
              range_bound};
  for (std::size_t i = 0; i < g.vertices.size(); ++i)
    if (g.vertices[i].uid == 0) g.vertices[i].uid = 1000 + i;
  g.adj.assign(g.vertices.size(), {});
  for (auto [a, b] : edges) {
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
  }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

inline MarkedPoint pt(Vec x, double m = 0.0) {
  return MarkedPoint{std::move(x), m, 0};
}

// Breadth-first component labels, canonicalized to the smallest index.
inline std::vector<int> bfs_labels(const GeomGraph& g) {
  const int n = static_cast<int>(g.vertices.size());
  std::vector<int> label(n, -1);
  for (int i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    std::queue<int> q;
    q.push(i);
    label[i] = i;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : g.adj[v])
        if (label[w] < 0) {
          label[w] = i;
          q.push(w);
        }
    }
  }
  return label;
}

// Quadratic-scan reference for the graph builder: probes every pair with
// the same keyed connection variable.
inline GeomGraph quadratic_build(const MarkedConfig& config,
                                 const ConnectionModel& model,
                                 std::uint64_t seed) {
  GeomGraph g{config.points, {}, model, config.region, seed,
              model.range_bound(config)};
  const int n = static_cast<int>(g.vertices.size());
  g.adj.assign(n, {});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double u = pair_u(seed, g.vertices[i].uid, g.vertices[j].uid);
      if (model.edge_present(g.vertices[i], g.vertices[j], u)) {
        g.adj[i].push_back(j);
        g.adj[j].push_back(i);
      }
    }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

inline bool same_adjacency(const GeomGraph& a, const GeomGraph& b) {
  return a.adj == b.adj;
}

// Random small instance for crossing tests: points scattered in a strip
// around a box of half-width ell, wired by a hard-range kernel.
inline GeomGraph random_strip_graph(int max_points, double ell, double range,
                                    std::uint64_t seed) {
  const Region region = Region::strip(2, ell, 2.0);
  const double area = region.volume();
  auto config = sample_ppp(region, max_points / area, MarkDistribution::dirac(0.0),
                           seed, 0);
  while (config.points.size() > static_cast<std::size_t>(max_points))
    config.points.pop_back();
  const auto model = ConnectionModel::kernel("hard_range", {{"range", range}});
  return build_graph(config, model, derive(seed, 0xABC));
}

}  // namespace testutil

#include "rcm/resistor_network.hpp"

namespace testutil {

// Random connected-ish network with boundary nodes on both sides.
inline ResistorNetwork random_network(int n_nodes, std::uint64_t seed) {
  Prng rng(seed);
  ResistorNetwork rn;
  rn.d = 2;
  rn.ell = 1.0;
  for (int i = 0; i < n_nodes; ++i) {
    const double x = rng.next_range(-1.4, 1.4);
    rn.pos.push_back({x, rng.next_range(-1.0, 1.0)});
    rn.kind.push_back(x < -1.0   ? NodeKind::Left
                      : x > 1.0  ? NodeKind::Right
                                 : NodeKind::Interior);
  }
  for (int i = 0; i < n_nodes; ++i)
    for (int j = i + 1; j < n_nodes; ++j) {
      const double dx = rn.pos[i][0] - rn.pos[j][0];
      const double dy = rn.pos[i][1] - rn.pos[j][1];
      if (std::sqrt(dx * dx + dy * dy) < 0.45 && rng.next_unit() < 0.8)
        rn.edges.push_back({i, j, rng.next_range(0.2, 3.0)});
    }
  return rn;
}

// Dense Gaussian elimination on the interior block, boundary absorbed into
// the right-hand side. Floating components are pinned to 0.
inline std::vector<double> dense_solve(const ResistorNetwork& rn) {
  const int n = static_cast<int>(rn.pos.size());
  const auto adj = rn.adjacency();

  std::vector<char> grounded(n, 0);
  {
    std::vector<int> stack;
    for (int i = 0; i < n; ++i)
      if (rn.kind[i] != NodeKind::Interior) {
        grounded[i] = 1;
        stack.push_back(i);
      }
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [w, c] : adj[v])
        if (!grounded[w]) {
          grounded[w] = 1;
          stack.push_back(w);
        }
    }
  }

  std::vector<int> unknown(n, -1);
  std::vector<int> nodes;
  for (int i = 0; i < n; ++i)
    if (rn.kind[i] == NodeKind::Interior && grounded[i]) {
      unknown[i] = static_cast<int>(nodes.size());
      nodes.push_back(i);
    }
  const int m = static_cast<int>(nodes.size());
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (int k = 0; k < m; ++k) {
    const int node = nodes[k];
    for (const auto& [w, c] : adj[node]) {
      a[k][k] += c;
      if (unknown[w] >= 0)
        a[k][unknown[w]] -= c;
      else if (rn.kind[w] == NodeKind::Left)
        a[k][m] += c;
    }
  }
  for (int col = 0; col < m; ++col) {
    int pivot = col;
    for (int row = col + 1; row < m; ++row)
      if (std::fabs(a[row][col]) > std::fabs(a[pivot][col])) pivot = row;
    std::swap(a[col], a[pivot]);
    for (int row = 0; row < m; ++row) {
      if (row == col || a[row][col] == 0.0) continue;
      const double f = a[row][col] / a[col][col];
      for (int c2 = col; c2 <= m; ++c2) a[row][c2] -= f * a[col][c2];
    }
  }
  std::vector<double> v(n, 0.0);
  for (int i = 0; i < n; ++i)
    if (grounded[i] && rn.kind[i] == NodeKind::Left) v[i] = 1.0;
  for (int k = 0; k < m; ++k) v[nodes[k]] = a[k][m] / a[k][k];
  return v;
}

}  // namespace testutil
