#include "rcm/geom_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace rcm {

std::size_t GeomGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& a : adj) twice += a.size();
  return twice / 2;
}

bool GeomGraph::has_edge(int i, int j) const {
  const auto& a = adj[i];
  return std::binary_search(a.begin(), a.end(), j);
}

double pair_u(std::uint64_t seed, std::uint64_t uid_a, std::uint64_t uid_b) {
  if (uid_a > uid_b) std::swap(uid_a, uid_b);
  return to_unit(derive(seed, stream_tag::edge_u, uid_a, uid_b));
}

namespace {

double linf_dist(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// Uniform cell grid over the region with cell side >= range bound, so any
// pair within range lives in the same or an adjacent cell.
class CellGrid {
 public:
  CellGrid(const Region& region, double cell_side, std::size_t n_points)
      : lo_(region.lo()), d_(region.dim()) {
    dims_.resize(d_);
    std::size_t total = 1;
    for (int j = 0; j < d_; ++j) {
      const double extent = region.hi()[j] - region.lo()[j];
      long n = cell_side > 0 ? static_cast<long>(std::floor(extent / cell_side)) : 0;
      n = std::max(1L, n);
      // Keep the grid no finer than the point count warrants.
      while (n > 1 && total * static_cast<std::size_t>(n) > 8 * n_points + 64)
        n /= 2;
      dims_[j] = n;
      total *= static_cast<std::size_t>(n);
    }
    side_.resize(d_);
    for (int j = 0; j < d_; ++j)
      side_[j] = (region.hi()[j] - region.lo()[j]) / static_cast<double>(dims_[j]);
    cells_.resize(total);
  }

  std::size_t cell_of(const Vec& x) const {
    std::size_t idx = 0;
    for (int j = 0; j < d_; ++j) {
      long c = static_cast<long>(std::floor((x[j] - lo_[j]) / side_[j]));
      c = std::clamp(c, 0L, dims_[j] - 1);
      idx = idx * static_cast<std::size_t>(dims_[j]) + static_cast<std::size_t>(c);
    }
    return idx;
  }

  void insert(int point, const Vec& x) { cells_[cell_of(x)].push_back(point); }

  // Visit the points of every cell adjacent to (and including) the cell of x.
  template <typename F>
  void for_neighborhood(const Vec& x, F&& visit) const {
    std::vector<long> base(d_);
    for (int j = 0; j < d_; ++j) {
      long c = static_cast<long>(std::floor((x[j] - lo_[j]) / side_[j]));
      base[j] = std::clamp(c, 0L, dims_[j] - 1);
    }
    std::vector<long> offset(d_, -1);
    while (true) {
      bool ok = true;
      std::size_t idx = 0;
      for (int j = 0; j < d_ && ok; ++j) {
        const long c = base[j] + offset[j];
        if (c < 0 || c >= dims_[j]) ok = false;
        else idx = idx * static_cast<std::size_t>(dims_[j]) + static_cast<std::size_t>(c);
      }
      if (ok)
        for (int p : cells_[idx]) visit(p);
      int j = d_ - 1;
      while (j >= 0 && offset[j] == 1) offset[j--] = -1;
      if (j < 0) break;
      ++offset[j];
    }
  }

  bool covers_range(double range) const {
    for (int j = 0; j < d_; ++j)
      if (side_[j] < range) return false;
    return true;
  }

 private:
  Vec lo_;
  int d_;
  std::vector<long> dims_;
  Vec side_;
  std::vector<std::vector<int>> cells_;
};

}  // namespace

GeomGraph build_graph(const MarkedConfig& config, const ConnectionModel& model,
                      std::uint64_t seed) {
  GeomGraph g{config.points, {}, model, config.region, seed,
              model.range_bound(config)};
  const int n = static_cast<int>(g.vertices.size());
  g.adj.assign(n, {});
  if (n < 2 || g.range_bound <= 0.0) return g;

  CellGrid grid(config.region, g.range_bound, g.vertices.size());
  const bool exact_cells = grid.covers_range(g.range_bound);
  for (int i = 0; i < n; ++i) grid.insert(i, g.vertices[i].position);

  auto probe = [&](int i, int j) {
    const auto& a = g.vertices[i];
    const auto& b = g.vertices[j];
    if (linf_dist(a.position, b.position) >= g.range_bound) return;
    const double u = pair_u(seed, a.uid, b.uid);
    if (model.edge_present(a, b, u)) {
      g.adj[i].push_back(j);
      g.adj[j].push_back(i);
    }
  };

  if (exact_cells) {
    for (int i = 0; i < n; ++i)
      grid.for_neighborhood(g.vertices[i].position, [&](int j) {
        if (j > i) probe(i, j);
      });
  } else {
    // Degenerate geometry (range wider than a cell): fall back to all pairs.
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) probe(i, j);
  }

  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

ClusterLabels components(const GeomGraph& graph) {
  const int n = static_cast<int>(graph.vertices.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j : graph.adj[i])
      if (j > i) {
        int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }

  ClusterLabels out;
  out.label.resize(n);
  std::vector<int> canonical(n, -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (canonical[root] < 0) canonical[root] = i;  // first index met is smallest
    out.label[i] = canonical[root];
    ++out.sizes[out.label[i]];
  }
  return out;
}

std::set<int> crossing_cluster_ids(const GeomGraph& graph, double ell,
                                   double pad) {
  if (!(ell > 0) || pad < 0)
    throw std::invalid_argument("crossing_cluster_ids: need ell > 0, pad >= 0");
  const Region& r = graph.region;
  bool fits = r.lo()[0] <= -(ell + pad) && r.hi()[0] >= ell + pad;
  for (int j = 1; j < r.dim() && fits; ++j)
    fits = r.lo()[j] <= -ell && r.hi()[j] >= ell;
  if (!fits)
    throw std::invalid_argument("crossing_cluster_ids: region too small for padded window");

  const auto labels = components(graph);
  std::map<int, std::pair<bool, bool>> reach;  // cluster -> (left, right)
  for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
    const double x1 = graph.vertices[i].position[0];
    auto& fl = reach[labels.label[i]];
    if (x1 < -(ell + pad)) fl.first = true;
    if (x1 > ell + pad) fl.second = true;
  }
  std::set<int> ids;
  for (const auto& [id, fl] : reach)
    if (fl.first && fl.second) ids.insert(id);
  return ids;
}

bool local_uniqueness(const GeomGraph& graph, double r, double s, const Vec& x) {
  if (!(r < s - 1)) throw std::invalid_argument("local_uniqueness: need r < s - 1");
  if (static_cast<int>(x.size()) != graph.dim())
    throw std::invalid_argument("local_uniqueness: center dimension mismatch");
  for (int j = 0; j < graph.dim(); ++j)
    if (x[j] - s < graph.region.lo()[j] || x[j] + s > graph.region.hi()[j])
      throw std::invalid_argument("local_uniqueness: box of radius s exceeds region");

  const int n = static_cast<int>(graph.vertices.size());
  std::vector<char> inside(n, 0);
  auto dist = [&](int i) {
    double m = 0.0;
    for (int j = 0; j < graph.dim(); ++j)
      m = std::max(m, std::fabs(graph.vertices[i].position[j] - x[j]));
    return m;
  };
  for (int i = 0; i < n; ++i) inside[i] = dist(i) <= s;

  std::vector<int> comp(n, -1);
  int crossing_components = 0;
  for (int i = 0; i < n; ++i) {
    if (!inside[i] || comp[i] >= 0) continue;
    // BFS within the restriction.
    bool meets_core = false, meets_shell = false;
    std::queue<int> q;
    q.push(i);
    comp[i] = i;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      const double dv = dist(v);
      if (dv <= r) meets_core = true;
      if (dv >= s - 1) meets_shell = true;
      for (int w : graph.adj[v]) {
        if (!inside[w] || comp[w] >= 0) continue;
        comp[w] = i;
        q.push(w);
      }
    }
    if (meets_core && meets_shell && ++crossing_components > 1) return false;
  }
  return true;
}

std::string graph_to_json(const GeomGraph& graph) {
  std::string s = "{\"vertices\":[";
  char buf[40];
  for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
    if (i) s += ',';
    s += "{\"x\":[";
    const auto& p = graph.vertices[i];
    for (std::size_t j = 0; j < p.position.size(); ++j) {
      if (j) s += ',';
      std::snprintf(buf, sizeof buf, "%.17g", p.position[j]);
      s += buf;
    }
    s += "],\"m\":";
    std::snprintf(buf, sizeof buf, "%.17g", p.mark);
    s += buf;
    s += '}';
  }
  s += "],\"edges\":[";
  bool first = true;
  for (std::size_t i = 0; i < graph.adj.size(); ++i)
    for (int j : graph.adj[i]) {
      if (j <= static_cast<int>(i)) continue;
      if (!first) s += ',';
      first = false;
      s += '[' + std::to_string(i) + ',' + std::to_string(j) + ']';
    }
  s += "]}";
  return s;
}

}  // namespace rcm
