#include "rcm/crossings.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "rcm/errors.hpp"
#include "rcm/maxflow.hpp"

namespace rcm {

namespace {

enum class Role { None, Left, Box, Right };

// Strip membership: |x_j| <= ell for every coordinate but the first.
bool in_strip(const Vec& x, double ell) {
  for (std::size_t j = 1; j < x.size(); ++j)
    if (std::fabs(x[j]) > ell) return false;
  return true;
}

Role role_of(const Vec& x, double ell) {
  if (!in_strip(x, ell)) return Role::None;
  if (x[0] < -ell) return Role::Left;
  if (x[0] > ell) return Role::Right;
  return Role::Box;  // closed box, boundary included
}

std::vector<Role> classify(const GeomGraph& graph, const CrossingQuery& query) {
  std::vector<Role> roles(graph.vertices.size(), Role::None);
  std::optional<ClusterLabels> labels;
  if (query.cluster_filter) labels = components(graph);
  for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
    if (query.cluster_filter &&
        !query.cluster_filter->count(labels->label[i]))
      continue;
    roles[i] = role_of(graph.vertices[i].position, query.ell);
  }
  return roles;
}

bool arc_allowed(Role from, Role to) {
  // Crossings run left -> box -> ... -> box -> right, never left -> right
  // in one hop (three vertices minimum).
  if (from == Role::Left) return to == Role::Box;
  if (from == Role::Box) return to == Role::Box || to == Role::Right;
  return false;
}

struct SplitNetwork {
  MaxFlow flow;
  int source, sink;
  std::vector<int> participants;      // graph indices
  std::vector<int> dense_id;          // graph index -> participant slot or -1

  SplitNetwork(const GeomGraph& graph, const std::vector<Role>& roles)
      : flow(build_size(roles)), source(0), sink(1),
        dense_id(graph.vertices.size(), -1) {
    for (std::size_t i = 0; i < roles.size(); ++i)
      if (roles[i] != Role::None) {
        dense_id[i] = static_cast<int>(participants.size());
        participants.push_back(static_cast<int>(i));
      }
    for (int slot = 0; slot < static_cast<int>(participants.size()); ++slot) {
      const int v = participants[slot];
      flow.add_edge(node_in(slot), node_out(slot), 1);
      if (roles[v] == Role::Left) flow.add_edge(source, node_in(slot), 1);
      if (roles[v] == Role::Right) flow.add_edge(node_out(slot), sink, 1);
    }
    for (std::size_t i = 0; i < graph.adj.size(); ++i) {
      if (dense_id[i] < 0) continue;
      for (int j : graph.adj[i]) {
        if (dense_id[j] < 0) continue;
        if (arc_allowed(roles[i], roles[j]))
          flow.add_edge(node_out(dense_id[i]), node_in(dense_id[j]), 1);
      }
    }
  }

  static int build_size(const std::vector<Role>& roles) {
    int n = 0;
    for (Role r : roles)
      if (r != Role::None) ++n;
    return 2 * n + 2;
  }

  int node_in(int slot) const { return 2 + 2 * slot; }
  int node_out(int slot) const { return 2 + 2 * slot + 1; }

  // After run(): walk saturated arcs to recover the vertex-disjoint paths.
  std::vector<std::vector<int>> decompose(const std::vector<Role>& roles) {
    std::vector<std::vector<int>> paths;
    for (const auto& arc : flow.arcs(source)) {
      if (arc.cap != 0) continue;  // unsaturated source arc
      std::vector<int> path;
      int node = arc.to;  // an in-node
      while (true) {
        const int slot = (node - 2) / 2;
        path.push_back(participants[slot]);
        if (roles[participants[slot]] == Role::Right) break;
        int next = -1;
        for (auto& a : flow.arcs(node_out(slot))) {
          if (a.to == sink || a.to == node_in(slot)) continue;
          if (a.cap == 0 && a.to >= 2 && a.to % 2 == 0) {  // used out->in arc
            a.cap = -1;  // mark consumed so shared nodes are not re-walked
            next = a.to;
            break;
          }
        }
        if (next < 0) break;
        node = next;
      }
      if (path.size() >= 3 && roles[path.back()] == Role::Right)
        paths.push_back(std::move(path));
    }
    return paths;
  }
};

}  // namespace

bool is_lr_crossing(const GeomGraph& graph, const std::vector<int>& path,
                    double ell) {
  const int n = static_cast<int>(path.size());
  if (n < 3) return false;
  std::unordered_set<int> seen;
  for (int v : path) {
    if (v < 0 || v >= static_cast<int>(graph.vertices.size())) return false;
    if (!seen.insert(v).second) return false;  // repeated vertex
  }
  for (int i = 0; i + 1 < n; ++i)
    if (!graph.has_edge(path[i], path[i + 1])) return false;
  if (role_of(graph.vertices[path.front()].position, ell) != Role::Left)
    return false;
  if (role_of(graph.vertices[path.back()].position, ell) != Role::Right)
    return false;
  for (int i = 1; i + 1 < n; ++i) {
    const Vec& x = graph.vertices[path[i]].position;
    for (double c : x)
      if (std::fabs(c) > ell) return false;
  }
  return true;
}

CrossingResult max_disjoint_crossings(const GeomGraph& graph,
                                      const CrossingQuery& query) {
  if (!(query.ell > 0))
    throw std::invalid_argument("max_disjoint_crossings: ell must be > 0");
  for (int j = 1; j < graph.dim(); ++j)
    if (graph.region.lo()[j] > -query.ell || graph.region.hi()[j] < query.ell)
      throw std::invalid_argument("max_disjoint_crossings: region narrower than the strip");
  if (query.length_cap && graph.range_bound > 0) {
    const int min_len =
        2 * static_cast<int>(std::ceil(query.ell / graph.range_bound));
    if (*query.length_cap < min_len)
      throw std::invalid_argument(
          "max_disjoint_crossings: length_cap below the minimum feasible crossing length");
  }

  const auto roles = classify(graph, query);
  SplitNetwork net(graph, roles);
  const int count = net.flow.run(net.source, net.sink);
  auto witnesses = net.decompose(roles);

  CrossingResult result;
  if (!query.length_cap ||
      std::all_of(witnesses.begin(), witnesses.end(),
                  [&](const auto& w) {
                    return static_cast<int>(w.size()) - 1 <= *query.length_cap;
                  })) {
    result.count = count;
    result.witnesses = std::move(witnesses);
    result.method = query.length_cap ? CrossingMethod::greedy_lower_bound
                                     : CrossingMethod::exact_maxflow;
    return result;
  }

  // Greedy shortest-path packing under the cap. BFS always finds a shortest
  // admissible path, so once the shortest exceeds the cap no capped path
  // remains among the unused vertices.
  result.method = CrossingMethod::greedy_lower_bound;
  std::vector<char> used(graph.vertices.size(), 0);
  while (true) {
    std::vector<int> parent(graph.vertices.size(), -2);
    std::queue<int> q;
    for (std::size_t i = 0; i < roles.size(); ++i)
      if (roles[i] == Role::Left && !used[i]) {
        parent[i] = -1;
        q.push(static_cast<int>(i));
      }
    int hit = -1;
    while (!q.empty() && hit < 0) {
      const int v = q.front();
      q.pop();
      for (int w : graph.adj[v]) {
        if (used[w] || parent[w] != -2) continue;
        if (!arc_allowed(roles[v], roles[w])) continue;
        parent[w] = v;
        if (roles[w] == Role::Right) {
          hit = w;
          break;
        }
        q.push(w);
      }
    }
    if (hit < 0) break;
    std::vector<int> path;
    for (int v = hit; v != -1; v = parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    if (static_cast<int>(path.size()) - 1 > *query.length_cap) break;
    for (int v : path) used[v] = 1;
    result.witnesses.push_back(std::move(path));
  }
  result.count = static_cast<int>(result.witnesses.size());
  return result;
}

namespace {

struct BruteForce {
  int n;
  double ell;
  std::vector<std::uint32_t> adj;
  std::uint32_t left = 0, right = 0, box = 0;
  std::unordered_map<std::uint32_t, int> memo;

  explicit BruteForce(const GeomGraph& graph, double ell_) : ell(ell_) {
    n = static_cast<int>(graph.vertices.size());
    adj.assign(n, 0);
    for (int i = 0; i < n; ++i)
      for (int j : graph.adj[i]) adj[i] |= 1u << j;
    for (int i = 0; i < n; ++i) {
      switch (role_of(graph.vertices[i].position, ell)) {
        case Role::Left: left |= 1u << i; break;
        case Role::Right: right |= 1u << i; break;
        case Role::Box: box |= 1u << i; break;
        case Role::None: break;
      }
    }
  }

  // Can `from` still reach a right vertex through available box vertices?
  bool reachable(int from, std::uint32_t avail) const {
    std::uint32_t frontier = 1u << from, seen = frontier;
    while (frontier) {
      std::uint32_t next = 0;
      for (std::uint32_t f = frontier; f;) {
        const int v = std::countr_zero(f);
        f &= f - 1;
        const std::uint32_t nb = adj[v] & avail & ~seen;
        if (nb & right & ~(1u << from)) return true;
        next |= nb & box;
      }
      seen |= next;
      frontier = next;
    }
    return false;
  }

  int solve(std::uint32_t avail) {
    auto it = memo.find(avail);
    if (it != memo.end()) return it->second;

    int pivot = -1;
    for (std::uint32_t l = left & avail; l;) {
      const int v = std::countr_zero(l);
      l &= l - 1;
      if (reachable(v, avail & ~(1u << v))) {
        pivot = v;
        break;
      }
    }
    if (pivot < 0) {
      memo[avail] = 0;
      return 0;
    }

    int best = solve(avail & ~(1u << pivot));  // leave the pivot unused
    // Enumerate simple crossings out of the pivot, recursing on each.
    std::vector<int> stack{pivot};
    std::uint32_t on_path = 1u << pivot;
    dfs_paths(avail, stack, on_path, best);
    memo[avail] = best;
    return best;
  }

  void dfs_paths(std::uint32_t avail, std::vector<int>& stack,
                 std::uint32_t on_path, int& best) {
    const int tip = stack.back();
    if (stack.size() >= 2) {
      for (std::uint32_t r = adj[tip] & avail & right & ~on_path; r;) {
        const int end = std::countr_zero(r);
        r &= r - 1;
        const int sub = 1 + solve(avail & ~(on_path | (1u << end)));
        best = std::max(best, sub);
      }
    }
    for (std::uint32_t b = adj[tip] & avail & box & ~on_path; b;) {
      const int v = std::countr_zero(b);
      b &= b - 1;
      stack.push_back(v);
      if (reachable(v, avail & ~on_path))
        dfs_paths(avail, stack, on_path | (1u << v), best);
      stack.pop_back();
    }
  }
};

}  // namespace

int brute_force_crossings(const GeomGraph& graph, double ell) {
  if (graph.vertices.size() > 22)
    throw UnsupportedOperation("brute_force_crossings: more than 22 vertices");
  BruteForce bf(graph, ell);
  std::uint32_t avail = bf.left | bf.right | bf.box;
  return bf.solve(avail);
}

std::string witnesses_to_json(const CrossingResult& result) {
  std::string s = "[";
  for (std::size_t i = 0; i < result.witnesses.size(); ++i) {
    if (i) s += ',';
    s += '[';
    for (std::size_t j = 0; j < result.witnesses[i].size(); ++j) {
      if (j) s += ',';
      s += std::to_string(result.witnesses[i][j]);
    }
    s += ']';
  }
  s += ']';
  return s;
}

}  // namespace rcm
