#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace rcm {

// Dinic max-flow specialized to small integer capacities (unit capacities in
// all uses here, where it runs in O(E sqrt(V))). Residuals are kept in the
// arc capacities; callers can inspect them to extract integral paths.
class MaxFlow {
 public:
  struct Arc {
    int to;
    int cap;
    int rev;  // index of the reverse arc in arcs_[to]
  };

  explicit MaxFlow(int n) : arcs_(n), level_(n), it_(n) {}

  void add_edge(int from, int to, int cap) {
    arcs_[from].push_back({to, cap, static_cast<int>(arcs_[to].size())});
    arcs_[to].push_back({from, 0, static_cast<int>(arcs_[from].size()) - 1});
  }

  int run(int source, int sink) {
    int flow = 0;
    while (bfs(source, sink)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (int pushed = dfs(source, sink, 1 << 30)) flow += pushed;
    }
    return flow;
  }

  const std::vector<Arc>& arcs(int v) const { return arcs_[v]; }
  std::vector<Arc>& arcs(int v) { return arcs_[v]; }

 private:
  bool bfs(int source, int sink) {
    std::fill(level_.begin(), level_.end(), -1);
    queue_.clear();
    queue_.push_back(source);
    level_[source] = 0;
    for (std::size_t h = 0; h < queue_.size(); ++h) {
      const int v = queue_[h];
      for (const Arc& a : arcs_[v])
        if (a.cap > 0 && level_[a.to] < 0) {
          level_[a.to] = level_[v] + 1;
          queue_.push_back(a.to);
        }
    }
    return level_[sink] >= 0;
  }

  int dfs(int v, int sink, int limit) {
    if (v == sink) return limit;
    for (int& i = it_[v]; i < static_cast<int>(arcs_[v].size()); ++i) {
      Arc& a = arcs_[v][i];
      if (a.cap <= 0 || level_[a.to] != level_[v] + 1) continue;
      const int pushed = dfs(a.to, sink, std::min(limit, a.cap));
      if (pushed > 0) {
        a.cap -= pushed;
        arcs_[a.to][a.rev].cap += pushed;
        return pushed;
      }
    }
    level_[v] = -1;
    return 0;
  }

  std::vector<std::vector<Arc>> arcs_;
  std::vector<int> level_;
  std::vector<int> it_;
  std::vector<int> queue_;
};

}  // namespace rcm
