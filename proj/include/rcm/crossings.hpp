#pragma once

#include <optional>
#include <set>
#include <vector>

#include "rcm/geom_graph.hpp"

namespace rcm {

// Query for vertex-disjoint left-right crossings of the box of half-width
// ell. A crossing starts strictly left of the box inside the strip, ends
// strictly right of it, and keeps all intermediate vertices in the box.
struct CrossingQuery {
  double ell = 0.0;
  std::optional<std::set<int>> cluster_filter;  // restrict to these clusters
  std::optional<int> length_cap;                // max edge count per crossing
};

enum class CrossingMethod { exact_maxflow, greedy_lower_bound };

struct CrossingResult {
  int count = 0;
  std::vector<std::vector<int>> witnesses;  // vertex index paths
  CrossingMethod method = CrossingMethod::exact_maxflow;
};

// A path y_1..y_n is a left-right crossing iff n >= 3, vertices are
// distinct, consecutive vertices adjacent, y_1 in the left half-strip,
// y_n in the right half-strip, and y_2..y_{n-1} in the closed box.
bool is_lr_crossing(const GeomGraph& graph, const std::vector<int>& path,
                    double ell);

// Without a length cap: the exact maximum via unit-capacity vertex-split
// max-flow, witnesses from the flow decomposition. With a cap: a certified
// lower bound (the exact family when all its witnesses fit the cap,
// otherwise greedy shortest-path packing).
CrossingResult max_disjoint_crossings(const GeomGraph& graph,
                                      const CrossingQuery& query);

// Independent exact oracle: exhaustive packing search with memoized
// pruning. Refuses graphs with more than 22 vertices.
int brute_force_crossings(const GeomGraph& graph, double ell);

// JSON list of index paths, e.g. [[0,4,7],[2,5,9]].
std::string witnesses_to_json(const CrossingResult& result);

}  // namespace rcm
