#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rcm/connection_model.hpp"
#include "rcm/point_process.hpp"

namespace rcm {

// Realized random connection model graph on a marked configuration.
// Vertices keep the config order; adjacency lists are sorted; per-pair
// connection variables are keyed by the two uids, so rebuilding on a
// thinned config with the same seed yields an induced subgraph.
struct GeomGraph {
  std::vector<MarkedPoint> vertices;
  std::vector<std::vector<int>> adj;
  ConnectionModel model;
  Region region;
  std::uint64_t build_seed = 0;
  double range_bound = 0.0;

  int dim() const { return region.dim(); }
  std::size_t edge_count() const;
  bool has_edge(int i, int j) const;
};

GeomGraph build_graph(const MarkedConfig& config, const ConnectionModel& model,
                      std::uint64_t seed);

// Connection variable for an unordered uid pair under a given build seed.
double pair_u(std::uint64_t seed, std::uint64_t uid_a, std::uint64_t uid_b);

struct ClusterLabels {
  std::vector<int> label;       // canonical: smallest vertex index in cluster
  std::map<int, int> sizes;     // cluster id -> vertex count
};

ClusterLabels components(const GeomGraph& graph);

// Ids of clusters holding both a vertex with first coordinate < -(ell+pad)
// and one with first coordinate > ell+pad: the finite-volume stand-in for
// clusters of macroscopic extent.
std::set<int> crossing_cluster_ids(const GeomGraph& graph, double ell,
                                   double pad);

// True iff all clusters of the restriction to the box of radius s around x
// that touch both the inner box of radius r and the shell
// {y : |y-x|_inf in [s-1, s]} coincide.
bool local_uniqueness(const GeomGraph& graph, double r, double s, const Vec& x);

// Debug dump: {"vertices": [...], "edges": [[i,j], ...]} with the edge list
// sorted lexicographically.
std::string graph_to_json(const GeomGraph& graph);

}  // namespace rcm
