#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "rcm/connection_model.hpp"
#include "rcm/geom_graph.hpp"
#include "rcm/resistor_network.hpp"

namespace rcm {

// Shared simulation knobs: dimension, mark law, padded-window proxy pad as
// a fraction of ell, and how far the simulated strip extends past the box.
struct SimParams {
  int d = 2;
  MarkDistribution marks = MarkDistribution::dirac(0.5);
  double pad_factor = 0.5;
  double trunc_factor = 2.0;
};

using EdgeConductance = std::function<double(const GeomGraph&, int, int)>;

// Scaling estimator for the homogenized conductivity constant: samples the
// strip at each ell, solves the resistor network, and aggregates
// (2 ell)^{2-d} sigma / rho per ell. Convergence failures are rethrown with
// the replica seed attached.
KappaEstimate kappa_from_scaling(const ConnectionModel& model, double rho,
                                 const std::vector<double>& ell_list,
                                 int replicas_per_ell, std::uint64_t seed,
                                 const SimParams& params,
                                 const EdgeConductance& conductance = {});

struct PalmReplica {
  bool origin_in_proxy_cluster = false;
  std::vector<Vec> neighbor_displacements;  // positions of the origin's neighbors
};

struct PalmBatch {
  int d = 2;
  double window_ell = 0.0;
  std::vector<PalmReplica> replicas;
};

// Palm sampling around an inserted origin point with mark drawn from nu:
// records whether the origin lies in a padded-window spanning cluster and
// the displacements of its graph neighbors.
PalmBatch palm_neighbor_batch(const ConnectionModel& model, double rho,
                              const MarkDistribution& nu, double window_ell,
                              int replicas, std::uint64_t seed,
                              const SimParams& params);

struct ValueWithError {
  double value = 0.0;
  double stderr_ = 0.0;
  long n = 0;
};

// Upper bound on the quadratic form of the homogenized matrix along a:
// half the conditional mean of sum over origin neighbors x of (a.x)^2,
// conditioned on the origin joining the spanning proxy cluster.
ValueWithError d_upper_bound(const Vec& a, const PalmBatch& batch);
ValueWithError d_upper_bound(const Vec& a, const ConnectionModel& model,
                             double rho, const MarkDistribution& nu,
                             double window_ell, int replicas,
                             std::uint64_t seed, const SimParams& params);

struct IsotropyReport {
  std::vector<int> directions;
  std::vector<KappaEstimate> per_direction;
  double max_pairwise_gap_in_stderr = 0.0;
};

// Runs the scaling estimator with the strip axis rotated onto each listed
// coordinate direction (by permuting sampled coordinates) and reports the
// largest pairwise gap in combined-standard-error units.
IsotropyReport isotropy_check(const ConnectionModel& model, double rho,
                              const std::vector<int>& directions,
                              const std::vector<double>& ell_list,
                              int replicas_per_ell, std::uint64_t seed,
                              const SimParams& params,
                              const EdgeConductance& conductance = {});

// Long-format table: direction,ell,mean,stderr,n.
std::string isotropy_to_csv(const IsotropyReport& report);

struct PercProbResult {
  double p_hat = 0.0;
  std::pair<double, double> wilson95;
  long n = 0;
};

// Empirical probability that an origin point with the given mark connects
// to the boundary shell of the window box; finite-window stand-in for
// connection to infinity.
PercProbResult point_percolation_prob(double m, const ConnectionModel& model,
                                      double rho, double window_ell,
                                      int replicas, std::uint64_t seed,
                                      const SimParams& params);

// True iff the origin vertex (index 0) reaches the shell
// {x : |x|_inf in [w-1, w]} inside the restriction of the graph to the box
// of radius w. Exposed so window-monotonicity can be probed on one sample.
bool origin_reaches_shell(const GeomGraph& graph, double w);

}  // namespace rcm
