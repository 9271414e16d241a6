#pragma once

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rcm/geom_graph.hpp"

namespace rcm {

enum class NodeKind { Left, Interior, Right };

struct RnEdge {
  int a, b;
  double conductance;
};

// Electrical network on the strip: nodes are graph vertices inside the
// strip, filaments are graph edges inside the strip whose segment meets the
// central box. Boundary partition by the first coordinate.
struct ResistorNetwork {
  int d = 2;
  double ell = 0.0;
  std::vector<Vec> pos;
  std::vector<NodeKind> kind;
  std::vector<RnEdge> edges;

  std::vector<std::vector<std::pair<int, double>>> adjacency() const;
};

ResistorNetwork build_rn(const GeomGraph& graph, double ell);
ResistorNetwork build_rn(
    const GeomGraph& graph, double ell,
    const std::function<double(const GeomGraph&, int, int)>& conductance);

struct SolveResult {
  std::vector<double> potential;  // per node; 1 on left, 0 on right
  double sigma = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

// Thrown when the conjugate-gradient loop exhausts its iteration budget;
// carries the best iterate found.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, SolveResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const SolveResult& best() const noexcept { return best_; }

 private:
  SolveResult best_;
};

// Dirichlet solve: potential 1 on left nodes, 0 on right nodes, balanced at
// interior nodes. Jacobi-preconditioned conjugate gradient on the interior
// block; components touching neither boundary sit at 0 and carry no
// current. max_iter < 0 means 20 * (number of interior unknowns).
SolveResult solve_potential(const ResistorNetwork& rn, double tol = 1e-10,
                            int max_iter = -1);

// Total current drawn from the left boundary into the box.
double conductivity(const ResistorNetwork& rn, const SolveResult& solve);

// Parallel-chains lower bound: sigma >= N^2 / (2 #vertices-in-box), up to
// solver slack.
bool lb_check(double sigma, int n_crossings, long n_vertices_in_box);

struct KappaEstimate {
  double kappa_hat = 0.0;
  double stderr_ = 0.0;
  struct PerEll {
    double ell;
    double mean;
    double stderr_;
    int n_replicas;
  };
  std::vector<PerEll> per_ell;  // sorted by ell
  double rho = 0.0;
};

// Aggregates (ell, sigma) samples into the scaling estimator
// (2 ell)^{2-d} sigma / rho, per ell; the estimate is the value at the
// largest ell. Needs at least two replicas per ell.
KappaEstimate kappa_estimate(const std::vector<std::pair<double, double>>& sigmas,
                             double rho, int d);

}  // namespace rcm
