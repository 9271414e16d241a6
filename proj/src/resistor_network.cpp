#include "rcm/resistor_network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace rcm {

namespace {

bool in_strip(const Vec& x, double ell) {
  for (std::size_t j = 1; j < x.size(); ++j)
    if (std::fabs(x[j]) > ell) return false;
  return true;
}

// Does the closed segment [a, b] meet the closed box [-ell, ell]^d?
// Standard slab clipping of the parameter interval.
bool segment_meets_box(const Vec& a, const Vec& b, double ell) {
  double t0 = 0.0, t1 = 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double dir = b[j] - a[j];
    if (dir == 0.0) {
      if (a[j] < -ell || a[j] > ell) return false;
      continue;
    }
    double u0 = (-ell - a[j]) / dir;
    double u1 = (ell - a[j]) / dir;
    if (u0 > u1) std::swap(u0, u1);
    t0 = std::max(t0, u0);
    t1 = std::min(t1, u1);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

std::vector<std::vector<std::pair<int, double>>> ResistorNetwork::adjacency() const {
  std::vector<std::vector<std::pair<int, double>>> adj(pos.size());
  for (const auto& e : edges) {
    adj[e.a].emplace_back(e.b, e.conductance);
    adj[e.b].emplace_back(e.a, e.conductance);
  }
  return adj;
}

ResistorNetwork build_rn(
    const GeomGraph& graph, double ell,
    const std::function<double(const GeomGraph&, int, int)>& conductance) {
  if (!(ell > 0)) throw std::invalid_argument("build_rn: ell must be > 0");
  ResistorNetwork rn;
  rn.d = graph.dim();
  rn.ell = ell;

  std::vector<int> node_of(graph.vertices.size(), -1);
  for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
    const Vec& x = graph.vertices[i].position;
    if (!in_strip(x, ell)) continue;
    node_of[i] = static_cast<int>(rn.pos.size());
    rn.pos.push_back(x);
    rn.kind.push_back(x[0] < -ell ? NodeKind::Left
                      : x[0] > ell ? NodeKind::Right
                                   : NodeKind::Interior);
  }

  for (std::size_t i = 0; i < graph.adj.size(); ++i) {
    if (node_of[i] < 0) continue;
    for (int j : graph.adj[i]) {
      if (j <= static_cast<int>(i) || node_of[j] < 0) continue;
      if (!segment_meets_box(graph.vertices[i].position,
                             graph.vertices[j].position, ell))
        continue;
      const double c = conductance ? conductance(graph, static_cast<int>(i), j) : 1.0;
      if (!(c >= 0) || !std::isfinite(c))
        throw std::invalid_argument("build_rn: conductance must be finite and >= 0");
      if (c == 0.0) continue;
      rn.edges.push_back({node_of[i], node_of[j], c});
    }
  }
  return rn;
}

ResistorNetwork build_rn(const GeomGraph& graph, double ell) {
  return build_rn(graph, ell, {});
}

SolveResult solve_potential(const ResistorNetwork& rn, double tol, int max_iter) {
  if (!(tol > 0)) throw std::invalid_argument("solve_potential: tol must be > 0");
  const int n = static_cast<int>(rn.pos.size());
  const auto adj = rn.adjacency();

  // Nodes in components that touch a boundary; the rest float at 0.
  std::vector<char> grounded(n, 0);
  {
    std::queue<int> q;
    for (int i = 0; i < n; ++i)
      if (rn.kind[i] != NodeKind::Interior) {
        grounded[i] = 1;
        q.push(i);
      }
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (const auto& [w, c] : adj[v])
        if (!grounded[w]) {
          grounded[w] = 1;
          q.push(w);
        }
    }
  }

  std::vector<int> unknown_of(n, -1);
  std::vector<int> nodes_of_unknown;
  for (int i = 0; i < n; ++i)
    if (rn.kind[i] == NodeKind::Interior && grounded[i]) {
      unknown_of[i] = static_cast<int>(nodes_of_unknown.size());
      nodes_of_unknown.push_back(i);
    }
  const int m = static_cast<int>(nodes_of_unknown.size());

  auto boundary_value = [&](int node) {
    return rn.kind[node] == NodeKind::Left ? 1.0 : 0.0;
  };

  // Scale for the relative residual: total conductance leaving the left side.
  double current_scale = 0.0;
  for (const auto& e : rn.edges)
    if (rn.kind[e.a] == NodeKind::Left || rn.kind[e.b] == NodeKind::Left)
      current_scale += e.conductance;
  if (current_scale == 0.0) current_scale = 1.0;

  std::vector<double> diag(m, 0.0), b(m, 0.0);
  for (int k = 0; k < m; ++k) {
    const int node = nodes_of_unknown[k];
    for (const auto& [w, c] : adj[node]) {
      diag[k] += c;
      if (unknown_of[w] < 0) b[k] += c * boundary_value(w);
    }
  }

  auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
    for (int k = 0; k < m; ++k) {
      const int node = nodes_of_unknown[k];
      double acc = diag[k] * x[k];
      for (const auto& [w, c] : adj[node])
        if (const int u = unknown_of[w]; u >= 0) acc -= c * x[u];
      out[k] = acc;
    }
  };

  if (max_iter < 0) max_iter = 20 * std::max(1, m);

  std::vector<double> x(m, 0.0), r(b), z(m), p(m), ap(m);
  auto norm2 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double t : v) s += t * t;
    return std::sqrt(s);
  };

  int iterations = 0;
  double residual = norm2(r) / current_scale;
  if (m > 0 && residual > tol) {
    for (int k = 0; k < m; ++k) z[k] = r[k] / diag[k];
    p = z;
    double rz = 0.0;
    for (int k = 0; k < m; ++k) rz += r[k] * z[k];
    while (iterations < max_iter) {
      ++iterations;
      apply(p, ap);
      double pap = 0.0;
      for (int k = 0; k < m; ++k) pap += p[k] * ap[k];
      if (pap <= 0.0) break;  // numerically exhausted
      const double alpha = rz / pap;
      for (int k = 0; k < m; ++k) {
        x[k] += alpha * p[k];
        r[k] -= alpha * ap[k];
      }
      residual = norm2(r) / current_scale;
      if (residual <= tol) break;
      double rz_next = 0.0;
      for (int k = 0; k < m; ++k) {
        z[k] = r[k] / diag[k];
        rz_next += r[k] * z[k];
      }
      const double beta = rz_next / rz;
      rz = rz_next;
      for (int k = 0; k < m; ++k) p[k] = z[k] + beta * p[k];
    }
  }

  SolveResult result;
  result.potential.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (!grounded[i])
      result.potential[i] = 0.0;
    else if (unknown_of[i] >= 0)
      result.potential[i] = x[unknown_of[i]];
    else
      result.potential[i] = boundary_value(i);
  }
  result.residual = residual;
  result.iterations = iterations;
  result.sigma = conductivity(rn, result);

  if (m > 0 && residual > tol)
    throw ConvergenceFailure("solve_potential: tolerance not reached in " +
                                 std::to_string(max_iter) + " iterations",
                             std::move(result));
  return result;
}

double conductivity(const ResistorNetwork& rn, const SolveResult& solve) {
  double sigma = 0.0;
  for (const auto& e : rn.edges) {
    int left = -1, other = -1;
    if (rn.kind[e.a] == NodeKind::Left) left = e.a, other = e.b;
    else if (rn.kind[e.b] == NodeKind::Left) left = e.b, other = e.a;
    else continue;
    if (rn.kind[other] != NodeKind::Interior) continue;
    sigma += e.conductance * (solve.potential[left] - solve.potential[other]);
  }
  return sigma;
}

bool lb_check(double sigma, int n_crossings, long n_vertices_in_box) {
  if (n_vertices_in_box < 1)
    throw std::invalid_argument("lb_check: n_vertices_in_box must be >= 1");
  const double bound = static_cast<double>(n_crossings) * n_crossings /
                       (2.0 * static_cast<double>(n_vertices_in_box));
  return sigma >= bound - 1e-9;
}

KappaEstimate kappa_estimate(const std::vector<std::pair<double, double>>& sigmas,
                             double rho, int d) {
  if (sigmas.empty()) throw std::invalid_argument("kappa_estimate: empty input");
  if (!(rho > 0)) throw std::invalid_argument("kappa_estimate: rho must be > 0");
  std::map<double, std::vector<double>> by_ell;
  for (const auto& [ell, sigma] : sigmas) {
    if (!(ell > 0)) throw std::invalid_argument("kappa_estimate: ell must be > 0");
    by_ell[ell].push_back(std::pow(2.0 * ell, 2 - d) * sigma / rho);
  }
  KappaEstimate est;
  est.rho = rho;
  for (const auto& [ell, vals] : by_ell) {
    if (vals.size() < 2)
      throw std::invalid_argument("kappa_estimate: need >= 2 replicas per ell");
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vals.size() - 1);
    const double se = std::sqrt(var / static_cast<double>(vals.size()));
    est.per_ell.push_back({ell, mean, se, static_cast<int>(vals.size())});
  }
  est.kappa_hat = est.per_ell.back().mean;
  est.stderr_ = est.per_ell.back().stderr_;
  return est;
}

}  // namespace rcm
