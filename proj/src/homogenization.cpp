#include "rcm/homogenization.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "rcm/errors.hpp"
#include "rcm/stats.hpp"

namespace rcm {

KappaEstimate kappa_from_scaling(const ConnectionModel& model, double rho,
                                 const std::vector<double>& ell_list,
                                 int replicas_per_ell, std::uint64_t seed,
                                 const SimParams& params,
                                 const EdgeConductance& conductance) {
  if (ell_list.empty() || !std::is_sorted(ell_list.begin(), ell_list.end()))
    throw std::invalid_argument("kappa_from_scaling: ell_list must be nonempty and increasing");
  if (replicas_per_ell < 2)
    throw std::invalid_argument("kappa_from_scaling: need >= 2 replicas per ell");
  if (!(rho > 0)) throw std::invalid_argument("kappa_from_scaling: rho must be > 0");

  std::vector<std::pair<double, double>> sigmas;
  sigmas.reserve(ell_list.size() * replicas_per_ell);
  for (std::size_t ei = 0; ei < ell_list.size(); ++ei) {
    const double ell = ell_list[ei];
    const Region region = Region::strip(params.d, ell, params.trunc_factor);
    for (int rep = 0; rep < replicas_per_ell; ++rep) {
      const std::uint64_t rep_seed = derive(seed, stream_tag::replica, ei, rep);
      const auto config = sample_ppp(region, rho, params.marks, rep_seed, 0);
      const auto graph = build_graph(config, model, derive(rep_seed, 1));
      const auto rn = build_rn(graph, ell, conductance);
      try {
        const auto solve = solve_potential(rn);
        sigmas.emplace_back(ell, solve.sigma);
      } catch (const ConvergenceFailure& failure) {
        throw ConvergenceFailure(std::string(failure.what()) +
                                     " (replica seed " + std::to_string(rep_seed) + ")",
                                 failure.best());
      }
    }
  }
  return kappa_estimate(sigmas, rho, params.d);
}

bool origin_reaches_shell(const GeomGraph& graph, double w) {
  if (graph.vertices.empty()) return false;
  const int n = static_cast<int>(graph.vertices.size());
  auto linf = [&](int i) {
    double m = 0.0;
    for (double c : graph.vertices[i].position) m = std::max(m, std::fabs(c));
    return m;
  };
  std::vector<char> visited(n, 0);
  std::queue<int> q;
  q.push(0);
  visited[0] = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    const double dv = linf(v);
    if (dv > w) continue;  // outside the window restriction
    if (dv >= w - 1) return true;
    for (int u : graph.adj[v])
      if (!visited[u]) {
        visited[u] = 1;
        q.push(u);
      }
  }
  return false;
}

PalmBatch palm_neighbor_batch(const ConnectionModel& model, double rho,
                              const MarkDistribution& nu, double window_ell,
                              int replicas, std::uint64_t seed,
                              const SimParams& params) {
  if (replicas < 1) throw std::invalid_argument("palm_neighbor_batch: replicas must be >= 1");
  if (!(window_ell >= 1)) throw std::invalid_argument("palm_neighbor_batch: window_ell must be >= 1");

  const double pad = params.pad_factor * window_ell;
  const Region region = Region::strip(params.d, window_ell,
                                      std::max(params.trunc_factor,
                                               1.0 + params.pad_factor));

  PalmBatch batch;
  batch.d = params.d;
  batch.window_ell = window_ell;
  batch.replicas.reserve(replicas);
  for (int rep = 0; rep < replicas; ++rep) {
    const std::uint64_t rep_seed = derive(seed, stream_tag::palm, rep);
    auto config = sample_ppp(region, rho, params.marks, rep_seed, 0);
    Prng mark_rng(derive(rep_seed, 2));
    MarkedPoint origin{Vec(params.d, 0.0), nu.sample(mark_rng), 0};
    config = palm_insert(config, std::move(origin));
    const auto graph = build_graph(config, model, derive(rep_seed, 1));

    PalmReplica replica;
    for (int j : graph.adj[0])
      replica.neighbor_displacements.push_back(graph.vertices[j].position);
    const auto spanning = crossing_cluster_ids(graph, window_ell, pad);
    const auto labels = components(graph);
    replica.origin_in_proxy_cluster = spanning.count(labels.label[0]) > 0;
    batch.replicas.push_back(std::move(replica));
  }
  return batch;
}

ValueWithError d_upper_bound(const Vec& a, const PalmBatch& batch) {
  if (static_cast<int>(a.size()) != batch.d)
    throw std::invalid_argument("d_upper_bound: direction dimension mismatch");
  std::vector<double> samples;
  for (const auto& replica : batch.replicas) {
    if (!replica.origin_in_proxy_cluster) continue;
    double sum = 0.0;
    for (const auto& x : replica.neighbor_displacements) {
      double dot = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * x[j];
      sum += dot * dot;
    }
    samples.push_back(0.5 * sum);
  }
  if (samples.empty())
    throw InsufficientData("d_upper_bound: no replica had the origin in the proxy cluster");
  return {mean(samples), stderr_of_mean(samples),
          static_cast<long>(samples.size())};
}

ValueWithError d_upper_bound(const Vec& a, const ConnectionModel& model,
                             double rho, const MarkDistribution& nu,
                             double window_ell, int replicas,
                             std::uint64_t seed, const SimParams& params) {
  return d_upper_bound(
      a, palm_neighbor_batch(model, rho, nu, window_ell, replicas, seed, params));
}

IsotropyReport isotropy_check(const ConnectionModel& model, double rho,
                              const std::vector<int>& directions,
                              const std::vector<double>& ell_list,
                              int replicas_per_ell, std::uint64_t seed,
                              const SimParams& params,
                              const EdgeConductance& conductance) {
  if (directions.empty())
    throw std::invalid_argument("isotropy_check: need at least one direction");
  for (int dir : directions)
    if (dir < 0 || dir >= params.d)
      throw std::invalid_argument("isotropy_check: direction out of range");

  IsotropyReport report;
  report.directions = directions;
  for (std::size_t k = 0; k < directions.size(); ++k) {
    const int dir = directions[k];
    // Measure along physical axis `dir`: sample the strip elongated along
    // it, assemble graph and conductances in the physical frame, and only
    // then relabel coordinates so the axis-0 solver applies.
    std::vector<std::pair<double, double>> sigmas;
    for (std::size_t ei = 0; ei < ell_list.size(); ++ei) {
      const double ell = ell_list[ei];
      Vec lo(params.d, -ell), hi(params.d, ell);
      lo[dir] = -params.trunc_factor * ell;
      hi[dir] = params.trunc_factor * ell;
      const Region region(std::move(lo), std::move(hi));
      for (int rep = 0; rep < replicas_per_ell; ++rep) {
        const std::uint64_t rep_seed =
            derive(seed, stream_tag::replica, k, ei, rep);
        const auto config = sample_ppp(region, rho, params.marks, rep_seed, 0);
        auto graph = build_graph(config, model, derive(rep_seed, 1));

        std::map<std::pair<int, int>, double> physical;
        if (conductance)
          for (std::size_t i = 0; i < graph.adj.size(); ++i)
            for (int j : graph.adj[i])
              if (j > static_cast<int>(i))
                physical[{static_cast<int>(i), j}] =
                    conductance(graph, static_cast<int>(i), j);

        if (dir != 0) {
          for (auto& p : graph.vertices) std::swap(p.position[0], p.position[dir]);
          Vec nlo = graph.region.lo(), nhi = graph.region.hi();
          std::swap(nlo[0], nlo[dir]);
          std::swap(nhi[0], nhi[dir]);
          graph.region = Region(std::move(nlo), std::move(nhi));
        }

        EdgeConductance lookup;
        if (conductance)
          lookup = [&physical](const GeomGraph&, int i, int j) {
            if (i > j) std::swap(i, j);
            return physical.at({i, j});
          };
        const auto rn = build_rn(graph, ell, lookup);
        const auto solve = solve_potential(rn);
        sigmas.emplace_back(ell, solve.sigma);
      }
    }
    report.per_direction.push_back(kappa_estimate(sigmas, rho, params.d));
  }

  for (std::size_t i = 0; i < report.per_direction.size(); ++i)
    for (std::size_t j = i + 1; j < report.per_direction.size(); ++j) {
      const auto& a = report.per_direction[i];
      const auto& b = report.per_direction[j];
      const double se = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
      const double gap =
          se > 0 ? std::fabs(a.kappa_hat - b.kappa_hat) / se
                 : (a.kappa_hat == b.kappa_hat ? 0.0 : HUGE_VAL);
      report.max_pairwise_gap_in_stderr =
          std::max(report.max_pairwise_gap_in_stderr, gap);
    }
  return report;
}

std::string isotropy_to_csv(const IsotropyReport& report) {
  std::string out = "direction,ell,mean,stderr,n\n";
  char buf[120];
  for (std::size_t k = 0; k < report.per_direction.size(); ++k)
    for (const auto& row : report.per_direction[k].per_ell) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d\n",
                    report.directions[k], row.ell, row.mean, row.stderr_,
                    row.n_replicas);
      out += buf;
    }
  return out;
}

PercProbResult point_percolation_prob(double m, const ConnectionModel& model,
                                      double rho, double window_ell,
                                      int replicas, std::uint64_t seed,
                                      const SimParams& params) {
  if (replicas < 1) throw std::invalid_argument("point_percolation_prob: replicas must be >= 1");
  if (!(window_ell >= 1)) throw std::invalid_argument("point_percolation_prob: window_ell must be >= 1");

  const Region region = Region::centered_box(params.d, window_ell);
  long hits = 0;
  for (int rep = 0; rep < replicas; ++rep) {
    const std::uint64_t rep_seed = derive(seed, stream_tag::palm, rep);
    auto config = sample_ppp(region, rho, params.marks, rep_seed, 0);
    config = palm_insert(config, MarkedPoint{Vec(params.d, 0.0), m, 0});
    const auto graph = build_graph(config, model, derive(rep_seed, 1));
    hits += origin_reaches_shell(graph, window_ell);
  }
  PercProbResult result;
  result.n = replicas;
  result.p_hat = static_cast<double>(hits) / static_cast<double>(replicas);
  result.wilson95 = wilson95(static_cast<double>(hits), static_cast<double>(replicas));
  return result;
}

}  // namespace rcm
