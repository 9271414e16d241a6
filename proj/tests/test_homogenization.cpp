#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "rcm/errors.hpp"
#include "rcm/homogenization.hpp"

using namespace rcm;
using namespace testutil;

namespace {

SimParams boolean_params() {
  SimParams p;
  p.d = 2;
  p.marks = MarkDistribution::dirac(0.5);
  return p;
}

}  // namespace

TEST_CASE("kappa_from_scaling input validation") {
  const auto model = ConnectionModel::boolean();
  const auto params = boolean_params();
  CHECK_THROWS_AS(kappa_from_scaling(model, 2.0, {}, 2, 1, params),
                  std::invalid_argument);
  CHECK_THROWS_AS(kappa_from_scaling(model, 2.0, {4.0, 2.0}, 2, 1, params),
                  std::invalid_argument);
  CHECK_THROWS_AS(kappa_from_scaling(model, 2.0, {2.0, 4.0}, 1, 1, params),
                  std::invalid_argument);
  CHECK_THROWS_AS(kappa_from_scaling(model, 0.0, {2.0}, 2, 1, params),
                  std::invalid_argument);
}

TEST_CASE("far-subcritical intensity estimates zero conductivity") {
  const auto params = boolean_params();
  const auto est = kappa_from_scaling(ConnectionModel::boolean(), 0.05,
                                      {4.0, 8.0}, 6, 12345, params);
  CHECK(est.kappa_hat <= 3 * est.stderr_ + 1e-12);
  CHECK(est.per_ell.size() == 2);
  CHECK(est.per_ell.front().n_replicas == 6);
}

TEST_CASE("supercritical intensity estimates positive conductivity") {
  const auto params = boolean_params();
  const auto est = kappa_from_scaling(ConnectionModel::boolean(), 2.5,
                                      {6.0, 10.0}, 8, 777, params);
  CHECK(est.kappa_hat > 3 * est.stderr_);
  CHECK(est.kappa_hat > 0.0);
}

TEST_CASE("palm batch geometry and displacement locality") {
  const auto params = boolean_params();
  const auto batch = palm_neighbor_batch(ConnectionModel::boolean(), 2.5,
                                         params.marks, 5.0, 40, 99, params);
  REQUIRE(batch.replicas.size() == 40);
  long qualified = 0;
  for (const auto& replica : batch.replicas) {
    qualified += replica.origin_in_proxy_cluster;
    for (const auto& x : replica.neighbor_displacements) {
      // Neighbors of the origin sit within the connection range (radius sum 1).
      CHECK(norm_of(x, Norm::Linf) < 1.0 + 1e-12);
    }
  }
  CHECK(qualified > 0);  // supercritical: the origin regularly joins the span
}

TEST_CASE("d_upper_bound: zero direction, quadratic scaling, coordinate swap") {
  const auto params = boolean_params();
  const auto batch = palm_neighbor_batch(ConnectionModel::boolean(), 2.5,
                                         params.marks, 5.0, 60, 4242, params);

  const auto zero = d_upper_bound({0.0, 0.0}, batch);
  CHECK(zero.value == 0.0);

  const auto base = d_upper_bound({0.7, -0.3}, batch);
  const auto doubled = d_upper_bound({1.4, -0.6}, batch);
  CHECK(doubled.value == doctest::Approx(4.0 * base.value).epsilon(1e-12));
  CHECK(doubled.n == base.n);

  // Permuting the direction's coordinates equals permuting the sample.
  const auto swapped = d_upper_bound({-0.3, 0.7}, batch);
  PalmBatch mirrored = batch;
  for (auto& replica : mirrored.replicas)
    for (auto& x : replica.neighbor_displacements) std::swap(x[0], x[1]);
  const auto mirrored_swapped = d_upper_bound({0.7, -0.3}, mirrored);
  CHECK(swapped.value == doctest::Approx(mirrored_swapped.value).epsilon(1e-12));
}

TEST_CASE("d_upper_bound: reflected directions agree within monte-carlo error") {
  const auto params = boolean_params();
  const auto a = d_upper_bound({1.0, 0.0}, ConnectionModel::boolean(), 2.5,
                               params.marks, 5.0, 80, 11, params);
  const auto b = d_upper_bound({-1.0, 0.0}, ConnectionModel::boolean(), 2.5,
                               params.marks, 5.0, 80, 11, params);
  // Same seed, same batch: reflection through a coordinate hyperplane is
  // exact on the quadratic form.
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));

  // Two independent seeds agree within 3 combined standard errors.
  const auto c = d_upper_bound({1.0, 0.0}, ConnectionModel::boolean(), 2.5,
                               params.marks, 5.0, 80, 1200, params);
  const double combined = std::sqrt(a.stderr_ * a.stderr_ + c.stderr_ * c.stderr_);
  CHECK(std::fabs(a.value - c.value) < 3 * combined);
}

TEST_CASE("d_upper_bound with no qualifying replica raises insufficient-data") {
  const auto params = boolean_params();
  // Near-empty configurations: the origin never joins a spanning cluster.
  CHECK_THROWS_AS(d_upper_bound({1.0, 0.0}, ConnectionModel::boolean(), 0.01,
                                params.marks, 4.0, 5, 3, params),
                  InsufficientData);
}

TEST_CASE("isotropy: boolean model agrees across directions") {
  const auto params = boolean_params();
  const auto report =
      isotropy_check(ConnectionModel::boolean(), 2.5, {0, 1}, {4.0, 8.0}, 10,
                     2025, params);
  REQUIRE(report.per_direction.size() == 2);
  CHECK(report.max_pairwise_gap_in_stderr < 3.0);

  // Single direction: no pairs, zero gap.
  const auto single = isotropy_check(ConnectionModel::boolean(), 2.5, {0},
                                     {4.0}, 4, 2025, params);
  CHECK(single.max_pairwise_gap_in_stderr == 0.0);
}

TEST_CASE("isotropy: rigged anisotropic conductance is flagged") {
  const auto params = boolean_params();
  // Edges aligned with the measured axis conduct 25x better.
  EdgeConductance rigged = [](const GeomGraph& g, int i, int j) {
    const double dx = std::fabs(g.vertices[i].position[0] - g.vertices[j].position[0]);
    const double dy = std::fabs(g.vertices[i].position[1] - g.vertices[j].position[1]);
    return dx > dy ? 25.0 : 1.0;
  };
  const auto report = isotropy_check(ConnectionModel::boolean(), 2.5, {0, 1},
                                     {4.0, 8.0}, 10, 31338, params, rigged);
  CHECK(report.max_pairwise_gap_in_stderr > 3.0);
}

TEST_CASE("isotropy report serializes to a long-format table") {
  IsotropyReport report;
  report.directions = {0, 1};
  KappaEstimate a;
  a.per_ell = {{4.0, 0.5, 0.01, 10}, {8.0, 0.52, 0.02, 10}};
  KappaEstimate b;
  b.per_ell = {{4.0, 0.49, 0.015, 10}};
  report.per_direction = {a, b};
  const auto csv = isotropy_to_csv(report);
  CHECK(csv.rfind("direction,ell,mean,stderr,n\n", 0) == 0);
  CHECK(csv.find("0,4,0.5,0.01,10\n") != std::string::npos);
  CHECK(csv.find("1,4,0.48999999999999999,0.015,10\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("point percolation probability") {
  SimParams params = boolean_params();

  // Mott: a mark beyond half the cutoff is isolated, exactly zero.
  params.marks = MarkDistribution::uniform_interval(-0.5, 0.5);
  const auto mott = ConnectionModel::mott(1.5);
  const auto frozen = point_percolation_prob(0.8, mott, 3.0, 4.0, 60, 5, params);
  CHECK(frozen.p_hat == 0.0);
  CHECK(frozen.n == 60);

  // No other points at all: nothing to connect to.
  const auto alone = point_percolation_prob(0.0, mott, 0.0, 4.0, 20, 6, params);
  CHECK(alone.p_hat == 0.0);

  // Supercritical boolean: central mark percolates often.
  params.marks = MarkDistribution::dirac(0.5);
  const auto dense = point_percolation_prob(
      0.5, ConnectionModel::boolean(), 2.5, 6.0, 80, 7, params);
  CHECK(dense.p_hat > 0.5);
  CHECK(dense.wilson95.first > 0.3);

  // Window monotonicity on one shared sample: reaching the outer shell
  // forces crossing the inner one when hops cannot jump the shell.
  const Region big = Region::centered_box(2, 8.0);
  const auto model = ConnectionModel::kernel("hard_range", {{"range", 1.0}});
  int outer_hits = 0, inner_hits = 0;
  for (int rep = 0; rep < 40; ++rep) {
    auto config = sample_ppp(big, 2.0, params.marks, 9000 + rep, 0);
    config = palm_insert(config, MarkedPoint{{0.0, 0.0}, 0.5, 0});
    const auto graph = build_graph(config, model, rep);
    const bool outer = origin_reaches_shell(graph, 8.0);
    const bool inner = origin_reaches_shell(graph, 5.0);
    if (outer) CHECK(inner);
    outer_hits += outer;
    inner_hits += inner;
  }
  CHECK(inner_hits >= outer_hits);
}
