#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "rcm/errors.hpp"
#include "rcm/exploration.hpp"

using namespace rcm;

namespace {

class ConstantDriver : public SiteLinkDriver {
 public:
  explicit ConstantDriver(bool value) : value_(value) {}
  bool occupied(int) override { return value_; }
  bool linked(GridPoint, GridPoint) override { return value_; }

 private:
  bool value_;
};

// Succeeds on the very first query, then refuses everything.
class SpitefulDriver : public SiteLinkDriver {
 public:
  bool occupied(int) override { return take(); }
  bool linked(GridPoint, GridPoint) override { return take(); }

 private:
  bool take() {
    const bool v = first_;
    first_ = false;
    return v;
  }
  bool first_ = true;
};

int run_counts(const GridDomain& domain, double p_site, double p_link,
               std::uint64_t seed, int* oracle_out = nullptr) {
  auto inner = bernoulli_driver(p_site, p_link, seed);
  RecordingDriver recording(*inner);
  const auto state = explore(domain, recording);
  if (oracle_out) *oracle_out = menger_oracle(recording, domain);
  return crossings_from_exploration(state, domain);
}

}  // namespace

TEST_CASE("domain geometry") {
  CHECK_THROWS_AS(GridDomain(0, 1), std::invalid_argument);
  const GridDomain d(2, 3);
  CHECK(d.contains({0, 0}));
  CHECK(d.contains({1, 1}));
  CHECK(!d.contains({0, 2}));   // above the small block, left of the big one
  CHECK(d.contains({2, -3}));
  CHECK(d.contains({5, 5}));
  CHECK(!d.contains({6, 0}));
  CHECK(d.on_left_boundary({0, 1}));
  CHECK(!d.on_left_boundary({0, 2}));
  CHECK(d.on_right_boundary({5, 0}));
  CHECK(d.on_right_boundary({3, -3}));
  CHECK(d.on_right_boundary({3, 5}));
  CHECK(!d.on_right_boundary({3, 0}));
  CHECK(static_cast<int>(d.sites().size()) == d.site_count());
  int boundary_sites = 0;
  for (const auto& p : d.sites()) boundary_sites += d.on_right_boundary(p);
  CHECK(boundary_sites == ((2 + 2 * 3 + 1) + 2 * (3 + 1) - 2));  // far column + two rows - shared corners
}

TEST_CASE("boundary order: singleton golden list") {
  const auto order = boundary_order({{0, 0}});
  const std::vector<GridPoint> expected = {{-1, 0}, {0, 1}, {1, 0}, {0, -1}};
  CHECK(order == expected);
}

TEST_CASE("boundary order: horizontal path golden list") {
  // Hand-derived once from the block/clockwise rules and frozen.
  const auto order = boundary_order({{0, 0}, {1, 0}, {2, 0}});
  const std::vector<GridPoint> expected = {{-1, 0}, {0, 1}, {0, -1}, {1, 1},
                                           {1, -1}, {2, 1}, {3, 0}, {2, -1}};
  CHECK(order == expected);
}

TEST_CASE("boundary order: bent growth set anchors at the latest neighbor") {
  // The last point (0,1) attaches to (1,1) (index 3), not to (0,0).
  const auto order = boundary_order({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const std::vector<GridPoint> expected = {{-1, 0}, {0, -1}, {2, 0}, {1, -1},
                                           {1, 2},  {2, 1},  {-1, 1}, {0, 2}};
  CHECK(order == expected);
}

TEST_CASE("boundary order: output is a permutation of the lattice boundary") {
  Prng rng(314);
  for (int trial = 0; trial < 200; ++trial) {
    // Random growth set: start at origin, repeatedly attach a boundary point.
    std::vector<GridPoint> growth{{0, 0}};
    std::set<std::pair<int, int>> members{{0, 0}};
    const int target = 2 + static_cast<int>(rng.next_below(12));
    while (static_cast<int>(growth.size()) < target) {
      const auto boundary = boundary_order(growth);
      const auto& next = boundary[rng.next_below(boundary.size())];
      growth.push_back(next);
      members.insert({next.x, next.y});
    }

    const auto order = boundary_order(growth);
    std::set<std::pair<int, int>> expected;
    for (const auto& p : growth)
      for (const auto& d : {GridPoint{1, 0}, GridPoint{-1, 0}, GridPoint{0, 1},
                            GridPoint{0, -1}}) {
        const GridPoint q{p.x + d.x, p.y + d.y};
        if (!members.count({q.x, q.y})) expected.insert({q.x, q.y});
      }
    std::set<std::pair<int, int>> got;
    for (const auto& p : order) got.insert({p.x, p.y});
    CHECK(got == expected);
    CHECK(order.size() == expected.size());  // no duplicates
  }
}

TEST_CASE("boundary order rejects malformed growth sets") {
  CHECK_THROWS_AS(boundary_order({}), std::invalid_argument);
  CHECK_THROWS_AS(boundary_order({{0, 0}, {5, 5}}), std::invalid_argument);
  CHECK_THROWS_AS(boundary_order({{0, 0}, {1, 0}, {0, 0}}), std::invalid_argument);
}

TEST_CASE("maximal field: every row crosses") {
  for (int M = 1; M <= 3; ++M)
    for (int L = 1; L <= 3; ++L) {
      const GridDomain domain(M, L);
      ConstantDriver driver(true);
      const auto state = explore(domain, driver);
      CHECK(crossings_from_exploration(state, domain) == M);
      for (const auto& row : state.rows) CHECK(row.hit_right);
    }
}

TEST_CASE("empty field: no occupation, every row stops at once") {
  const GridDomain domain(3, 2);
  ConstantDriver driver(false);
  const auto state = explore(domain, driver);
  CHECK(crossings_from_exploration(state, domain) == 0);
  for (const auto& row : state.rows) {
    CHECK(row.reached.empty());
    CHECK(row.stop_step == 1);
    CHECK(row.blocked.size() == 1);
  }
}

TEST_CASE("maximal field matches the oracle: M = 3, L = 2 gives 3") {
  const GridDomain domain(3, 2);
  ConstantDriver inner(true);
  RecordingDriver recording(inner);
  const auto state = explore(domain, recording);
  CHECK(crossings_from_exploration(state, domain) == 3);
  CHECK(menger_oracle(recording, domain) == 3);
}

TEST_CASE("single open row crosses alone") {
  // Sites on row y = 0 open (and links along it); everything else closed.
  class RowDriver : public SiteLinkDriver {
   public:
    bool occupied(int s) override { return s == 0; }
    bool linked(GridPoint target, GridPoint source) override {
      return target.y == 0 && source.y == 0;
    }
  };
  const GridDomain domain(3, 3);
  RowDriver inner;
  RecordingDriver recording(inner);
  const auto state = explore(domain, recording);
  CHECK(crossings_from_exploration(state, domain) == 1);
  CHECK(menger_oracle(recording, domain) == 1);
}

TEST_CASE("exploration count equals the menger oracle across the grid") {
  long runs = 0, nonzero = 0;
  for (int M = 1; M <= 3; ++M)
    for (int L = 1; L <= 3; ++L)
      for (double p_site : {0.3, 0.6, 0.9})
        for (double p_link : {0.3, 0.6, 0.9})
          for (int rep = 0; rep < 30; ++rep) {
            const GridDomain domain(M, L);
            int oracle = -1;
            const int ours = run_counts(domain, p_site, p_link,
                                        derive(909, M, L, rep) + 7919 * rep,
                                        &oracle);
            CHECK(ours == oracle);
            ++runs;
            nonzero += ours > 0;
          }
  CHECK(runs == 3 * 3 * 9 * 30);
  CHECK(nonzero > 100);
}

TEST_CASE("within a run, reached sets are pairwise disjoint and queries unique") {
  const GridDomain domain(3, 3);
  for (int rep = 0; rep < 50; ++rep) {
    auto inner = bernoulli_driver(0.7, 0.7, 5000 + rep);
    RecordingDriver recording(*inner);  // throws on any repeated query
    const auto state = explore(domain, recording);
    GridSet seen;
    for (const auto& row : state.rows)
      for (const auto& p : row.reached_order) CHECK(seen.insert(p).second);
    // Blocked sets are disjoint from every reached set too.
    for (const auto& row : state.rows)
      for (const auto& p : row.blocked) CHECK(!seen.count(p));
    CHECK(static_cast<int>(recording.site_queries().size()) == domain.M);
  }
}

TEST_CASE("bernoulli driver: query frequencies and deterministic replay") {
  auto a = bernoulli_driver(0.4, 0.8, 99);
  auto b = bernoulli_driver(0.4, 0.8, 99);
  long site_hits = 0, link_hits = 0;
  const int n = 10000;
  for (int s = 0; s < n; ++s) {
    const bool va = a->occupied(s);
    CHECK(va == b->occupied(s));
    site_hits += va;
    const GridPoint t{s, s + 1}, src{s, s};
    const bool la = a->linked(t, src);
    CHECK(la == b->linked(t, src));
    link_hits += la;
  }
  CHECK(std::fabs(site_hits / double(n) - 0.4) < 3 * std::sqrt(0.4 * 0.6 / n));
  CHECK(std::fabs(link_hits / double(n) - 0.8) < 3 * std::sqrt(0.8 * 0.2 / n));
  CHECK_THROWS_AS(bernoulli_driver(-0.1, 0.5, 1), std::invalid_argument);

  // Degenerate probabilities give the maximal and the empty field.
  const GridDomain domain(2, 2);
  auto always = bernoulli_driver(1.0, 1.0, 5);
  CHECK(crossings_from_exploration(explore(domain, *always), domain) == 2);
  auto never = bernoulli_driver(0.0, 0.0, 5);
  CHECK(crossings_from_exploration(explore(domain, *never), domain) == 0);
}

TEST_CASE("coupled fields: more open never means fewer crossings") {
  for (int rep = 0; rep < 2000; ++rep) {
    const GridDomain domain(1 + rep % 3, 1 + (rep / 3) % 3);
    const std::uint64_t seed = derive(24680, rep);
    const int low = run_counts(domain, 0.4, 0.5, seed);
    const int mid = run_counts(domain, 0.55, 0.7, seed);
    const int high = run_counts(domain, 0.7, 0.9, seed);
    CHECK(low <= mid);
    CHECK(mid <= high);
  }
}

TEST_CASE("read-once contract is enforced by the recording wrapper") {
  ConstantDriver inner(true);
  RecordingDriver recording(inner);
  recording.occupied(0);
  CHECK_THROWS_AS(recording.occupied(0), ProtocolViolation);
  recording.linked({1, 0}, {0, 0});
  CHECK_THROWS_AS(recording.linked({1, 0}, {1, 1}), ProtocolViolation);
}

TEST_CASE("menger oracle needs the full site block") {
  const GridDomain domain(2, 1);
  ConstantDriver inner(true);
  RecordingDriver recording(inner);
  recording.occupied(0);  // only one of the two start sites revealed
  CHECK_THROWS_AS(menger_oracle(recording, domain), std::invalid_argument);
}

TEST_CASE("transcript serialization carries every query") {
  const GridDomain domain(2, 2);
  auto inner = bernoulli_driver(0.8, 0.8, 31337);
  RecordingDriver recording(*inner);
  explore(domain, recording);
  const auto text = recording.transcript_jsonl();
  const auto lines = std::count(text.begin(), text.end(), '\n');
  CHECK(static_cast<std::size_t>(lines) ==
        recording.site_queries().size() + recording.link_queries().size());
}

TEST_CASE("domination probe: bernoulli clean, all-present clean, spiteful flagged") {
  const GridDomain domain(2, 2);

  const auto bern = domination_probe(
      [](int run) { return bernoulli_driver(0.8, 0.8, 7000 + run); }, domain,
      0.8, 4000);
  CHECK(bern.violations == 0);
  CHECK(bern.bins_evaluated > 0);

  const auto full = domination_probe(
      [](int) { return std::make_unique<ConstantDriver>(true); }, domain, 0.95,
      200);
  CHECK(full.violations == 0);
  CHECK(full.min_conditional_freq == 1.0);

  const auto spiteful = domination_probe(
      [](int) { return std::make_unique<SpitefulDriver>(); }, domain, 0.9, 200);
  CHECK(spiteful.violations > 0);
  CHECK(spiteful.min_conditional_freq == 0.0);
}
