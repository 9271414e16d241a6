#include "rcm/exploration.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "rcm/errors.hpp"
#include "rcm/maxflow.hpp"

namespace rcm {

GridDomain::GridDomain(int m, int l) : M(m), L(l) {
  if (m < 1 || l < 1) throw std::invalid_argument("grid domain: need M >= 1 and L >= 1");
}

bool GridDomain::contains(GridPoint p) const {
  if (p.x >= 0 && p.x <= M - 1 && p.y >= 0 && p.y <= M - 1) return true;
  return p.x >= M && p.x <= M + L && p.y >= -L && p.y <= M + L;
}

bool GridDomain::on_left_boundary(GridPoint p) const {
  return p.x == 0 && p.y >= 0 && p.y <= M - 1;
}

bool GridDomain::on_right_boundary(GridPoint p) const {
  if (p.x == M + L && p.y >= -L && p.y <= M + L) return true;
  return p.x >= M && p.x <= M + L && (p.y == -L || p.y == M + L);
}

int GridDomain::site_count() const { return M * M + (L + 1) * (M + 2 * L + 1); }

std::vector<GridPoint> GridDomain::sites() const {
  std::vector<GridPoint> out;
  out.reserve(site_count());
  for (int x = 0; x <= M - 1; ++x)
    for (int y = 0; y <= M - 1; ++y) out.push_back({x, y});
  for (int x = M; x <= M + L; ++x)
    for (int y = -L; y <= M + L; ++y) out.push_back({x, y});
  return out;
}

namespace {

constexpr GridPoint kDirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

GridPoint add(GridPoint a, GridPoint b) { return {a.x + b.x, a.y + b.y}; }
GridPoint sub(GridPoint a, GridPoint b) { return {a.x - b.x, a.y - b.y}; }

// Clockwise quarter turn in the drawing convention used throughout:
// (dx, dy) -> (dy, -dx), i.e. west -> north -> east -> south.
GridPoint rot_cw(GridPoint d) { return {d.y, -d.x}; }

int cw_steps(GridPoint from_dir, GridPoint to_dir) {
  GridPoint d = from_dir;
  for (int i = 0; i < 4; ++i) {
    if (d == to_dir) return i;
    d = rot_cw(d);
  }
  throw std::logic_error("cw_steps: not a unit lattice direction");
}

bool lattice_adjacent(GridPoint a, GridPoint b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1;
}

std::uint64_t encode(GridPoint p) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
         static_cast<std::uint32_t>(p.y);
}

// Comparison machinery shared by boundary_order and the engine. Tracks, for
// a growth sequence x_1, x_2, ..., the anchor of each member: the latest
// earlier member it attaches to (the virtual x_0 = x_1 - e1 for the first).
class GrowthOrder {
 public:
  void push(GridPoint p) {
    const int k = static_cast<int>(members_.size());
    GridPoint anchor = k == 0 ? GridPoint{p.x - 1, p.y} : GridPoint{};
    if (k > 0) {
      int best = -1;
      for (const auto& d : kDirs) {
        auto it = index_.find(add(p, d));
        if (it != index_.end()) best = std::max(best, it->second);
      }
      if (best < 0)
        throw std::invalid_argument("growth order: point not adjacent to an earlier member");
      anchor = members_[best];
    }
    members_.push_back(p);
    anchors_.push_back(anchor);
    index_.emplace(p, k);
  }

  bool is_member(GridPoint p) const { return index_.count(p) > 0; }
  int size() const { return static_cast<int>(members_.size()); }
  GridPoint member(int k) const { return members_[k]; }

  // Largest member index adjacent to p, or -1.
  int block_of(GridPoint p) const {
    int best = -1;
    for (const auto& d : kDirs) {
      auto it = index_.find(add(p, d));
      if (it != index_.end()) best = std::max(best, it->second);
    }
    return best;
  }

  // Rank of a boundary point: its block, then its clockwise offset around
  // the block member starting from that member's anchor direction.
  std::pair<int, int> rank(GridPoint p) const {
    const int k = block_of(p);
    if (k < 0) throw std::invalid_argument("growth order: point not on the boundary");
    const GridPoint center = members_[k];
    const GridPoint anchor_dir = sub(anchors_[k], center);
    return {k, cw_steps(anchor_dir, sub(p, center))};
  }

 private:
  std::vector<GridPoint> members_;
  std::vector<GridPoint> anchors_;
  std::unordered_map<GridPoint, int, GridPointHash> index_;
};

}  // namespace

std::vector<GridPoint> boundary_order(const std::vector<GridPoint>& growth_order) {
  if (growth_order.empty())
    throw std::invalid_argument("boundary_order: empty growth set");
  GrowthOrder order;
  GridSet seen;
  for (const auto& p : growth_order) {
    if (!seen.insert(p).second)
      throw std::invalid_argument("boundary_order: repeated point");
    order.push(p);  // validates attachment for every point after the first
  }

  std::vector<GridPoint> boundary;
  GridSet emitted;
  for (int k = 0; k < order.size(); ++k) {
    const GridPoint c = order.member(k);
    for (const auto& d : kDirs) {
      const GridPoint q = add(c, d);
      if (!order.is_member(q) && !emitted.count(q)) {
        emitted.insert(q);
        boundary.push_back(q);
      }
    }
  }
  std::sort(boundary.begin(), boundary.end(),
            [&](GridPoint a, GridPoint b) { return order.rank(a) < order.rank(b); });
  return boundary;
}

namespace {

class BernoulliDriver : public SiteLinkDriver {
 public:
  BernoulliDriver(double p_site, double p_link, std::uint64_t seed)
      : p_site_(p_site), p_link_(p_link), seed_(seed) {
    if (p_site < 0 || p_site > 1 || p_link < 0 || p_link > 1)
      throw std::invalid_argument("bernoulli_driver: probabilities must be in [0,1]");
  }

  bool occupied(int s) override {
    return to_unit(derive(seed_, stream_tag::site, static_cast<std::uint64_t>(s))) <
           p_site_;
  }

  bool linked(GridPoint target, GridPoint /*source*/) override {
    // The engine asks about each target point at most once per run, so
    // keying the value by the target alone still gives i.i.d. answers
    // within a run. Unlike pair keying it also makes couplings across
    // parameters pointwise: the value a point reveals does not depend on
    // which side the exploration happened to probe it from.
    return to_unit(derive(seed_, stream_tag::link, encode(target))) < p_link_;
  }

 private:
  double p_site_, p_link_;
  std::uint64_t seed_;
};

}  // namespace

std::unique_ptr<SiteLinkDriver> bernoulli_driver(double p_site, double p_link,
                                                 std::uint64_t seed) {
  return std::make_unique<BernoulliDriver>(p_site, p_link, seed);
}

bool RecordingDriver::occupied(int s) {
  if (!seen_sites_.insert(s).second)
    throw ProtocolViolation("site queried twice: s=" + std::to_string(s));
  const bool outcome = inner_->occupied(s);
  sites_.push_back({s, outcome});
  return outcome;
}

bool RecordingDriver::linked(GridPoint target, GridPoint source) {
  if (!seen_link_targets_.insert(target).second)
    throw ProtocolViolation("link target queried twice");
  const bool outcome = inner_->linked(target, source);
  links_.push_back({target, source, outcome});
  return outcome;
}

std::string RecordingDriver::transcript_jsonl() const {
  // Interleaving is site block first, then links, matching the schedule.
  std::string s;
  char buf[128];
  for (const auto& q : sites_) {
    std::snprintf(buf, sizeof buf,
                  "{\"type\":\"site\",\"coords\":[0,%d],\"outcome\":%s}\n", q.s,
                  q.outcome ? "true" : "false");
    s += buf;
  }
  for (const auto& q : links_) {
    std::snprintf(
        buf, sizeof buf,
        "{\"type\":\"link\",\"coords\":[[%d,%d],[%d,%d]],\"outcome\":%s}\n",
        q.target.x, q.target.y, q.source.x, q.source.y,
        q.outcome ? "true" : "false");
    s += buf;
  }
  return s;
}

ExplorationState explore(const GridDomain& domain, SiteLinkDriver& driver) {
  ExplorationState state;
  state.rows.resize(domain.M);

  // First block: occupation status of every start site, in increasing s.
  std::vector<bool> occupied(domain.M);
  for (int s = 0; s < domain.M; ++s) {
    occupied[s] = driver.occupied(s);
    state.involved.insert({0, s});
  }

  for (int s = 0; s < domain.M; ++s) {
    RowState& row = state.rows[s];
    const GridPoint start{0, s};
    row.processed.push_back(start);
    if (!occupied[s]) {
      row.blocked.insert(start);
      row.stop_step = 1;
      continue;
    }
    row.reached.insert(start);
    row.reached_order.push_back(start);

    GrowthOrder order;
    order.push(start);

    // Candidate frontier: boundary points of the reached set inside the
    // domain and not yet consumed anywhere in the schedule.
    GridSet candidates;
    auto offer = [&](GridPoint q) {
      if (domain.contains(q) && !state.involved.count(q)) candidates.insert(q);
    };
    for (const auto& d : kDirs) offer(add(start, d));

    const int max_steps = domain.site_count();
    for (int step = 1; step <= max_steps; ++step) {
      if (row.hit_right || candidates.empty()) {
        row.stop_step = step;
        break;
      }
      // Largest admissible boundary point.
      GridPoint pick{};
      std::pair<int, int> pick_rank{-1, -1};
      for (const auto& q : candidates) {
        const auto r = order.rank(q);
        if (r > pick_rank) {
          pick_rank = r;
          pick = q;
        }
      }
      // Latest reached member adjacent to the pick carries the link.
      const GridPoint source = order.member(pick_rank.first);

      candidates.erase(pick);
      state.involved.insert(pick);
      row.processed.push_back(pick);

      if (driver.linked(pick, source)) {
        row.reached.insert(pick);
        row.reached_order.push_back(pick);
        order.push(pick);
        if (domain.on_right_boundary(pick)) row.hit_right = true;
        for (const auto& d : kDirs) offer(add(pick, d));
      } else {
        row.blocked.insert(pick);
      }
    }
    if (!row.stop_step) row.stop_step = max_steps;
  }
  return state;
}

int crossings_from_exploration(const ExplorationState& state,
                               const GridDomain& domain) {
  int count = 0;
  for (const auto& row : state.rows) {
    bool hit = false;
    for (const auto& p : row.reached_order)
      if (domain.on_right_boundary(p)) {
        hit = true;
        break;
      }
    count += hit;
  }
  return count;
}

int menger_oracle(const RecordingDriver& recording, const GridDomain& domain) {
  if (static_cast<int>(recording.site_queries().size()) != domain.M)
    throw std::invalid_argument("menger_oracle: incomplete recording");

  GridSet removed;
  for (const auto& q : recording.site_queries())
    if (!q.outcome) removed.insert({0, q.s});
  for (const auto& q : recording.link_queries())
    if (!q.outcome) removed.insert(q.target);

  // Links not queried are present by default; a queried failed link has its
  // target removed, so the surviving graph is fully determined by vertices.
  const auto sites = domain.sites();
  std::unordered_map<GridPoint, int, GridPointHash> id;
  std::vector<GridPoint> keep;
  for (const auto& p : sites) {
    if (removed.count(p)) continue;
    id.emplace(p, static_cast<int>(keep.size()));
    keep.push_back(p);
  }

  const int n = static_cast<int>(keep.size());
  MaxFlow flow(2 * n + 2);
  const int source = 2 * n, sink = 2 * n + 1;
  auto node_in = [](int v) { return 2 * v; };
  auto node_out = [](int v) { return 2 * v + 1; };
  for (int v = 0; v < n; ++v) {
    flow.add_edge(node_in(v), node_out(v), 1);
    if (domain.on_left_boundary(keep[v])) flow.add_edge(source, node_in(v), 1);
    if (domain.on_right_boundary(keep[v])) flow.add_edge(node_out(v), sink, 1);
  }
  for (int v = 0; v < n; ++v)
    for (const auto& d : kDirs) {
      auto it = id.find(add(keep[v], d));
      if (it != id.end()) flow.add_edge(node_out(v), node_in(it->second), 1);
    }
  return flow.run(source, sink);
}

DominationReport domination_probe(
    const std::function<std::unique_ptr<SiteLinkDriver>(int)>& make_driver,
    const GridDomain& domain, double p, int n_runs) {
  if (n_runs < 1) throw std::invalid_argument("domination_probe: n_runs must be >= 1");

  // One bin per exact transcript prefix; the digest chains (query, outcome).
  struct Bin {
    long n = 0;
    long successes = 0;
  };
  std::unordered_map<std::uint64_t, Bin> bins;

  class ProbeDriver : public SiteLinkDriver {
   public:
    ProbeDriver(SiteLinkDriver& inner, std::unordered_map<std::uint64_t, Bin>& bins)
        : inner_(&inner), bins_(&bins) {}
    bool occupied(int s) override {
      const std::uint64_t key = derive(digest_, 0x51, static_cast<std::uint64_t>(s));
      const bool outcome = inner_->occupied(s);
      record(key, outcome);
      return outcome;
    }
    bool linked(GridPoint target, GridPoint source) override {
      const std::uint64_t key =
          derive(digest_, 0x52, encode(target), encode(source));
      const bool outcome = inner_->linked(target, source);
      record(key, outcome);
      return outcome;
    }

   private:
    void record(std::uint64_t key, bool outcome) {
      auto& bin = (*bins_)[key];
      ++bin.n;
      bin.successes += outcome;
      digest_ = derive(key, outcome ? 1 : 0);
    }
    SiteLinkDriver* inner_;
    std::unordered_map<std::uint64_t, Bin>* bins_;
    std::uint64_t digest_ = 0x7472616e73ULL;
  };

  for (int run = 0; run < n_runs; ++run) {
    auto inner = make_driver(run);
    ProbeDriver probe(*inner, bins);
    explore(domain, probe);
  }

  DominationReport report;
  for (const auto& [key, bin] : bins) {
    if (bin.n < 30) continue;
    ++report.bins_evaluated;
    const double freq = static_cast<double>(bin.successes) / static_cast<double>(bin.n);
    report.min_conditional_freq = std::min(report.min_conditional_freq, freq);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(bin.n));
    if (freq < p - 3.0 * se) ++report.violations;
  }
  return report;
}

}  // namespace rcm
