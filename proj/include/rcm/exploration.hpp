#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <unordered_set>
#include <vector>

#include "rcm/rng.hpp"

namespace rcm {

struct GridPoint {
  int x = 0, y = 0;
  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct GridPointHash {
  std::size_t operator()(const GridPoint& p) const noexcept {
    return static_cast<std::size_t>(
        mix64((static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
              static_cast<std::uint32_t>(p.y)));
  }
};

using GridSet = std::unordered_set<GridPoint, GridPointHash>;

// Exploration domain: an M x M block attached to the left of an
// (L+1) x (M+2L+1) block, with crossings sought from the left edge of the
// small block to the far/top/bottom edges of the large one.
struct GridDomain {
  int M = 1;
  int L = 1;

  GridDomain(int m, int l);

  bool contains(GridPoint p) const;
  bool on_left_boundary(GridPoint p) const;   // {0} x {0..M-1}
  bool on_right_boundary(GridPoint p) const;  // far column plus top/bottom rows
  int site_count() const;
  std::vector<GridPoint> sites() const;       // row-major enumeration
};

// Source of occupation and link variables. The engine queries each start
// site once (in increasing s) and each ordered link at most once, in
// exploration order; drivers may be adaptive.
class SiteLinkDriver {
 public:
  virtual ~SiteLinkDriver() = default;
  virtual bool occupied(int s) = 0;
  virtual bool linked(GridPoint target, GridPoint source) = 0;
};

// I.i.d. driver; variables are keyed by query identity, so two drivers with
// the same seed and different probabilities are monotonically coupled.
std::unique_ptr<SiteLinkDriver> bernoulli_driver(double p_site, double p_link,
                                                 std::uint64_t seed);

// Wrapper that records the transcript and enforces the read-once contract.
class RecordingDriver : public SiteLinkDriver {
 public:
  explicit RecordingDriver(SiteLinkDriver& inner) : inner_(&inner) {}

  bool occupied(int s) override;
  bool linked(GridPoint target, GridPoint source) override;

  struct SiteQuery {
    int s;
    bool outcome;
  };
  struct LinkQuery {
    GridPoint target, source;
    bool outcome;
  };
  const std::vector<SiteQuery>& site_queries() const { return sites_; }
  const std::vector<LinkQuery>& link_queries() const { return links_; }
  std::string transcript_jsonl() const;

 private:
  SiteLinkDriver* inner_;
  std::vector<SiteQuery> sites_;
  std::vector<LinkQuery> links_;
  std::unordered_set<int> seen_sites_;
  GridSet seen_link_targets_;
};

// State of one growth row: the points processed in order (x^s_1, x^s_2,
// ...), the reached set E in insertion order, the blocked set F, and the
// step at which the row stopped.
struct RowState {
  std::vector<GridPoint> processed;
  std::vector<GridPoint> reached_order;
  GridSet reached;
  GridSet blocked;
  std::optional<int> stop_step;
  bool hit_right = false;
};

struct ExplorationState {
  std::vector<RowState> rows;  // one per start site s = 0..M-1
  GridSet involved;            // every point consumed by the schedule
};

// Total order on the outer lattice boundary of an ordered growth set:
// blocks by the latest adjacent member, clockwise within a block starting
// from that member's own attachment direction. Returns the boundary in
// increasing order. The first member's virtual anchor sits one step to its
// left.
std::vector<GridPoint> boundary_order(const std::vector<GridPoint>& growth_order);

// Runs the full schedule: occupation of the M start sites, then one growth
// row per occupied start, always extending at the largest admissible
// boundary point not yet consumed.
ExplorationState explore(const GridDomain& domain, SiteLinkDriver& driver);

// Number of rows whose reached set touches the right boundary.
int crossings_from_exploration(const ExplorationState& state,
                               const GridDomain& domain);

// Independent count: maximum number of vertex-disjoint left-right paths in
// the site graph left over by the exploration (failed sites and failed link
// targets removed; unqueried links treated as present), via unit-capacity
// vertex-split max-flow on the recorded realization.
int menger_oracle(const RecordingDriver& recording, const GridDomain& domain);

struct DominationReport {
  double min_conditional_freq = 1.0;
  long violations = 0;
  long bins_evaluated = 0;
};

// Runs the exploration n_runs times on fresh drivers, bins every query by
// the exact transcript so far, and reports the lowest conditional success
// frequency over bins with at least 30 samples together with the number of
// bins falling below p by more than three binomial standard errors.
DominationReport domination_probe(
    const std::function<std::unique_ptr<SiteLinkDriver>(int)>& make_driver,
    const GridDomain& domain, double p, int n_runs);

}  // namespace rcm
