#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rcm/rng.hpp"

namespace rcm {

using Vec = std::vector<double>;

// Axis-aligned box in R^d, d >= 2. Closed for membership tests.
class Region {
 public:
  Region(Vec lo, Vec hi);

  int dim() const { return static_cast<int>(lo_.size()); }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  double volume() const;
  bool contains(const Vec& x) const;

  // Strip of half-width ell in coordinates 2..d, extended to
  // [-trunc*ell, trunc*ell] along the first axis.
  static Region strip(int d, double ell, double trunc_factor);
  // Centered box [-r, r]^d.
  static Region centered_box(int d, double r);

 private:
  Vec lo_, hi_;
};

// Distribution of scalar marks: Dirac, uniform interval, finite table, or a
// finite mixture of those. Support is always a finite union of closed
// intervals, which is what the Mott goodness predicate needs.
class MarkDistribution {
 public:
  static MarkDistribution dirac(double value);
  static MarkDistribution uniform_interval(double a, double b);
  static MarkDistribution discrete_table(std::vector<double> values,
                                         std::vector<double> probs);
  static MarkDistribution mixture(std::vector<MarkDistribution> components,
                                  std::vector<double> weights);

  double sample(Prng& rng) const;

  // nu((lo,hi)) > 0 ?
  bool mass_in_open(double lo, double hi) const;
  // Support as a merged list of closed intervals (points are degenerate).
  std::vector<std::pair<double, double>> support_intervals() const;
  // E[m^k]; finite for every representable distribution.
  double moment(int k) const;

  enum class Kind { Dirac, Uniform, Discrete, Mixture };
  Kind kind() const { return kind_; }
  double dirac_value() const { return a_; }
  double uniform_lo() const { return a_; }
  double uniform_hi() const { return b_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<MarkDistribution>& components() const { return components_; }
  const std::vector<double>& weights() const { return probs_; }

 private:
  MarkDistribution() = default;
  Kind kind_ = Kind::Dirac;
  double a_ = 0.0, b_ = 0.0;           // dirac value / interval ends
  std::vector<double> values_;         // discrete support
  std::vector<double> probs_;          // discrete probabilities or weights
  std::vector<MarkDistribution> components_;
};

struct MarkedPoint {
  Vec position;
  double mark = 0.0;
  // Stable identity assigned at sampling time; survives thinning so that
  // coupled experiments can key per-pair randomness off it.
  std::uint64_t uid = 0;
};

// A finite realization of a marked point process. Immutable by convention:
// operations return new configs.
struct MarkedConfig {
  std::vector<MarkedPoint> points;
  Region region;
  double intensity = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Homogeneous Poisson point process on `region` with i.i.d. marks.
// Identical (region, rho, marks, seed, stream_id) give bit-identical output.
MarkedConfig sample_ppp(const Region& region, double rho,
                        const MarkDistribution& marks, std::uint64_t seed,
                        std::uint64_t stream_id);

// Independent thinning. Retained points keep position, mark, uid and order;
// the retention variables are keyed by uid so compositions stay coupled.
MarkedConfig thin(const MarkedConfig& config, double keep_prob,
                  std::uint64_t seed);

// Insert one extra point, listed first. Position must be inside the region
// and distinct from every existing position.
MarkedConfig palm_insert(const MarkedConfig& config, MarkedPoint point);

// JSON serialization, deterministic field order, 17 significant digits.
std::string config_to_json(const MarkedConfig& config);
MarkedConfig config_from_json(const std::string& text);

}  // namespace rcm
