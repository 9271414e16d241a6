#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "rcm/point_process.hpp"

namespace rcm {

enum class Norm { L2, L1, Linf };

double norm_of(const Vec& dx, Norm norm);

// Weight entering the Mott variable-range-hopping edge rule.
// w(a,b) = |a| + |b| + |a-b|.
double mott_w(double a, double b);

// A mark m with |m| >= zeta/2 can never carry an edge.
bool mott_mark_isolated(double m, double zeta);

// Goodness of a mark distribution for the Mott model with cutoff zeta:
// positive mass on (-zeta/2, zeta/2), and either the support meets at most
// one of (-zeta/2, 0) and (0, zeta/2), or the gap between the innermost
// support points on the two sides is below zeta/2.
bool mott_nu_is_good(const MarkDistribution& marks, double zeta);

// Connection function phi: symmetric, stationary, values in [0,1], zero
// beyond a finite l-infinity range. Three variants: a generic finite-range
// kernel, the Boolean overlap rule, and the Mott rule with cutoff zeta.
class ConnectionModel {
 public:
  using KernelFn =
      std::function<double(const Vec& dx, double mark_a, double mark_b)>;

  enum class Kind { Kernel, Boolean, Mott };

  static ConnectionModel boolean();
  static ConnectionModel mott(double zeta, Norm norm = Norm::L2);
  // Built-in kernels by name:
  //   "hard_range":  p * 1(|dx|_2 <= range)
  //   "range_decay": p * max(0, 1 - |dx|_2 / range)
  static ConnectionModel kernel(const std::string& name,
                                const std::map<std::string, double>& params);
  // Arbitrary kernel with declared l-infinity range bound (test hook;
  // symmetry/stationarity are the caller's responsibility).
  static ConnectionModel custom_kernel(std::string name, double range,
                                       KernelFn fn);

  // Edge probability; 0 when the two points share a position.
  double phi(const MarkedPoint& a, const MarkedPoint& b) const;

  // Edge rule: present iff phi > 0 and u <= phi. Indicator models are thus
  // independent of u.
  bool edge_present(const MarkedPoint& a, const MarkedPoint& b, double u) const;

  // l-infinity distance beyond which phi vanishes, for this realization.
  // Boolean derives it from the largest sampled radius.
  double range_bound(const MarkedConfig& config) const;

  Kind kind() const { return kind_; }
  double zeta() const { return zeta_; }
  Norm mott_norm() const { return norm_; }
  const std::string& kernel_name() const { return name_; }
  double declared_range() const { return range_; }

 private:
  ConnectionModel() = default;
  Kind kind_ = Kind::Boolean;
  double zeta_ = 0.0;
  Norm norm_ = Norm::L2;
  std::string name_;
  double range_ = 0.0;
  double p_ = 1.0;
  KernelFn fn_;
};

struct SymmetryReport {
  long violations = 0;
  double worst_gap = 0.0;
};

// Samples random (dx, m, m') triples and compares phi against its value
// under every coordinate permutation and every single-coordinate sign flip
// of dx. Built-in models must come back with worst_gap == 0.
SymmetryReport symmetry_audit(const ConnectionModel& model, int dim,
                              long n_samples, std::uint64_t seed);

// Positivity/finiteness of the d-th mark moment, the standing assumption
// for Boolean models with unbounded radius laws.
bool boolean_moment_ok(const MarkDistribution& marks, int d);

}  // namespace rcm
