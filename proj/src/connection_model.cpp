#include "rcm/connection_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rcm {

double norm_of(const Vec& dx, Norm norm) {
  switch (norm) {
    case Norm::L2: {
      double s = 0.0;
      for (double v : dx) s += v * v;
      return std::sqrt(s);
    }
    case Norm::L1: {
      double s = 0.0;
      for (double v : dx) s += std::fabs(v);
      return s;
    }
    case Norm::Linf: {
      double s = 0.0;
      for (double v : dx) s = std::max(s, std::fabs(v));
      return s;
    }
  }
  return 0.0;
}

double mott_w(double a, double b) {
  return std::fabs(a) + std::fabs(b) + std::fabs(a - b);
}

bool mott_mark_isolated(double m, double zeta) {
  if (!(zeta > 0)) throw std::invalid_argument("mott_mark_isolated: zeta must be > 0");
  return std::fabs(m) >= zeta / 2.0;
}

bool mott_nu_is_good(const MarkDistribution& marks, double zeta) {
  if (!(zeta > 0)) throw std::invalid_argument("mott_nu_is_good: zeta must be > 0");
  const double h = zeta / 2.0;
  if (!marks.mass_in_open(-h, h)) return false;

  const auto supp = marks.support_intervals();
  // supp intersects the open interval (lo,hi)?
  auto meets_open = [&](double lo, double hi) {
    for (const auto& [a, b] : supp)
      if (a < hi && b > lo) return true;
    return false;
  };
  const bool meets_neg = meets_open(-h, 0.0);
  const bool meets_pos = meets_open(0.0, h);
  if (!(meets_neg && meets_pos)) return true;

  // a_minus = sup(supp cap (-h,0)), a_plus = inf(supp cap [0,h)).
  double a_minus = -h;
  for (const auto& [a, b] : supp)
    if (a < 0.0 && b > -h) a_minus = std::max(a_minus, std::min(b, 0.0));
  double a_plus = h;
  for (const auto& [a, b] : supp)
    if (a < h && b >= 0.0) a_plus = std::min(a_plus, std::max(a, 0.0));
  return a_plus - a_minus < h;
}

ConnectionModel ConnectionModel::boolean() {
  ConnectionModel m;
  m.kind_ = Kind::Boolean;
  m.name_ = "boolean";
  return m;
}

ConnectionModel ConnectionModel::mott(double zeta, Norm norm) {
  if (!(zeta > 0)) throw std::invalid_argument("mott: zeta must be > 0");
  ConnectionModel m;
  m.kind_ = Kind::Mott;
  m.zeta_ = zeta;
  m.norm_ = norm;
  m.name_ = "mott";
  return m;
}

ConnectionModel ConnectionModel::kernel(const std::string& name,
                                        const std::map<std::string, double>& params) {
  auto get = [&](const std::string& k, double fallback) {
    auto it = params.find(k);
    return it == params.end() ? fallback : it->second;
  };
  const double range = get("range", 1.0);
  const double p = get("p", 1.0);
  if (!(range > 0)) throw std::invalid_argument("kernel: range must be > 0");
  if (p < 0 || p > 1) throw std::invalid_argument("kernel: p must be in [0,1]");

  ConnectionModel m;
  m.kind_ = Kind::Kernel;
  m.name_ = name;
  m.range_ = range;
  m.p_ = p;
  if (name == "hard_range") {
    m.fn_ = [range, p](const Vec& dx, double, double) {
      return norm_of(dx, Norm::L2) <= range ? p : 0.0;
    };
  } else if (name == "range_decay") {
    m.fn_ = [range, p](const Vec& dx, double, double) {
      const double r = norm_of(dx, Norm::L2) / range;
      return r >= 1.0 ? 0.0 : p * (1.0 - r);
    };
  } else {
    throw std::invalid_argument("kernel: unknown built-in '" + name + "'");
  }
  return m;
}

ConnectionModel ConnectionModel::custom_kernel(std::string name, double range,
                                               KernelFn fn) {
  if (!(range > 0)) throw std::invalid_argument("custom_kernel: range must be > 0");
  ConnectionModel m;
  m.kind_ = Kind::Kernel;
  m.name_ = std::move(name);
  m.range_ = range;
  m.fn_ = std::move(fn);
  return m;
}

double ConnectionModel::phi(const MarkedPoint& a, const MarkedPoint& b) const {
  if (a.position.size() != b.position.size())
    throw std::invalid_argument("phi: dimension mismatch");
  Vec dx(a.position.size());
  bool same = true;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    dx[i] = b.position[i] - a.position[i];
    if (dx[i] != 0.0) same = false;
  }
  if (same) return 0.0;

  switch (kind_) {
    case Kind::Boolean:
      return norm_of(dx, Norm::L2) <= a.mark + b.mark ? 1.0 : 0.0;
    case Kind::Mott:
      return norm_of(dx, norm_) + mott_w(a.mark, b.mark) <= zeta_ ? 1.0 : 0.0;
    case Kind::Kernel: {
      if (norm_of(dx, Norm::Linf) >= range_) return 0.0;
      const double v = fn_(dx, a.mark, b.mark);
      return std::clamp(v, 0.0, 1.0);
    }
  }
  return 0.0;
}

bool ConnectionModel::edge_present(const MarkedPoint& a, const MarkedPoint& b,
                                   double u) const {
  if (!(u >= 0.0) || !(u <= 1.0))
    throw std::invalid_argument("edge_present: u must be in [0,1]");
  const double p = phi(a, b);
  return p > 0.0 && u <= p;
}

double ConnectionModel::range_bound(const MarkedConfig& config) const {
  switch (kind_) {
    case Kind::Boolean: {
      double max_mark = 0.0;
      for (const auto& p : config.points) max_mark = std::max(max_mark, p.mark);
      return 2.0 * max_mark;
    }
    case Kind::Mott:
      // |x-y| <= zeta is necessary for an edge in any of the norms offered,
      // and each of them dominates l-infinity.
      return zeta_;
    case Kind::Kernel:
      return range_;
  }
  return 0.0;
}

SymmetryReport symmetry_audit(const ConnectionModel& model, int dim,
                              long n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("symmetry_audit: n_samples must be >= 1");
  if (dim < 2) throw std::invalid_argument("symmetry_audit: dim must be >= 2");
  Prng rng(derive(seed, stream_tag::audit));

  SymmetryReport report;
  MarkedPoint origin{Vec(dim, 0.0), 0.0, 1};
  MarkedPoint other{Vec(dim, 0.0), 0.0, 2};

  std::vector<int> perm(dim);
  for (long s = 0; s < n_samples; ++s) {
    Vec dx(dim);
    for (int j = 0; j < dim; ++j) dx[j] = rng.next_range(-2.0, 2.0);
    origin.mark = rng.next_range(-1.0, 1.0);
    other.mark = rng.next_range(-1.0, 1.0);

    other.position = dx;
    const double base = model.phi(origin, other);

    double gap = 0.0;
    std::iota(perm.begin(), perm.end(), 0);
    do {
      for (int j = 0; j < dim; ++j) other.position[j] = dx[perm[j]];
      gap = std::max(gap, std::fabs(model.phi(origin, other) - base));
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (int j = 0; j < dim; ++j) {
      other.position = dx;
      other.position[j] = -dx[j];
      gap = std::max(gap, std::fabs(model.phi(origin, other) - base));
    }

    if (gap > 0.0) ++report.violations;
    report.worst_gap = std::max(report.worst_gap, gap);
  }
  return report;
}

bool boolean_moment_ok(const MarkDistribution& marks, int d) {
  if (d < 1) throw std::invalid_argument("boolean_moment_ok: d must be >= 1");
  const auto supp = marks.support_intervals();
  for (const auto& [a, b] : supp)
    if (a < 0) return false;  // radii must be nonnegative
  const double m = marks.moment(d);
  return m > 0 && std::isfinite(m);
}

}  // namespace rcm
