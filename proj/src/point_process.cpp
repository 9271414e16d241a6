#include "rcm/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace rcm {

Region::Region(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) throw std::invalid_argument("region: lo/hi dimension mismatch");
  if (lo_.size() < 2) throw std::invalid_argument("region: dimension must be >= 2");
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i]))
      throw std::invalid_argument("region: non-finite bound");
    if (!(lo_[i] < hi_[i])) throw std::invalid_argument("region: lo must be < hi in every coordinate");
  }
}

double Region::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo_.size(); ++i) v *= hi_[i] - lo_[i];
  return v;
}

bool Region::contains(const Vec& x) const {
  if (x.size() != lo_.size()) return false;
  for (std::size_t i = 0; i < lo_.size(); ++i)
    if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
  return true;
}

Region Region::strip(int d, double ell, double trunc_factor) {
  if (d < 2) throw std::invalid_argument("strip: dimension must be >= 2");
  if (!(ell > 0) || !(trunc_factor > 0)) throw std::invalid_argument("strip: ell and trunc_factor must be > 0");
  Vec lo(d, -ell), hi(d, ell);
  lo[0] = -trunc_factor * ell;
  hi[0] = trunc_factor * ell;
  return Region(std::move(lo), std::move(hi));
}

Region Region::centered_box(int d, double r) {
  if (!(r > 0)) throw std::invalid_argument("centered_box: r must be > 0");
  return Region(Vec(d, -r), Vec(d, r));
}

MarkDistribution MarkDistribution::dirac(double value) {
  MarkDistribution m;
  m.kind_ = Kind::Dirac;
  m.a_ = value;
  return m;
}

MarkDistribution MarkDistribution::uniform_interval(double a, double b) {
  if (!(a < b)) throw std::invalid_argument("mark uniform: need a < b");
  MarkDistribution m;
  m.kind_ = Kind::Uniform;
  m.a_ = a;
  m.b_ = b;
  return m;
}

MarkDistribution MarkDistribution::discrete_table(std::vector<double> values,
                                                  std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size())
    throw std::invalid_argument("mark table: values/probs size mismatch");
  double total = 0.0;
  for (double p : probs) {
    if (p < 0) throw std::invalid_argument("mark table: negative probability");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::invalid_argument("mark table: probabilities must sum to 1");
  MarkDistribution m;
  m.kind_ = Kind::Discrete;
  m.values_ = std::move(values);
  m.probs_ = std::move(probs);
  return m;
}

MarkDistribution MarkDistribution::mixture(std::vector<MarkDistribution> components,
                                           std::vector<double> weights) {
  if (components.empty() || components.size() != weights.size())
    throw std::invalid_argument("mark mixture: components/weights size mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("mark mixture: negative weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::invalid_argument("mark mixture: weights must sum to 1");
  MarkDistribution m;
  m.kind_ = Kind::Mixture;
  m.components_ = std::move(components);
  m.probs_ = std::move(weights);
  return m;
}

double MarkDistribution::sample(Prng& rng) const {
  switch (kind_) {
    case Kind::Dirac:
      return a_;
    case Kind::Uniform:
      return rng.next_range(a_, b_);
    case Kind::Discrete: {
      const double u = rng.next_unit();
      double cum = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) {
        cum += probs_[i];
        if (u < cum) return values_[i];
      }
      return values_.back();
    }
    case Kind::Mixture: {
      const double u = rng.next_unit();
      double cum = 0.0;
      for (std::size_t i = 0; i < components_.size(); ++i) {
        cum += probs_[i];
        if (u < cum) return components_[i].sample(rng);
      }
      return components_.back().sample(rng);
    }
  }
  return a_;
}

bool MarkDistribution::mass_in_open(double lo, double hi) const {
  if (!(lo < hi)) return false;
  switch (kind_) {
    case Kind::Dirac:
      return lo < a_ && a_ < hi;
    case Kind::Uniform:
      return std::max(a_, lo) < std::min(b_, hi);
    case Kind::Discrete:
      for (std::size_t i = 0; i < values_.size(); ++i)
        if (probs_[i] > 0 && lo < values_[i] && values_[i] < hi) return true;
      return false;
    case Kind::Mixture:
      for (std::size_t i = 0; i < components_.size(); ++i)
        if (probs_[i] > 0 && components_[i].mass_in_open(lo, hi)) return true;
      return false;
  }
  return false;
}

std::vector<std::pair<double, double>> MarkDistribution::support_intervals() const {
  std::vector<std::pair<double, double>> out;
  switch (kind_) {
    case Kind::Dirac:
      out.emplace_back(a_, a_);
      break;
    case Kind::Uniform:
      out.emplace_back(a_, b_);
      break;
    case Kind::Discrete:
      for (std::size_t i = 0; i < values_.size(); ++i)
        if (probs_[i] > 0) out.emplace_back(values_[i], values_[i]);
      break;
    case Kind::Mixture:
      for (std::size_t i = 0; i < components_.size(); ++i) {
        if (probs_[i] <= 0) continue;
        auto sub = components_[i].support_intervals();
        out.insert(out.end(), sub.begin(), sub.end());
      }
      break;
  }
  std::sort(out.begin(), out.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& iv : out) {
    if (!merged.empty() && iv.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, iv.second);
    else
      merged.push_back(iv);
  }
  return merged;
}

double MarkDistribution::moment(int k) const {
  if (k < 0) throw std::invalid_argument("moment: k must be >= 0");
  switch (kind_) {
    case Kind::Dirac:
      return std::pow(a_, k);
    case Kind::Uniform: {
      // (b^{k+1} - a^{k+1}) / ((k+1)(b-a))
      return (std::pow(b_, k + 1) - std::pow(a_, k + 1)) /
             (static_cast<double>(k + 1) * (b_ - a_));
    }
    case Kind::Discrete: {
      double s = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i)
        s += probs_[i] * std::pow(values_[i], k);
      return s;
    }
    case Kind::Mixture: {
      double s = 0.0;
      for (std::size_t i = 0; i < components_.size(); ++i)
        s += probs_[i] * components_[i].moment(k);
      return s;
    }
  }
  return 0.0;
}

namespace {

bool same_position(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace

MarkedConfig sample_ppp(const Region& region, double rho,
                        const MarkDistribution& marks, std::uint64_t seed,
                        std::uint64_t stream_id) {
  if (!std::isfinite(rho) || rho < 0) throw std::invalid_argument("sample_ppp: rho must be finite and >= 0");
  const int d = region.dim();
  const std::uint64_t key = derive(seed, stream_tag::ppp, stream_id);
  Prng rng(key);

  const std::uint64_t n = sample_poisson(rng, rho * region.volume());

  MarkedConfig config{{}, region, rho, seed, stream_id};
  config.points.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    MarkedPoint p;
    p.position.resize(d);
    // Coordinates in fixed order, then the mark, so the draw sequence is
    // independent of everything but (key, call index).
    bool fresh = false;
    while (!fresh) {
      for (int j = 0; j < d; ++j)
        p.position[j] = rng.next_range(region.lo()[j], region.hi()[j]);
      fresh = true;
      for (const auto& q : config.points) {
        if (same_position(q.position, p.position)) {
          fresh = false;  // probability-zero tie: resample this point
          break;
        }
      }
    }
    p.mark = marks.sample(rng);
    p.uid = derive(key, stream_tag::point_uid, i);
    config.points.push_back(std::move(p));
  }
  return config;
}

MarkedConfig thin(const MarkedConfig& config, double keep_prob,
                  std::uint64_t seed) {
  if (!(keep_prob >= 0.0) || !(keep_prob <= 1.0))
    throw std::invalid_argument("thin: keep_prob must be in [0,1]");
  MarkedConfig out{{}, config.region, config.intensity * keep_prob,
                   config.seed, config.stream_id};
  out.points.reserve(config.points.size());
  for (const auto& p : config.points) {
    const double u = to_unit(derive(seed, stream_tag::thin, p.uid));
    if (u < keep_prob) out.points.push_back(p);
  }
  return out;
}

MarkedConfig palm_insert(const MarkedConfig& config, MarkedPoint point) {
  if (static_cast<int>(point.position.size()) != config.region.dim())
    throw std::invalid_argument("palm_insert: dimension mismatch");
  if (!config.region.contains(point.position))
    throw std::invalid_argument("palm_insert: point outside region");
  for (const auto& q : config.points)
    if (same_position(q.position, point.position))
      throw std::invalid_argument("palm_insert: duplicate position");
  if (point.uid == 0)
    point.uid = derive(config.seed, stream_tag::palm, config.stream_id,
                       config.points.size());
  MarkedConfig out{{}, config.region, config.intensity, config.seed,
                   config.stream_id};
  out.points.reserve(config.points.size() + 1);
  out.points.push_back(std::move(point));
  out.points.insert(out.points.end(), config.points.begin(), config.points.end());
  return out;
}

namespace {

void append_g17(std::string& s, double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  s += buf;
}

void append_vec(std::string& s, const Vec& v) {
  s += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    append_g17(s, v[i]);
  }
  s += ']';
}

}  // namespace

std::string config_to_json(const MarkedConfig& config) {
  std::string s;
  s.reserve(64 + config.points.size() * 48);
  s += "{\"d\":";
  s += std::to_string(config.region.dim());
  s += ",\"lo\":";
  append_vec(s, config.region.lo());
  s += ",\"hi\":";
  append_vec(s, config.region.hi());
  s += ",\"rho\":";
  append_g17(s, config.intensity);
  s += ",\"seed\":";
  s += std::to_string(config.seed);
  s += ",\"stream_id\":";
  s += std::to_string(config.stream_id);
  s += ",\"points\":[";
  for (std::size_t i = 0; i < config.points.size(); ++i) {
    if (i) s += ',';
    s += "{\"x\":";
    append_vec(s, config.points[i].position);
    s += ",\"m\":";
    append_g17(s, config.points[i].mark);
    s += '}';
  }
  s += "]}";
  return s;
}

MarkedConfig config_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const int d = j.at("d").get<int>();
  Vec lo = j.at("lo").get<Vec>(), hi = j.at("hi").get<Vec>();
  if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
    throw std::invalid_argument("config json: lo/hi size does not match d");
  MarkedConfig config{{}, Region(std::move(lo), std::move(hi)),
                      j.at("rho").get<double>(), j.at("seed").get<std::uint64_t>(),
                      j.at("stream_id").get<std::uint64_t>()};
  const std::uint64_t key = derive(config.seed, stream_tag::ppp, config.stream_id);
  std::uint64_t i = 0;
  for (const auto& pj : j.at("points")) {
    MarkedPoint p;
    p.position = pj.at("x").get<Vec>();
    p.mark = pj.at("m").get<double>();
    p.uid = derive(key, stream_tag::point_uid, i++);
    config.points.push_back(std::move(p));
  }
  return config;
}

}  // namespace rcm
