#pragma once

#include <cstdint>
#include <cmath>

namespace rcm {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer. Statistically strong avalanche, used both as the
// step function of the counter generator below and for key derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derive a child key from a parent key and one word. Chain for more words.
constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t word) noexcept {
  return mix64((key + kGolden) ^ mix64(word + kGolden));
}

template <typename... Rest>
constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t word,
                               Rest... rest) noexcept {
  return derive(derive(key, word), static_cast<std::uint64_t>(rest)...);
}

constexpr double to_unit(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;  // [0,1)
}

// Counter-based generator (SplitMix64 stream). Streams with distinct keys
// are independent; output depends only on (key, call index), never on how
// other streams interleave.
class Prng {
 public:
  explicit Prng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept { return mix64(key_ + (++counter_) * kGolden); }
  double next_unit() noexcept { return to_unit(next_u64()); }
  double next_range(double a, double b) noexcept { return a + (b - a) * next_unit(); }

  // Uniform in {0, ..., n-1} by rejection (exact, unbiased).
  std::uint64_t next_below(std::uint64_t n) noexcept {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Exact Poisson sample. Splits large means into chunks of at most 16 and
// applies Knuth's product-of-uniforms method to each; the sum of the chunk
// counts is again Poisson with the requested mean.
inline std::uint64_t sample_poisson(Prng& rng, double lambda) {
  std::uint64_t total = 0;
  while (lambda > 0) {
    const double chunk = lambda > 16.0 ? 16.0 : lambda;
    lambda -= chunk;
    const double threshold = std::exp(-chunk);
    double prod = 1.0;
    std::uint64_t k = 0;
    do {
      ++k;
      prod *= rng.next_unit();
    } while (prod > threshold);
    total += k - 1;
  }
  return total;
}

// Fixed stream tags so different purposes never share a substream.
namespace stream_tag {
inline constexpr std::uint64_t ppp = 0x5050500000000001ULL;
inline constexpr std::uint64_t point_uid = 0x5050500000000002ULL;
inline constexpr std::uint64_t thin = 0x5050500000000003ULL;
inline constexpr std::uint64_t palm = 0x5050500000000004ULL;
inline constexpr std::uint64_t edge_u = 0x5050500000000005ULL;
inline constexpr std::uint64_t site = 0x5050500000000006ULL;
inline constexpr std::uint64_t link = 0x5050500000000007ULL;
inline constexpr std::uint64_t campaign = 0x5050500000000008ULL;
inline constexpr std::uint64_t audit = 0x5050500000000009ULL;
inline constexpr std::uint64_t replica = 0x505050000000000aULL;
}  // namespace stream_tag

}  // namespace rcm
