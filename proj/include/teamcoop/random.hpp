#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace teamcoop::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept { return splitmix64(a ^ splitmix64(b)); }

/// Maps 64 random bits onto [0,1) with 53-bit resolution.
constexpr double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based draw keyed by (seed, pair label, epoch). Draws for one pair
/// never depend on which other pairs exist.
constexpr double pair_draw(std::uint64_t seed, std::string_view from, std::string_view to,
                           std::uint64_t epoch) noexcept {
  std::uint64_t key = mix(seed, fnv1a(from));
  key = mix(key, fnv1a(to) ^ 0x5bd1e995ULL);
  key = mix(key, epoch);
  return unit_interval(splitmix64(key));
}

/// Seedable engine with platform-independent conversions. std::mt19937_64 is
/// bit-exact by the standard; the std distributions are not, so we avoid them.
class Engine {
 public:
  explicit Engine(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  double uniform() { return unit_interval(engine_()); }
  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, bound), bound > 0. Rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace teamcoop::rng
