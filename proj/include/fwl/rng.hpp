#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "fwl/errors.hpp"
#include "fwl/vecmat.hpp"

namespace fwl {

/// Counter-based splittable PRNG (SplitMix64 core). The whole experiment
/// pipeline derives its randomness from one root seed; independent streams
/// for sub-tasks are obtained with child(), so per-cluster fits and per-run
/// stages draw from streams that do not depend on execution order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Derive an independent stream keyed by `tag`. Does not advance this
  /// generator's own state.
  Rng child(std::uint64_t tag) const {
    return Rng(mix(state_ ^ mix(tag + 0x632BE59BD9B4E019ULL)));
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Box-Muller; two uniforms consumed per draw, no cached state.
  double gaussian(double mean = 0.0, double sd = 1.0) {
    if (sd < 0.0) throw NegativeSd("gaussian: sd < 0");
    if (sd == 0.0) return mean;
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// k distinct indices drawn uniformly from [0, n) (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw KTooLarge("sample_without_replacement: k > n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_index(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// FNV-1a on a string, used to key Rng::child streams by name.
constexpr std::uint64_t stream_tag(const char* s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (; *s; ++s) h = (h ^ static_cast<unsigned char>(*s)) * 0x100000001B3ULL;
  return h;
}

}  // namespace fwl
