#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace twkit {

/// Mixes a master seed with a stage/stream name into an independent seed.
///
/// derive_seed(m, tag) = splitmix64(m ^ fnv1a64(tag)). Every seeded stream in
/// the library is derived this way, so re-running a single stage with the
/// same master seed reproduces its output exactly.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// Seeded random source. All distributions are implemented on top of the raw
/// 64-bit engine output so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n must be > 0.
  std::size_t below(std::size_t n);

  /// Standard normal via Box-Muller.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn proportionally to non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// 0, 1, ..., n-1 in a seeded random order.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

/// floor(x + 0.5): the rounding rule used wherever a fraction of rows is needed.
std::size_t round_half_up(double x);

}  // namespace twkit
