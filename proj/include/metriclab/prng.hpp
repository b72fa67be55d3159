#pragma once

#include <cstdint>

namespace metriclab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent sub-stream seed; distinct (seed, stream) pairs give unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Counter-mode generator: word k depends only on (seed, k), so streams are prefix-consistent
/// and can be split across workers without changing results.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t start = 0) : key_(splitmix64(seed)), counter_(start) {}

  std::uint64_t word_at(std::uint64_t index) const { return splitmix64(key_ ^ splitmix64(index)); }
  std::uint64_t next() { return word_at(counter_++); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform in (0, 1].
  double uniform_open_low() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }
  std::uint64_t below(std::uint64_t bound) { return bound == 0 ? 0 : next() % bound; }
  /// Standard normal by Box-Muller; consumes two words and discards the sine branch.
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace metriclab
