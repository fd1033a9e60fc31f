#pragma once

#include <cstdint>
#include <vector>

namespace dogma {

// Deterministic xoshiro256** generator with explicit sampling helpers.
// std::mt19937 would work for the raw stream, but the standard
// distributions are implementation-defined, so seeded runs would stop
// being reproducible across standard libraries. Everything here is
// pinned down to the bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform integer in [0, bound). bound == 0 returns 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  // Box-Muller normal deviate.
  double normal(double mean = 0.0, double stddev = 1.0);

  // Derived generator for an independent substream. Does not advance
  // this generator, so inserting forks never shifts existing draws.
  Rng fork(std::uint64_t stream) const;

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dogma
