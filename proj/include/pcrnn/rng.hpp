#pragma once

#include <cstdint>
#include <vector>

namespace pcrnn {

// Deterministic random source. All draws are derived from the raw 64-bit
// stream with fixed arithmetic, so identical seeds give identical results
// across platforms and standard-library versions (std::uniform_real_distribution
// and std::shuffle make no such promise).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  // splitmix64 step.
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  // Exponential with the given rate, via inversion. uniform01() < 1 keeps the
  // log argument positive.
  double exponential(double rate);

  // Fisher-Yates with draws from this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent child stream; `salt` distinguishes consumers of one run seed.
  Rng fork(std::uint64_t salt) const;

 private:
  std::uint64_t state_;
};

}  // namespace pcrnn
