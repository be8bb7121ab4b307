#ifndef MTA_RNG_HPP
#define MTA_RNG_HPP

#include <cstdint>

namespace mta {

// Splitmix64 generator. Small state, trivially seedable, and identical
// output on every platform, which is what the per-restart seed derivation
// relies on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d1f54075c29bdbULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi]; returns lo exactly when lo == hi.
  double uniform(double lo, double hi) {
    if (lo == hi) return lo;
    return lo + (hi - lo) * uniform();
  }

  // +1 or -1 with equal probability.
  double rademacher() { return (next_u64() & 1ULL) ? 1.0 : -1.0; }

 private:
  std::uint64_t state_;
};

// Deterministic seed derivation for independent work units. Serial and
// parallel execution must agree, so every job derives its own stream from
// (master, a, b) instead of sharing a generator.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  Rng mixer(master ^ (a * 0xd6e8feb86659fd93ULL) ^
            (b * 0xca01f9dd57a44b13ULL));
  mixer.next_u64();
  return mixer.next_u64();
}

}  // namespace mta

#endif  // MTA_RNG_HPP
