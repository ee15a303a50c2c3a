#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace threshreg {

// splitmix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 with explicit substreams so replicate k draws the same numbers
// no matter which worker runs it or in which order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return Rng(mix_seed(master_seed, stream_id));
  }

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Marsaglia polar method with a cached spare; self-contained so the draw
  // sequence does not depend on the standard library version.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  long poisson(double mean) {
    std::poisson_distribution<long> dist(mean);
    return dist(engine_);
  }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace threshreg
