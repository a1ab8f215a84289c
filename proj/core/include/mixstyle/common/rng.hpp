#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "mixstyle/common/error.hpp"

namespace mixstyle {

// splitmix64 finalizer. Used to derive independent stream seeds from
// (seed, salt...) tuples so worker scheduling order cannot change results.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }
inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
  return mix64(mix_seed(a, b) ^ mix64(c ^ 0x517cc1b727220a95ull));
}

// Deterministic random source. All sampling goes through explicit methods
// built on the raw mt19937_64 output; std:: distributions are avoided since
// their sequences are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double log_uniform(double lo, double hi) {
    require(lo > 0.0 && hi >= lo, "log_uniform needs 0 < lo <= hi");
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  bool bernoulli(double p) { return uniform() < p; }

  // [0, n)
  int64_t randint(int64_t n) {
    require(n > 0, "randint needs n > 0");
    return static_cast<int64_t>(engine_() % static_cast<uint64_t>(n));
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Child stream keyed on (creation seed, salt); independent of how much
  // the parent has been consumed.
  Rng derive(uint64_t salt) const { return Rng(mix_seed(seed_, salt)); }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mixstyle
