#ifndef GTDM_RNG_HPP
#define GTDM_RNG_HPP

#include <cstdint>
#include <random>

#include "common.hpp"

namespace gtdm {

// Seeded generator with hand-rolled draw routines so that sampled streams are
// bitwise reproducible for a given seed on a given platform, independent of
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Index drawn from a probability vector by CDF inversion. Probabilities
  // are assumed nonnegative and summing to ~1; any residual mass from
  // floating-point rounding goes to the last nonzero entry.
  int categorical(const Vector& probs) {
    const double x = uniform();
    double acc = 0.0;
    int last = 0;
    for (int i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      acc += probs[i];
      last = i;
      if (x < acc) return i;
    }
    return last;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace gtdm

#endif
