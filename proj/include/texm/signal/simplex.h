#pragma once

#include <cstdint>
#include <vector>

#include "texm/signal/rng.h"

namespace texm {

// 1-D gradient ("simplex") noise on an integer lattice. Gradients are hashed
// from (seed, lattice index), so the field is unbounded and seekable. Each
// lattice point contributes g * d * (1 - d^2)^4; the sum is rescaled by its
// exact maximum (81/256) so values stay inside [-1, 1].
class GradientNoise1d {
 public:
  explicit GradientNoise1d(std::uint64_t seed);

  double operator()(double x) const;
  // d/dx of operator().
  double derivative(double x) const;

 private:
  double gradient(std::int64_t lattice) const;
  std::uint64_t seed_;
};

// Samples the noise field at `frequency` lattice cells per second, starting
// at a seed-dependent offset. Throws on frequency <= 0.
std::vector<double> simplex_noise_1d(double frequency, double duration,
                                     int sample_rate, SeededRng& rng);

}  // namespace texm
