#include "texm/signal/simplex.h"

#include <algorithm>
#include <cmath>

#include "texm/error.h"

namespace texm {
namespace {

// Peak of |g0 d (1-d^2)^4 + g1 (d-1) (1-(d-1)^2)^4| is reached at d = 1/2
// with opposite unit gradients: 2 * 0.5 * 0.75^4 = 81/256.
constexpr double kNormalization = 256.0 / 81.0;

double kernel(double d) {
  const double t = 1.0 - d * d;
  const double t2 = t * t;
  return d * t2 * t2;
}

double kernel_derivative(double d) {
  const double t = 1.0 - d * d;
  return t * t * t * (1.0 - 9.0 * d * d);
}

}  // namespace

GradientNoise1d::GradientNoise1d(std::uint64_t seed) : seed_(seed) {}

double GradientNoise1d::gradient(std::int64_t lattice) const {
  const std::uint64_t h = splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(lattice)));
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

double GradientNoise1d::operator()(double x) const {
  const double cell = std::floor(x);
  const auto i0 = static_cast<std::int64_t>(cell);
  const double d0 = x - cell;
  const double v = gradient(i0) * kernel(d0) + gradient(i0 + 1) * kernel(d0 - 1.0);
  return std::clamp(v * kNormalization, -1.0, 1.0);
}

double GradientNoise1d::derivative(double x) const {
  const double cell = std::floor(x);
  const auto i0 = static_cast<std::int64_t>(cell);
  const double d0 = x - cell;
  return kNormalization * (gradient(i0) * kernel_derivative(d0) +
                           gradient(i0 + 1) * kernel_derivative(d0 - 1.0));
}

std::vector<double> simplex_noise_1d(double frequency, double duration, int sample_rate,
                                     SeededRng& rng) {
  require(frequency > 0 && std::isfinite(frequency), ErrorCode::kInvalidInput,
          "simplex frequency must be positive");
  require(sample_rate > 0 && duration >= 0, ErrorCode::kInvalidInput,
          "invalid duration or sample rate");
  const GradientNoise1d noise(rng.next_u64());
  const double offset = rng.uniform(0.0, 1024.0);
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  std::vector<double> out(n);
  const double step = frequency / sample_rate;
  for (std::size_t i = 0; i < n; ++i) out[i] = noise(offset + step * static_cast<double>(i));
  return out;
}

}  // namespace texm
