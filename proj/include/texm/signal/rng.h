#pragma once

#include <cstdint>
#include <string_view>

namespace texm {

// xoshiro256** seeded through SplitMix64. Every draw is defined bit-exactly
// here (no std::*_distribution), so a seed reproduces the same stream on
// any platform.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller; the second variate is cached.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  static constexpr std::string_view kAlgorithm = "xoshiro256**/splitmix64";

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Child seed for hierarchical splitting (corpus -> texture -> version).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag);

// FNV-1a, used for tags and content fingerprints.
std::uint64_t fnv1a(std::string_view bytes,
                    std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace texm
