#pragma once

#include <span>
#include <vector>

namespace texm {

// Mono sample buffer plus its sample rate. Construction validates that the
// buffer is non-empty and finite; amplitudes are nominally in [-1, 1].
class AudioClip {
 public:
  AudioClip(std::vector<double> samples, int sample_rate);

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& data() const { return samples_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  double duration() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }
  double peak() const;

  bool operator==(const AudioClip&) const = default;

 private:
  std::vector<double> samples_;
  int sample_rate_;
};

inline constexpr int kDefaultSampleRate = 16000;

}  // namespace texm
