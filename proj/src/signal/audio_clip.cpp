#include "texm/signal/audio_clip.h"

#include <algorithm>
#include <cmath>

#include "texm/error.h"

namespace texm {

AudioClip::AudioClip(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  require(sample_rate_ > 0, ErrorCode::kInvalidInput, "sample rate must be positive");
  require(!samples_.empty(), ErrorCode::kInvalidInput, "audio clip is empty");
  for (double s : samples_) {
    require(std::isfinite(s), ErrorCode::kInvalidInput, "audio clip has non-finite samples");
  }
}

double AudioClip::peak() const {
  double p = 0;
  for (double s : samples_) p = std::max(p, std::abs(s));
  return p;
}

}  // namespace texm
