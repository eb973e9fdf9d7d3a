#include "texm/signal/stft.h"

#include <bit>
#include <cmath>
#include <numbers>

#include "texm/error.h"
#include "texm/signal/fft.h"

namespace texm {

std::size_t stft_frame_count(std::size_t length, int fft_size, int hop) {
  const auto n = static_cast<std::size_t>(fft_size);
  if (length < n) return 0;
  return (length - n) / static_cast<std::size_t>(hop) + 1;
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  }
  return w;
}

Spectrogram stft_magnitude(const AudioClip& clip, int fft_size, int hop) {
  require(fft_size > 0 && std::has_single_bit(static_cast<unsigned>(fft_size)),
          ErrorCode::kInvalidInput, "fft size must be a power of two");
  require(hop > 0 && hop <= fft_size, ErrorCode::kInvalidInput,
          "hop must be in [1, fft_size]");
  require(clip.size() >= static_cast<std::size_t>(fft_size), ErrorCode::kInvalidInput,
          "clip is shorter than one STFT frame");

  const std::size_t frames = stft_frame_count(clip.size(), fft_size, hop);
  const int bins = fft_size / 2 + 1;
  const auto window = hann_window(fft_size);

  Spectrogram spec;
  spec.fft_size = fft_size;
  spec.hop = hop;
  spec.sample_rate = clip.sample_rate();
  spec.magnitudes.resize(bins, static_cast<Eigen::Index>(frames));

  RealFft plan(static_cast<std::size_t>(fft_size));
  std::vector<double> frame(static_cast<std::size_t>(fft_size));
  std::vector<Complex> out(static_cast<std::size_t>(bins));
  const auto samples = clip.samples();
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * static_cast<std::size_t>(hop);
    for (int i = 0; i < fft_size; ++i) frame[i] = samples[start + i] * window[i];
    plan.forward(frame, out);
    for (int b = 0; b < bins; ++b) {
      spec.magnitudes(b, static_cast<Eigen::Index>(f)) = std::abs(out[b]);
    }
  }
  return spec;
}

}  // namespace texm
