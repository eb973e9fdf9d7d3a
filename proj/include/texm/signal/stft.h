#pragma once

#include <Eigen/Dense>

#include "texm/signal/audio_clip.h"

namespace texm {

// One-sided magnitude spectrogram, stored bins x frames (column = frame).
struct Spectrogram {
  Eigen::MatrixXd magnitudes;
  int fft_size = 0;
  int hop = 0;
  int sample_rate = 0;

  Eigen::Index n_bins() const { return magnitudes.rows(); }
  Eigen::Index n_frames() const { return magnitudes.cols(); }
};

inline constexpr int kDefaultFftSize = 512;
inline constexpr int kDefaultHop = 128;

std::size_t stft_frame_count(std::size_t length, int fft_size, int hop);

// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

Spectrogram stft_magnitude(const AudioClip& clip, int fft_size = kDefaultFftSize,
                           int hop = kDefaultHop);

}  // namespace texm
