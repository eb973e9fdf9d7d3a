#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "texm/signal/stft.h"

namespace texm::gram {

inline constexpr std::array<int, 6> kKernelWidths{2, 4, 8, 16, 64, 128};
inline constexpr int kFilters = 512;
inline constexpr int kGramVectorLength = 128;

// One untrained 1-D convolution layer over spectrogram frames, with the
// frequency bins as input channels. weights(f, j * n_bins + c) is the tap
// `j` weight of filter `f` on channel `c`; that layout lets a window of k
// consecutive frames be read straight out of column-major storage.
struct ConvBank {
  int kernel_width = 0;
  Eigen::MatrixXd weights;  // filters x (n_bins * kernel_width)

  int filters() const { return static_cast<int>(weights.rows()); }
  double weight(int f, int c, int j, int n_bins) const { return weights(f, j * n_bins + c); }
};

class ConvEnsemble {
 public:
  ConvEnsemble(int n_bins, std::vector<ConvBank> banks, std::uint64_t seed = 0);

  int n_bins() const { return n_bins_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<ConvBank>& banks() const { return banks_; }
  int max_kernel_width() const;

 private:
  int n_bins_;
  std::vector<ConvBank> banks_;
  std::uint64_t seed_;
};

// Weights ~ Normal(0, 1 / (n_bins * k)), drawn filter by filter, channel by
// channel, tap by tap, from a per-bank stream derived from `seed`.
ConvEnsemble init_ensemble(int n_bins, std::uint64_t seed, int filters = kFilters,
                           std::span<const int> widths = kKernelWidths);

struct GramSet {
  std::vector<Eigen::MatrixXd> grams;
  std::string source;
};

using GramVector = Eigen::VectorXd;

// ReLU(conv(spectrogram)), filters x (n_frames - k + 1). Stride 1, no padding.
Eigen::MatrixXd feature_maps(const Eigen::MatrixXd& magnitudes, const ConvBank& bank);

// G = F F^T per bank, raw sums over frames.
GramSet compute_gram_set(const Eigen::MatrixXd& magnitudes, const ConvEnsemble& ens);
GramSet compute_gram_set(const Spectrogram& spec, const ConvEnsemble& ens);

// (1/N) sum_n (1/D) ||A_n - B_n||^2
double gm(const GramSet& a, const GramSet& b);
// Mean over banks of the cosine distance between flattened matrices.
double gmcos(const GramSet& a, const GramSet& b);

// Column sums of each Gram, folded over segments of length s and averaged
// (1/segments)(1/F), then averaged over banks.
GramVector accumulate_gram_vector(const GramSet& gs, int s = kGramVectorLength);
// Squared Euclidean norm of the difference.
double agm(const GramVector& a, const GramVector& b);

// Little-endian float64 with an 8-byte magic and a shape prefix.
void save_gram_set(const GramSet& gs, const std::filesystem::path& path);
GramSet load_gram_set(const std::filesystem::path& path);
void save_gram_vector(const GramVector& g, const std::filesystem::path& path);
GramVector load_gram_vector(const std::filesystem::path& path);

}  // namespace texm::gram
