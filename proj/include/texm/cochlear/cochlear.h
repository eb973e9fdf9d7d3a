#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "texm/signal/audio_clip.h"

namespace texm::cochlear {

using Bands = std::vector<std::vector<double>>;

inline constexpr int kCochlearFilters = 36;
inline constexpr int kModulationFilters = 20;
inline constexpr int kStatCount = 6432;

struct CochlearConfig {
  int n_cochlear_filters = kCochlearFilters;
  int n_modulation_filters = kModulationFilters;
  double compression_exponent = 0.3;
  // Edges of the ERB-rate axis; filter centres sit strictly inside.
  double cochlear_low_hz = 20.0;
  double cochlear_high_hz = 8000.0;
  double envelope_rate = 400.0;
  double modulation_low_hz = 0.5;
  double modulation_high_hz = 200.0;
  double modulation_q = 2.0;
  double min_duration = 0.5;

  // Counts and exponent are fixed; only the band edges are adjustable.
  void validate(int sample_rate) const;
};

double hz_to_erb_rate(double hz);
double erb_rate_to_hz(double erb_rate);
// Equivalent rectangular bandwidth (Glasberg & Moore).
double erb_bandwidth(double hz);

// n centres equally spaced in ERB-rate, excluding the two range edges.
std::vector<double> cochlear_centers(const CochlearConfig& cfg);
std::vector<double> modulation_centers(const CochlearConfig& cfg);

// 4th-order gammatone magnitude responses applied with zero phase, unity
// gain at each centre frequency.
Bands gammatone_decompose(const AudioClip& clip, const CochlearConfig& cfg = {});

// |hilbert(band)|^0.3, resampled to the envelope rate, clamped at 0.
Bands compressed_envelopes(const Bands& subbands, int sample_rate,
                           const CochlearConfig& cfg = {});

// Band-limited FFT resampling by an integer decimation factor. The input is
// truncated to a whole number of output samples.
std::vector<double> decimate_fft(std::span<const double> x, int factor);

// Zero-phase constant-Q bandpass bank applied in the frequency domain.
Bands modulation_decompose(std::span<const double> envelope, const CochlearConfig& cfg = {});

// Envelope pairs compared in the modulation correlations: every ordered
// (i, j) with |i - j| <= 2, self included, clipped at the edges. Over 36
// bands that is 36*5 - 6 = 174 pairs.
struct EnvelopePair {
  int a = 0;
  int b = 0;
};
inline constexpr std::string_view kPairStrategy = "ordered-window5";
inline constexpr int kModulationPairs = 174;
std::vector<EnvelopePair> modulation_pairs(int n_bands);

struct CochlearStats {
  Eigen::VectorXd s1_env_power;      // 36
  Eigen::MatrixXd s2_env_marginals;  // 36 x 4: mean, var/mean^2, skewness, kurtosis
  Eigen::VectorXd s3_env_variance;   // 36
  Eigen::MatrixXd s4_env_corr;       // 36 x 36
  Eigen::MatrixXd s5_mod_power;      // 36 x 20
  Eigen::MatrixXd s6_mod_variance;   // 36 x 20
  Eigen::MatrixXd s7_mod_corr;       // 174 x 20
  // Correlations or normalized moments that were undefined and set to 0.
  int degenerate = 0;

  std::array<Eigen::VectorXd, 7> sets() const;
  Eigen::VectorXd flatten() const;
};

// Pearson correlation, or 0 when either side is (numerically) constant.
double safe_correlation(std::span<const double> x, std::span<const double> y, bool* degenerate);

CochlearStats stats_from_envelopes(const Bands& envelopes, const CochlearConfig& cfg = {});
CochlearStats compute_stats(const AudioClip& clip, const CochlearConfig& cfg = {});

// Sum over the seven sets of the cosine distance between set vectors.
double cpm(const CochlearStats& a, const CochlearStats& b);

void to_json(nlohmann::json& j, const CochlearStats& s);
void from_json(const nlohmann::json& j, CochlearStats& s);
void save_stats(const CochlearStats& s, const std::filesystem::path& path);
CochlearStats load_stats(const std::filesystem::path& path);

}  // namespace texm::cochlear
