#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "test_util.h"
#include "texm/cochlear/cochlear.h"
#include "texm/error.h"
#include "texm/signal/stats.h"

namespace texm::cochlear {
namespace {

constexpr int kSr = 16000;

double energy(const std::vector<double>& x) {
  double e = 0;
  for (double v : x) e += v * v;
  return e;
}

std::vector<double> gaussian_noise(std::size_t n, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = 0.3 * rng.normal();
  return x;
}

const CochlearStats& noise_stats() {
  static const CochlearStats s = compute_stats(AudioClip(gaussian_noise(32000, 1), kSr));
  return s;
}

TEST(Cochlear, CentresAreErbSpacedInsideRange) {
  const CochlearConfig cfg;
  const auto c = cochlear_centers(cfg);
  ASSERT_EQ(c.size(), 36u);
  EXPECT_GT(c.front(), 20.0);
  EXPECT_LT(c.back(), 8000.0);
  const double step = hz_to_erb_rate(c[1]) - hz_to_erb_rate(c[0]);
  for (std::size_t i = 1; i < c.size(); ++i)
    EXPECT_NEAR(hz_to_erb_rate(c[i]) - hz_to_erb_rate(c[i - 1]), step, 1e-9);
  EXPECT_NEAR(erb_rate_to_hz(hz_to_erb_rate(1234.5)), 1234.5, 1e-9);
  EXPECT_NEAR(erb_bandwidth(1000.0), 24.7 * 5.37, 1e-12);
}

TEST(Cochlear, ToneAtCentreWinsItsBand) {
  const auto centres = cochlear_centers({});
  for (int k : {3, 10, 20, 30, 35}) {
    const AudioClip tone(test::sine(centres[k], 1.0, kSr, 0.5), kSr);
    const auto bands = gammatone_decompose(tone);
    ASSERT_EQ(bands.size(), 36u);
    std::size_t best = 0;
    for (std::size_t b = 0; b < bands.size(); ++b) {
      ASSERT_EQ(bands[b].size(), tone.size());
      if (energy(bands[b]) > energy(bands[best])) best = b;
    }
    EXPECT_EQ(best, static_cast<std::size_t>(k));
    // Unity gain at the centre.
    EXPECT_NEAR(test::rms(bands[k], 8000) / test::rms(tone.data(), 8000), 1.0, 0.02) << k;
  }
}

TEST(Cochlear, ZeroInputGivesZeroBands) {
  const auto bands = gammatone_decompose(AudioClip(std::vector<double>(8000, 0.0), kSr));
  for (const auto& b : bands) EXPECT_EQ(energy(b), 0.0);
}

TEST(Cochlear, NoiseEnergyIsCoveredAcrossMidBands) {
  const auto x = gaussian_noise(64000, 3);
  const auto bands = gammatone_decompose(AudioClip(x, kSr));
  const auto p_in = test::power_spectrum(x, 2048);
  std::vector<double> p_sum(p_in.size(), 0.0);
  for (const auto& b : bands) {
    const auto p = test::power_spectrum(b, 2048);
    for (std::size_t k = 0; k < p.size(); ++k) p_sum[k] += p[k];
  }
  double in = 0, out = 0;
  for (std::size_t k = 0; k < p_in.size(); ++k) {
    const double f = double(k) * kSr / 2048;
    if (f < 300 || f > 5000) continue;
    in += p_in[k];
    out += p_sum[k];
  }
  EXPECT_LT(std::abs(10 * std::log10(out / in)), 3.0);
}

TEST(Cochlear, TooShortClip) {
  EXPECT_THROW(gammatone_decompose(AudioClip(std::vector<double>(7999, 0.1), kSr)), Error);
  CochlearConfig bad;
  bad.n_cochlear_filters = 30;
  EXPECT_THROW(gammatone_decompose(AudioClip(std::vector<double>(16000, 0.1), kSr), bad), Error);
}

TEST(Envelopes, CompressionArithmetic) {
  // A band whose Hilbert envelope is exactly a constant (a bin-centred
  // cosine over a whole number of periods) compresses to constant^0.3.
  const Bands band{test::sine(400.0, 1.0, kSr, 1.0, std::numbers::pi / 2)};
  const auto one = compressed_envelopes(band, kSr);
  ASSERT_EQ(one[0].size(), 400u);
  for (double v : one[0]) ASSERT_NEAR(v, 1.0, 1e-9);
  const Bands half{test::sine(400.0, 1.0, kSr, 0.5, std::numbers::pi / 2)};
  const auto compressed = compressed_envelopes(half, kSr);
  for (double v : compressed[0]) ASSERT_NEAR(v, 0.8123, 1e-4);
  EXPECT_NEAR(std::pow(0.5, 0.3), 0.8123, 1e-4);
}

TEST(Envelopes, CompressionPreservesOrderAndSign) {
  const auto x = gaussian_noise(16000, 5);
  std::vector<double> louder(x);
  for (auto& v : louder) v *= 2.0;
  const auto a = compressed_envelopes({x}, kSr)[0];
  const auto b = compressed_envelopes({louder}, kSr)[0];
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_GE(a[i], 0.0);
    EXPECT_NEAR(b[i], std::pow(2.0, 0.3) * a[i], 1e-9);
  }
}

TEST(Envelopes, DecimationKeepsInBandSines) {
  const auto x = test::sine(20.0, 1.0, kSr);
  const auto y = decimate_fft(x, 40);
  ASSERT_EQ(y.size(), 400u);
  const auto ref = test::sine(20.0, 1.0, 400);
  for (std::size_t i = 0; i < y.size(); ++i) ASSERT_NEAR(y[i], ref[i], 1e-9);
  EXPECT_EQ(decimate_fft(std::vector<double>(4039, 1.0), 40).size(), 100u);
}

TEST(Modulation, CountsAndDcRejection) {
  const CochlearConfig cfg;
  const auto centres = modulation_centers(cfg);
  ASSERT_EQ(centres.size(), 20u);
  EXPECT_DOUBLE_EQ(centres.front(), 0.5);
  EXPECT_NEAR(centres.back(), 200.0, 1e-9);
  const auto bands = modulation_decompose(std::vector<double>(800, 0.7), cfg);
  ASSERT_EQ(bands.size(), 20u);
  for (const auto& b : bands) EXPECT_LT(energy(b), 1e-20);
}

TEST(Modulation, ModulatedEnvelopeSelectsItsBand) {
  const CochlearConfig cfg;
  const auto centres = modulation_centers(cfg);
  for (int k : {4, 8, 12, 16}) {
    // Use a bin-centred rate close to the band centre.
    const double f = std::round(centres[k] * 2.0) / 2.0;
    auto env = test::sine(f, 2.0, 400, 0.3);
    for (auto& v : env) v += 1.0;
    const auto bands = modulation_decompose(env, cfg);
    std::size_t best = 0;
    for (std::size_t b = 0; b < bands.size(); ++b)
      if (energy(bands[b]) > energy(bands[best])) best = b;
    EXPECT_EQ(best, static_cast<std::size_t>(k)) << f;
  }
}

TEST(Modulation, ThirtySixEnvelopesGiveSevenHundredTwentyBands) {
  const auto envs = compressed_envelopes(
      gammatone_decompose(AudioClip(gaussian_noise(16000, 2), kSr)), kSr);
  std::size_t total = 0;
  for (const auto& e : envs) total += modulation_decompose(e).size();
  EXPECT_EQ(total, 720u);
}

TEST(Stats, PairEnumerationGives174) {
  const auto pairs = modulation_pairs(36);
  ASSERT_EQ(pairs.size(), 174u);
  EXPECT_EQ(36 * 5 - 6, 174);
  EXPECT_EQ(174 * 20, 3480);
  for (const auto& p : pairs) EXPECT_LE(std::abs(p.a - p.b), 2);
}

TEST(Stats, TotalCountIs6432) {
  const auto& s = noise_stats();
  const auto sets = s.sets();
  const std::array<Eigen::Index, 7> sizes{36, 144, 36, 1296, 720, 720, 3480};
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(sets[i].size(), sizes[i]) << i;
  EXPECT_EQ(s.flatten().size(), kStatCount);
  EXPECT_TRUE(s.flatten().allFinite());
  EXPECT_EQ(s.degenerate, 0);
}

TEST(Stats, EnvelopeCorrelationMatrixShape) {
  const auto& s = noise_stats();
  EXPECT_EQ(s.s4_env_corr, s.s4_env_corr.transpose());
  for (int i = 0; i < 36; ++i) EXPECT_EQ(s.s4_env_corr(i, i), 1.0);
  EXPECT_LE(s.s4_env_corr.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_LE(s.s7_mod_corr.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Stats, DeterministicBitForBit) {
  const AudioClip clip(gaussian_noise(16000, 9), kSr);
  EXPECT_EQ(compute_stats(clip).flatten(), compute_stats(clip).flatten());
}

TEST(Stats, CircularShiftInvariance) {
  const auto x = gaussian_noise(32000, 4);
  std::vector<double> shifted(x.size());
  const std::size_t shift = 40 * 137;
  for (std::size_t i = 0; i < x.size(); ++i) shifted[(i + shift) % x.size()] = x[i];
  const auto a = compute_stats(AudioClip(x, kSr)).sets();
  const auto b = compute_stats(AudioClip(shifted, kSr)).sets();
  for (std::size_t i = 0; i < 7; ++i)
    EXPECT_LT((a[i] - b[i]).norm() / a[i].norm(), 0.02) << "set " << i + 1;
}

TEST(Stats, GaussianMomentsAgainstDirectOracle) {
  const auto x = gaussian_noise(100000, 21);
  double m = 0;
  for (double v : x) m += v;
  m /= x.size();
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= x.size();
  m3 /= x.size();
  m4 /= x.size();
  const Moments mo = moments(x);
  EXPECT_NEAR(mo.skewness, m3 / std::pow(m2, 1.5), 1e-9);
  EXPECT_NEAR(mo.kurtosis, m4 / (m2 * m2), 1e-9);
  EXPECT_NEAR(mo.skewness, 0.0, 0.1);
  EXPECT_NEAR(mo.kurtosis, 3.0, 0.1);
}

TEST(Stats, ConstantEnvelopesAreFlaggedNotNaN) {
  Bands envs(36, std::vector<double>(400, 0.5));
  const auto s = stats_from_envelopes(envs);
  EXPECT_TRUE(s.flatten().allFinite());
  EXPECT_GT(s.degenerate, 0);
  for (int i = 0; i < 36; ++i) EXPECT_EQ(s.s4_env_corr(i, i), 1.0);
  EXPECT_EQ(s.s4_env_corr(0, 1), 0.0);
  bool flag = false;
  EXPECT_EQ(safe_correlation(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}, &flag),
            0.0);
  EXPECT_TRUE(flag);
}

TEST(Cpm, IdentityScaleAndSymmetry) {
  const auto& a = noise_stats();
  EXPECT_EQ(cpm(a, a), 0.0);
  CochlearStats twice = a;
  twice.s1_env_power *= 2;
  twice.s2_env_marginals *= 2;
  twice.s3_env_variance *= 2;
  twice.s4_env_corr *= 2;
  twice.s5_mod_power *= 2;
  twice.s6_mod_variance *= 2;
  twice.s7_mod_corr *= 2;
  EXPECT_NEAR(cpm(a, twice), 0.0, 1e-15);
  // A pure tone has flat envelopes and no modulation to correlate; mixing in
  // a little noise keeps every set defined.
  auto tone = test::sine(440, 1.0, kSr, 0.5);
  const auto hiss = test::white_noise(tone.size(), 9, 0.05);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] += hiss[i];
  const auto b = compute_stats(AudioClip(tone, kSr));
  EXPECT_EQ(cpm(a, b), cpm(b, a));
  EXPECT_GT(cpm(a, b), 0.0);
  EXPECT_LE(cpm(a, b), 14.0);
}

TEST(Cpm, OneOrthogonalSetGivesExactlyOne) {
  CochlearStats a = noise_stats();
  a.s1_env_power.setZero();
  a.s1_env_power(0) = 1.0;
  CochlearStats b = a;
  b.s1_env_power.setZero();
  b.s1_env_power(1) = 3.0;
  EXPECT_DOUBLE_EQ(cpm(a, b), 1.0);
}

TEST(Cpm, ZeroSetIsDegenerate) {
  CochlearStats a = noise_stats();
  CochlearStats b = a;
  b.s3_env_variance.setZero();
  try {
    cpm(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateInput);
  }
}

TEST(StatsIo, JsonRoundTripIsExact) {
  test::TempDir dir("cochlear_io");
  const auto& s = noise_stats();
  save_stats(s, dir.path() / "s.json");
  const auto back = load_stats(dir.path() / "s.json");
  EXPECT_EQ(back.flatten(), s.flatten());
  std::ofstream(dir.path() / "bad.json") << R"({"s1_env_power": [1, 2]})";
  EXPECT_THROW(load_stats(dir.path() / "bad.json"), Error);
}

}  // namespace
}  // namespace texm::cochlear
