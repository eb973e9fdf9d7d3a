#include <gtest/gtest.h>

#include <fstream>

#include "test_util.h"
#include "texm/error.h"
#include "texm/gram/gram.h"
#include "texm/signal/stft.h"

namespace texm::gram {
namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed,
                              double lo = 0.0, double hi = 1.0) {
  SeededRng rng(seed);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.uniform(lo, hi);
  return m;
}

// Direct transcription of the convolution and Gram sums.
Eigen::MatrixXd naive_gram(const Eigen::MatrixXd& x, const ConvBank& bank) {
  const int n_bins = static_cast<int>(x.rows());
  const int k = bank.kernel_width;
  const int m = static_cast<int>(x.cols()) - k + 1;
  const int filters = bank.filters();
  std::vector<std::vector<double>> fmap(filters, std::vector<double>(m));
  for (int f = 0; f < filters; ++f)
    for (int t = 0; t < m; ++t) {
      double acc = 0;
      for (int c = 0; c < n_bins; ++c)
        for (int j = 0; j < k; ++j) acc += bank.weight(f, c, j, n_bins) * x(c, t + j);
      fmap[f][t] = std::max(0.0, acc);
    }
  Eigen::MatrixXd g(filters, filters);
  for (int p = 0; p < filters; ++p)
    for (int q = 0; q < filters; ++q) {
      double acc = 0;
      for (int t = 0; t < m; ++t) acc += fmap[p][t] * fmap[q][t];
      g(p, q) = acc;
    }
  return g;
}

// Literal reading of the segment-folded row aggregation, 1-based indices.
GramVector naive_gram_vector(const GramSet& gs, int s) {
  GramVector out = GramVector::Zero(s);
  for (const auto& g : gs.grams) {
    const int f = static_cast<int>(g.rows());
    const int segments = f / s;
    for (int j = 1; j <= s; ++j) {
      double acc = 0;
      for (int seg = 0; seg < segments; ++seg)
        for (int i = 1; i <= f; ++i) acc += g(i - 1, seg * s + j - 1);
      out(j - 1) += acc / segments / f;
    }
  }
  return out / static_cast<double>(gs.grams.size());
}

GramSet random_set(std::uint64_t seed, int n = 6, int f = 16) {
  GramSet gs;
  for (int i = 0; i < n; ++i) gs.grams.push_back(random_matrix(f, f, seed * 31 + i, -1, 1));
  return gs;
}

GramSet scaled(const GramSet& gs, double c) {
  GramSet out = gs;
  for (auto& g : out.grams) g *= c;
  return out;
}

const ConvEnsemble& full_ensemble() {
  static const ConvEnsemble ens = init_ensemble(257, 2024);
  return ens;
}

TEST(Ensemble, ShapesFollowKernelWidths) {
  const auto& ens = full_ensemble();
  ASSERT_EQ(ens.banks().size(), 6u);
  for (std::size_t n = 0; n < 6; ++n) {
    EXPECT_EQ(ens.banks()[n].kernel_width, kKernelWidths[n]);
    EXPECT_EQ(ens.banks()[n].weights.rows(), 512);
    EXPECT_EQ(ens.banks()[n].weights.cols(), 257 * kKernelWidths[n]);
  }
  EXPECT_EQ(ens.max_kernel_width(), 128);
}

TEST(Ensemble, WeightStatisticsMatchInitLaw) {
  const auto& ens = full_ensemble();
  for (const auto& bank : ens.banks()) {
    const double n = static_cast<double>(bank.weights.size());
    const double sd = 1.0 / std::sqrt(257.0 * bank.kernel_width);
    const double mean = bank.weights.mean();
    // Sample mean within 3 standard errors of 0.
    EXPECT_LT(std::abs(mean), 3 * sd / std::sqrt(n));
    const double var = (bank.weights.array() - mean).square().sum() / (n - 1);
    EXPECT_NEAR(std::sqrt(var) / sd, 1.0, 0.02);
  }
}

TEST(Ensemble, SeedReproducesWeightsBitwise) {
  const auto a = init_ensemble(9, 5, 8);
  const auto b = init_ensemble(9, 5, 8);
  const auto c = init_ensemble(9, 6, 8);
  for (std::size_t n = 0; n < a.banks().size(); ++n) {
    EXPECT_EQ(a.banks()[n].weights, b.banks()[n].weights);
    EXPECT_NE(a.banks()[n].weights, c.banks()[n].weights);
  }
}

TEST(Ensemble, RejectsBadShapes) {
  EXPECT_THROW(ConvEnsemble(3, {ConvBank{2, Eigen::MatrixXd::Zero(4, 5)}}), Error);
  EXPECT_THROW(ConvEnsemble(0, {ConvBank{1, Eigen::MatrixXd::Zero(4, 0)}}), Error);
  EXPECT_THROW(ConvEnsemble(3, {}), Error);
}

TEST(Gram, HandInstanceWithIdentityWeights) {
  const ConvEnsemble ens(2, {ConvBank{1, Eigen::MatrixXd::Identity(2, 2)}});
  const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
  const auto maps = feature_maps(x, ens.banks()[0]);
  EXPECT_EQ(maps, Eigen::MatrixXd::Identity(2, 2));
  const auto gs = compute_gram_set(x, ens);
  ASSERT_EQ(gs.grams.size(), 1u);
  EXPECT_EQ(gs.grams[0], Eigen::MatrixXd::Identity(2, 2));
}

TEST(Gram, MatchesTripleLoopOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const int n_bins = 5;
    const int frames = 10 + static_cast<int>(seed);
    std::vector<ConvBank> banks;
    for (int k : {1, 2, 3, 7})
      banks.push_back({k, random_matrix(8, n_bins * k, seed * 10 + k, -1, 1)});
    const ConvEnsemble ens(n_bins, banks);
    const auto x = random_matrix(n_bins, frames, 100 + seed);
    const auto gs = compute_gram_set(x, ens);
    for (std::size_t n = 0; n < banks.size(); ++n)
      EXPECT_LT((gs.grams[n] - naive_gram(x, banks[n])).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Gram, ReluClearsNegativeResponses) {
  const ConvEnsemble ens(1, {ConvBank{1, (Eigen::MatrixXd(2, 1) << 1.0, -1.0).finished()}});
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(1, 4, 2.0);
  const auto gs = compute_gram_set(x, ens);
  EXPECT_EQ(gs.grams[0](0, 0), 16.0);
  EXPECT_EQ(gs.grams[0](1, 1), 0.0);
  EXPECT_EQ(gs.grams[0](0, 1), 0.0);
}

TEST(Gram, ZeroSpectrogramGivesZeroGrams) {
  const auto gs = compute_gram_set(Eigen::MatrixXd::Zero(257, 130), full_ensemble());
  ASSERT_EQ(gs.grams.size(), 6u);
  for (const auto& g : gs.grams) EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gram, SymmetricPsdOnAudio) {
  const AudioClip clip(test::white_noise(24000, 7), 16000);
  const auto gs = compute_gram_set(stft_magnitude(clip), full_ensemble());
  for (const auto& g : gs.grams) {
    ASSERT_EQ(g.rows(), 512);
    EXPECT_EQ(g, g.transpose());
    EXPECT_TRUE(g.allFinite());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-6 * g.trace());
  }
}

TEST(Gram, PipelineIsDeterministic) {
  const AudioClip clip(test::white_noise(20000, 3), 16000);
  const auto spec = stft_magnitude(clip);
  const auto e1 = init_ensemble(257, 99, 64);
  const auto e2 = init_ensemble(257, 99, 64);
  const auto a = compute_gram_set(spec, e1);
  const auto b = compute_gram_set(spec, e2);
  for (std::size_t n = 0; n < a.grams.size(); ++n) EXPECT_EQ(a.grams[n], b.grams[n]);
  EXPECT_EQ(gm(a, b), 0.0);
}

TEST(Gram, InputValidation) {
  const auto& ens = full_ensemble();
  EXPECT_THROW(compute_gram_set(Eigen::MatrixXd::Zero(257, 127), ens), Error);
  EXPECT_NO_THROW(compute_gram_set(Eigen::MatrixXd::Zero(257, 128), ens));
  try {
    compute_gram_set(Eigen::MatrixXd::Zero(129, 200), ens);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(Gm, HandValues) {
  GramSet a{{Eigen::MatrixXd::Identity(2, 2)}, ""};
  GramSet zero{{Eigen::MatrixXd::Zero(2, 2)}, ""};
  EXPECT_DOUBLE_EQ(gm(a, zero), 0.5);
  EXPECT_EQ(gm(a, a), 0.0);
}

TEST(Gm, SymmetricAndQuadraticInScale) {
  const auto a = random_set(1), b = random_set(2);
  EXPECT_EQ(gm(a, b), gm(b, a));
  EXPECT_GT(gm(a, b), 0.0);
  // Powers of two keep the scaling exact in floating point.
  EXPECT_EQ(gm(scaled(a, 4.0), scaled(b, 4.0)), 16.0 * gm(a, b));
  EXPECT_NEAR(gm(scaled(a, 3.0), scaled(b, 3.0)), 9.0 * gm(a, b), 1e-12 * gm(a, b));
}

TEST(Gm, ShapeMismatch) {
  EXPECT_THROW(gm(random_set(1, 6, 16), random_set(2, 5, 16)), Error);
  EXPECT_THROW(gm(random_set(1, 6, 16), random_set(2, 6, 8)), Error);
}

TEST(Gmcos, HandValues) {
  const auto a = random_set(3);
  EXPECT_NEAR(gmcos(a, a), 0.0, 1e-15);
  EXPECT_NEAR(gmcos(a, scaled(a, 2.0)), 0.0, 1e-15);
  Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(4, 4), e2 = e1;
  e1(0, 0) = 1;
  e2(1, 0) = 1;
  EXPECT_DOUBLE_EQ(gmcos(GramSet{{e1}, ""}, GramSet{{e2}, ""}), 1.0);
  EXPECT_DOUBLE_EQ(gmcos(GramSet{{e1}, ""}, GramSet{{-e1}, ""}), 2.0);
}

TEST(Gmcos, ScaleInvariantSymmetricBounded) {
  const auto a = random_set(4), b = random_set(5);
  EXPECT_NEAR(gmcos(scaled(a, 7.5), scaled(b, 7.5)), gmcos(a, b), 1e-12);
  EXPECT_NEAR(gmcos(a, b), gmcos(b, a), 1e-15);
  GramSet pa = a, pb = b;
  for (auto& g : pa.grams) g = g.cwiseAbs();
  for (auto& g : pb.grams) g = g.cwiseAbs();
  EXPECT_GE(gmcos(pa, pb), 0.0);
  EXPECT_LE(gmcos(pa, pb), 1.0);
}

TEST(Gmcos, ZeroNormIsDegenerate) {
  GramSet zero{{Eigen::MatrixXd::Zero(4, 4)}, ""};
  GramSet one{{Eigen::MatrixXd::Identity(4, 4)}, ""};
  try {
    gmcos(zero, one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateInput);
  }
}

TEST(GramVector, MatchesNestedLoopOracle) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto gs = random_set(seed + 20, 3, 8);
    const auto fast = accumulate_gram_vector(gs, 4);
    const auto slow = naive_gram_vector(gs, 4);
    ASSERT_EQ(fast.size(), 4);
    EXPECT_LT((fast - slow).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GramVector, FirstElementFoldsSegmentStarts) {
  // g_1 sums columns 1, s+1, 2s+1, 3s+1.
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(16, 16);
  g.col(0).setConstant(1.0);
  g.col(4).setConstant(2.0);
  g.col(8).setConstant(3.0);
  g.col(12).setConstant(4.0);
  g.col(3).setConstant(5.0);
  const auto v = accumulate_gram_vector(GramSet{{g}, ""}, 4);
  EXPECT_DOUBLE_EQ(v(0), 0.25 / 16 * (16 + 32 + 48 + 64));
  EXPECT_DOUBLE_EQ(v(3), 0.25 / 16 * 80);
  EXPECT_EQ(v(1), 0.0);
}

TEST(GramVector, ZeroAndConstantSets) {
  GramSet zero, constant;
  for (int i = 0; i < 6; ++i) {
    zero.grams.push_back(Eigen::MatrixXd::Zero(512, 512));
    constant.grams.push_back(Eigen::MatrixXd::Constant(512, 512, 2.5));
  }
  EXPECT_EQ(accumulate_gram_vector(zero), GramVector::Zero(128));
  const auto v = accumulate_gram_vector(constant);
  ASSERT_EQ(v.size(), 128);
  for (Eigen::Index j = 0; j < v.size(); ++j) EXPECT_DOUBLE_EQ(v(j), 2.5);
  EXPECT_THROW(accumulate_gram_vector(random_set(1, 2, 10), 4), Error);
}

TEST(Agm, HandValues) {
  GramVector a = GramVector::Zero(128), b = GramVector::Zero(128);
  EXPECT_EQ(agm(a, b), 0.0);
  a(0) = 1;
  EXPECT_EQ(agm(a, b), 1.0);
  a(0) = 3;
  a(1) = 4;
  EXPECT_EQ(agm(a, b), 25.0);
  EXPECT_EQ(agm(a, b), agm(b, a));
  EXPECT_THROW(agm(a, GramVector::Zero(127)), Error);
}

TEST(GramIo, RoundTripAndCorruption) {
  test::TempDir dir("gram_io");
  const auto gs = random_set(8, 3, 12);
  save_gram_set(gs, dir.path() / "g.bin");
  const auto back = load_gram_set(dir.path() / "g.bin");
  ASSERT_EQ(back.grams.size(), 3u);
  for (int n = 0; n < 3; ++n) EXPECT_EQ(back.grams[n], gs.grams[n]);

  const GramVector v = GramVector::LinSpaced(128, -1, 1);
  save_gram_vector(v, dir.path() / "v.bin");
  EXPECT_EQ(load_gram_vector(dir.path() / "v.bin"), v);

  auto code_of = [](const std::filesystem::path& p, bool vector) {
    try {
      if (vector) load_gram_vector(p);
      else load_gram_set(p);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidInput;
  };
  EXPECT_EQ(code_of(dir.path() / "v.bin", false), ErrorCode::kUnsupportedFormat);
  std::filesystem::resize_file(dir.path() / "g.bin", 200);
  EXPECT_EQ(code_of(dir.path() / "g.bin", false), ErrorCode::kTruncatedFile);
  EXPECT_EQ(code_of(dir.path() / "none.bin", true), ErrorCode::kIo);
}

}  // namespace
}  // namespace texm::gram
